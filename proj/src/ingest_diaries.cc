// Copyright 2026 The elecvuln Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "elecvuln/csv.h"
#include "elecvuln/ingest.h"

namespace elecvuln {

ActivityCodeMap ActivityCodeMap::create(std::vector<Rule> rules) {
  if (rules.empty() || !rules.back().prefix.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "activity code map must end with a catch-all rule (empty prefix)");
  }
  for (std::size_t i = 0; i + 1 < rules.size(); ++i) {
    if (rules[i].prefix.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("catch-all rule at position {} shadows the rules after it", i));
    }
  }
  return ActivityCodeMap(std::move(rules));
}

ActivityCodeMap ActivityCodeMap::atus_default() {
  using AC = ActivityClass;
  return create({
      {"0103", AC::kEssentialHealth},      // health-related self care
      {"0804", AC::kEssentialHealth},      // medical and care services
      {"01", AC::kBiologicalNeeds},        // sleeping, grooming
      {"11", AC::kBiologicalNeeds},        // eating and drinking
      {"05", AC::kWorking},
      {"06", AC::kEducation},
      {"02", AC::kHouseholdManagement},
      {"03", AC::kPersonalObligations},    // caring for household members
      {"04", AC::kPersonalObligations},
      {"07", AC::kPersonalObligations},    // consumer purchases
      {"08", AC::kPersonalObligations},    // banking, personal services
      {"09", AC::kPersonalObligations},
      {"10", AC::kPersonalObligations},    // government services
      {"15", AC::kPersonalObligations},    // volunteering
      {"12", AC::kPersonalPreference},     // socializing, leisure
      {"13", AC::kPersonalPreference},     // sports
      {"14", AC::kPersonalPreference},     // religious
      {"16", AC::kPersonalPreference},     // telephone calls
      {"18", AC::kOthers},                 // traveling
      {"", AC::kOthers},
  });
}

ActivityCodeMap ActivityCodeMap::canonical() {
  std::vector<Rule> rules;
  for (ActivityClass c : kAllClasses) rules.push_back({std::string(class_label(c)), c});
  rules.push_back({"", ActivityClass::kOthers});
  return create(std::move(rules));
}

ActivityClass ActivityCodeMap::resolve(std::string_view code) const {
  if (code == kGapCode) return ActivityClass::kOthers;
  for (const Rule& rule : rules_) {
    if (code.starts_with(rule.prefix)) return rule.activity;
  }
  return rules_.back().activity;
}

namespace {

constexpr std::array<std::string_view, 5> kDiaryColumns = {
    "person_id", "weight", "start_min", "duration_min", "code"};
constexpr std::string_view kAttrPrefix = "attr:";

struct PendingRecord {
  DiaryRecord record;
  std::size_t first_line = 0;
  bool weight_set = false;
  std::string failure;  // non-empty: record is dropped
};

}  // namespace

Parsed<DiaryRecord> parse_diaries(std::istream& in, const ActivityCodeMap& code_map) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(ErrorCode::kParse, "diary file is empty");
  const auto& cols = header->fields;
  if (cols.size() < kDiaryColumns.size() ||
      !std::equal(kDiaryColumns.begin(), kDiaryColumns.end(), cols.begin())) {
    throw Error(ErrorCode::kParse,
                "malformed diary header: expected person_id,weight,start_min,duration_min,code");
  }
  std::vector<std::string> attr_keys;
  std::set<std::string> seen_keys;
  for (std::size_t i = kDiaryColumns.size(); i < cols.size(); ++i) {
    std::string_view col = cols[i];
    if (!col.starts_with(kAttrPrefix) || col.size() == kAttrPrefix.size()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("malformed diary header: unexpected column '{}'", col));
    }
    std::string key(col.substr(kAttrPrefix.size()));
    if (!seen_keys.insert(key).second) {
      throw Error(ErrorCode::kParse,
                  fmt::format("malformed diary header: duplicate column '{}'", col));
    }
    attr_keys.push_back(std::move(key));
  }

  Parsed<DiaryRecord> result;
  ParseReport& report = result.report;
  std::vector<PendingRecord> pending;
  std::unordered_map<std::string, std::size_t> index_of_person;

  auto drop_row = [&](std::size_t line, const std::string& subject, std::string reason) {
    ++report.rows_dropped;
    report.issues.push_back({line, subject, std::move(reason)});
  };

  while (auto row = reader.next()) {
    ++report.rows_read;
    const auto& f = row->fields;
    if (f.size() != cols.size()) {
      drop_row(row->line, f.empty() ? "" : f[0],
               fmt::format("expected {} fields, found {}", cols.size(), f.size()));
      continue;
    }
    const std::string& person = f[0];
    if (person.empty()) {
      drop_row(row->line, person, "empty person_id");
      continue;
    }
    auto weight = parse_double(f[1]);
    auto start = parse_int(f[2]);
    auto duration = parse_int(f[3]);
    if (!weight) {
      drop_row(row->line, person, fmt::format("unparsable weight '{}'", f[1]));
      continue;
    }
    if (!start || *start < 0 || *start >= kMinutesPerDay) {
      drop_row(row->line, person, fmt::format("start_min '{}' outside 0..1439", f[2]));
      continue;
    }
    if (!duration) {
      drop_row(row->line, person, fmt::format("unparsable duration '{}'", f[3]));
      continue;
    }
    if (*duration < 0) {
      drop_row(row->line, person, "negative duration");
      continue;
    }
    if (*duration == 0) {
      drop_row(row->line, person, "zero duration");
      continue;
    }
    if (*start + *duration > kMinutesPerDay) {
      drop_row(row->line, person, "entry extends past the end of the day");
      continue;
    }

    auto [it, inserted] = index_of_person.try_emplace(person, pending.size());
    if (inserted) {
      pending.emplace_back();
      pending.back().record.person_id = person;
      pending.back().first_line = row->line;
    }
    PendingRecord& p = pending[it->second];
    if (!p.weight_set) {
      p.record.sample_weight = *weight;
      p.weight_set = true;
      if (*weight < 0) p.failure = "negative sample weight";
    } else if (*weight != p.record.sample_weight && p.failure.empty()) {
      p.failure = "inconsistent sample weight across rows";
    }
    for (std::size_t k = 0; k < attr_keys.size(); ++k) {
      const std::string& value = f[kDiaryColumns.size() + k];
      if (!value.empty()) p.record.attributes.try_emplace(attr_keys[k], value);
    }
    p.record.entries.push_back({static_cast<int>(*start), static_cast<int>(*duration),
                                f[4], ActivityClass::kOthers});
  }

  for (PendingRecord& p : pending) {
    DiaryRecord& rec = p.record;
    auto& entries = rec.entries;
    std::stable_sort(entries.begin(), entries.end(),
                     [](const DiaryEntry& a, const DiaryEntry& b) {
                       return a.start_min < b.start_min;
                     });
    if (p.failure.empty()) {
      for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].start_min < entries[i - 1].end_min()) {
          p.failure = fmt::format("overlapping entries at minute {}", entries[i].start_min);
          break;
        }
      }
    }
    if (!p.failure.empty()) {
      ++report.records_dropped;
      report.issues.push_back({p.first_line, rec.person_id, p.failure});
      continue;
    }

    std::vector<DiaryEntry> filled;
    filled.reserve(entries.size() + 2);
    int cursor = 0;
    for (DiaryEntry& e : entries) {
      if (e.start_min > cursor) {
        filled.push_back({cursor, e.start_min - cursor, std::string(kGapCode),
                          ActivityClass::kOthers});
      }
      e.activity = code_map.resolve(e.code);
      cursor = e.end_min();
      filled.push_back(std::move(e));
    }
    if (cursor < kMinutesPerDay) {
      filled.push_back({cursor, kMinutesPerDay - cursor, std::string(kGapCode),
                        ActivityClass::kOthers});
    }
    entries = std::move(filled);
    result.items.push_back(std::move(rec));
  }

  // Persons whose every row was rejected never reach the pending list.
  std::set<std::string> kept_or_pending;
  for (const PendingRecord& p : pending) kept_or_pending.insert(p.record.person_id);
  std::set<std::string> lost;
  for (const ParseIssue& issue : report.issues) {
    if (!issue.subject.empty() && !kept_or_pending.count(issue.subject)) {
      lost.insert(issue.subject);
    }
  }
  report.records_dropped += lost.size();
  report.records_kept = result.items.size();
  return result;
}

void write_diaries(std::ostream& out, std::span<const DiaryRecord> records) {
  std::set<std::string> keys;
  for (const DiaryRecord& r : records) {
    for (const auto& [k, v] : r.attributes) keys.insert(k);
  }
  std::vector<std::string> header(kDiaryColumns.begin(), kDiaryColumns.end());
  for (const std::string& k : keys) header.push_back(std::string(kAttrPrefix) + k);
  csv::write_row(out, header);

  for (const DiaryRecord& r : records) {
    for (const DiaryEntry& e : r.entries) {
      std::vector<std::string> row = {r.person_id, format_double(r.sample_weight),
                                      std::to_string(e.start_min),
                                      std::to_string(e.duration_min), e.code};
      for (const std::string& k : keys) {
        auto it = r.attributes.find(k);
        row.push_back(it == r.attributes.end() ? std::string() : it->second);
      }
      csv::write_row(out, row);
    }
  }
}

}  // namespace elecvuln
