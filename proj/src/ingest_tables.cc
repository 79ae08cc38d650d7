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

#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "elecvuln/csv.h"
#include "elecvuln/ingest.h"

namespace elecvuln {

std::array<double, kNumSchoolLevels> ZoneDemographics::school_shares() const {
  std::array<double, kNumSchoolLevels> out{};
  for (std::size_t i = 0; i < kNumSchoolLevels; ++i) {
    auto it = shares.find(std::string(kSchoolShareColumns[i]));
    if (it != shares.end()) out[i] = it->second;
  }
  return out;
}

Parsed<ZoneDemographics> parse_demographics(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(ErrorCode::kParse, "demographics file is empty");
  const auto& cols = header->fields;
  if (cols.size() < 2 || cols[0] != "zone_id" || cols[1] != "population") {
    throw Error(ErrorCode::kParse,
                "malformed demographics header: expected zone_id,population,share_*");
  }
  std::set<std::string> seen;
  for (std::size_t i = 2; i < cols.size(); ++i) {
    if (!std::string_view(cols[i]).starts_with("share_") || !seen.insert(cols[i]).second) {
      throw Error(ErrorCode::kParse,
                  fmt::format("malformed demographics header: bad column '{}'", cols[i]));
    }
  }

  Parsed<ZoneDemographics> result;
  ParseReport& report = result.report;
  std::set<std::string> ids;
  auto reject = [&](std::size_t line, const std::string& zone, std::string reason) {
    ++report.rows_dropped;
    ++report.records_dropped;
    report.issues.push_back({line, zone, std::move(reason)});
  };

  while (auto row = reader.next()) {
    ++report.rows_read;
    const auto& f = row->fields;
    if (f.size() != cols.size()) {
      reject(row->line, f.empty() ? "" : f[0],
             fmt::format("expected {} fields, found {}", cols.size(), f.size()));
      continue;
    }
    ZoneDemographics zone;
    zone.zone_id = f[0];
    if (zone.zone_id.empty()) {
      reject(row->line, "", "empty zone_id");
      continue;
    }
    auto population = parse_int(f[1]);
    if (!population || *population < 0) {
      reject(row->line, zone.zone_id, "population must be a non-negative integer");
      continue;
    }
    zone.population = *population;
    std::string failure;
    for (std::size_t i = 2; i < cols.size() && failure.empty(); ++i) {
      if (f[i].empty()) continue;
      auto share = parse_double(f[i]);
      if (!share || *share < 0 || *share > 1) {
        failure = fmt::format("{} '{}' outside [0,1]", cols[i], f[i]);
      } else {
        zone.shares[cols[i]] = *share;
      }
    }
    if (failure.empty()) {
      double school_total = 0;
      for (double s : zone.school_shares()) school_total += s;
      if (school_total > 1 + 1e-9) failure = "school-level shares sum above 1";
    }
    if (failure.empty() && !ids.insert(zone.zone_id).second) failure = "duplicate zone_id";
    if (!failure.empty()) {
      reject(row->line, zone.zone_id, failure);
      continue;
    }
    result.items.push_back(std::move(zone));
  }
  report.records_kept = result.items.size();
  return result;
}

void write_demographics(std::ostream& out, std::span<const ZoneDemographics> zones) {
  std::set<std::string> columns;
  for (const auto& z : zones) {
    for (const auto& [k, v] : z.shares) columns.insert(k);
  }
  std::vector<std::string> header = {"zone_id", "population"};
  header.insert(header.end(), columns.begin(), columns.end());
  csv::write_row(out, header);
  for (const auto& z : zones) {
    std::vector<std::string> row = {z.zone_id, std::to_string(z.population)};
    for (const std::string& c : columns) {
      auto it = z.shares.find(c);
      row.push_back(it == z.shares.end() ? std::string() : format_double(it->second));
    }
    csv::write_row(out, row);
  }
}

Parsed<TimeLocationPath> parse_gps(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(ErrorCode::kParse, "gps file is empty");
  const std::vector<std::string> expected = {"person_id", "t_min", "x", "y"};
  if (header->fields != expected) {
    throw Error(ErrorCode::kParse, "malformed gps header: expected person_id,t_min,x,y");
  }

  Parsed<TimeLocationPath> result;
  ParseReport& report = result.report;
  std::vector<TimeLocationPath> paths;
  std::vector<std::size_t> first_line;
  std::vector<std::string> failure;
  std::unordered_map<std::string, std::size_t> index_of_person;

  while (auto row = reader.next()) {
    ++report.rows_read;
    const auto& f = row->fields;
    auto drop = [&](std::string reason) {
      ++report.rows_dropped;
      report.issues.push_back({row->line, f.empty() ? "" : f[0], std::move(reason)});
    };
    if (f.size() != 4) {
      drop(fmt::format("expected 4 fields, found {}", f.size()));
      continue;
    }
    if (f[0].empty()) {
      drop("empty person_id");
      continue;
    }
    auto t = parse_double(f[1]);
    auto x = parse_double(f[2]);
    auto y = parse_double(f[3]);
    if (!t || *t < 0 || *t >= kMinutesPerDay) {
      drop(fmt::format("t_min '{}' outside [0,1440)", f[1]));
      continue;
    }
    if (!x || !y) {
      drop("unparsable coordinate");
      continue;
    }
    auto [it, inserted] = index_of_person.try_emplace(f[0], paths.size());
    if (inserted) {
      paths.push_back({f[0], {}});
      first_line.push_back(row->line);
      failure.emplace_back();
    }
    TimeLocationPath& path = paths[it->second];
    GpsFix fix{*t, {*x, *y}};
    if (!path.points.empty() && path.points.back().t_min == fix.t_min) {
      path.points.back() = fix;
    } else {
      if (!path.points.empty() && fix.t_min < path.points.back().t_min &&
          failure[it->second].empty()) {
        failure[it->second] =
            fmt::format("non-monotonic timestamp {} at line {}", f[1], row->line);
      }
      path.points.push_back(fix);
    }
  }

  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!failure[i].empty()) {
      ++report.records_dropped;
      report.issues.push_back({first_line[i], paths[i].person_id, failure[i]});
      continue;
    }
    result.items.push_back(std::move(paths[i]));
  }
  report.records_kept = result.items.size();
  return result;
}

void write_gps(std::ostream& out, std::span<const TimeLocationPath> paths) {
  out << "person_id,t_min,x,y\n";
  for (const auto& p : paths) {
    for (const auto& fix : p.points) {
      std::vector<std::string> row = {p.person_id, format_double(fix.t_min),
                                      format_double(fix.position.x),
                                      format_double(fix.position.y)};
      csv::write_row(out, row);
    }
  }
}

}  // namespace elecvuln
