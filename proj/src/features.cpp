#include "mobipred/features.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mobipred/errors.hpp"

namespace mobipred {

std::span<const std::string> feature_names() {
  static const std::array<std::string, 8> names = {
      "pdtw", "pdte", "tjw", "tje", "aatw", "aate", "aiw_assoc", "aie_assoc"};
  return {names.data(), names.size()};
}

double feature_value(const DeviceFeatures& f, const std::string& name) {
  if (name == "pdtw") return f.pdtw;
  if (name == "pdte") return f.pdte;
  if (name == "tjw") return f.tjw;
  if (name == "tje") return f.tje;
  if (name == "aatw") return f.aatw;
  if (name == "aate") return f.aate;
  if (name == "aiw_assoc") return f.aiw_assoc;
  if (name == "aie_assoc") return f.aie_assoc;
  throw ConfigInvalid("unknown feature: " + name);
}

namespace {

bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

BuildingCoords BuildingCoords::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoFailure("cannot open coordinates: " + file.string());
  BuildingCoords coords;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw MalformedLine("coordinates need 'building,x_m,y_m'", line_no);
    std::string name = line.substr(0, c1);
    double x = 0, y = 0;
    bool ok_x = parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), x);
    bool ok_y = parse_double(std::string_view(line).substr(c2 + 1), y);
    if (!ok_x || !ok_y) {
      if (line_no == 1) continue;  // header row
      throw MalformedLine("non-numeric coordinates", line_no);
    }
    coords.set(name, x, y);
  }
  return coords;
}

void BuildingCoords::set(const std::string& building, double x_m, double y_m) {
  coords_[building] = {x_m, y_m};
}

std::optional<std::pair<double, double>> BuildingCoords::find(
    const std::string& building) const {
  auto it = coords_.find(building);
  if (it == coords_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return q * b > a ? q - 1 : q;
}

}  // namespace

std::int64_t Calendar::day_index(std::int64_t epoch_s) const {
  return floor_div(epoch_s + tz_offset_s, 86400);
}

bool Calendar::is_weekend(std::int64_t epoch_s) const {
  // epoch day 0 is a Thursday, so Saturday and Sunday are days 2 and 3 mod 7
  std::int64_t dow = ((day_index(epoch_s) % 7) + 7) % 7;
  return dow == 2 || dow == 3;
}

DeviceFeatures compute_features(std::span<const AssociationRecord> records,
                                const BuildingCoords& coords, const Calendar& calendar) {
  std::vector<AssociationRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const AssociationRecord& a, const AssociationRecord& b) {
              if (a.lease_begin != b.lease_begin) return a.lease_begin < b.lease_begin;
              return a.ap_name < b.ap_name;
            });

  std::set<std::string> missing;
  std::vector<std::string> buildings(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    buildings[i] = building_of(sorted[i].ap_name);
    if (!coords.find(buildings[i])) missing.insert(buildings[i]);
  }
  if (!missing.empty()) {
    std::string what = "buildings without coordinates:";
    for (const auto& b : missing) what += " " + b;
    throw MissingCoordinates(what);
  }

  // occupancy[weekend][building] and activity[weekend][day], seconds
  std::map<std::string, double> occupancy[2];
  std::map<std::int64_t, double> activity[2];
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::int64_t t = sorted[i].lease_begin;
    const std::int64_t end = sorted[i].lease_end;
    while (t < end) {
      std::int64_t day = calendar.day_index(t);
      std::int64_t next_midnight = (day + 1) * 86400 - calendar.tz_offset_s;
      std::int64_t piece_end = std::min(end, next_midnight);
      int we = calendar.is_weekend(t) ? 1 : 0;
      double dur = static_cast<double>(piece_end - t);
      occupancy[we][buildings[i]] += dur;
      activity[we][day] += dur;
      t = piece_end;
    }
    if (t == sorted[i].lease_begin) {
      // zero-length lease still marks the day active
      activity[calendar.is_weekend(t) ? 1 : 0][calendar.day_index(t)] += 0.0;
    }
  }

  double tj[2] = {0.0, 0.0};
  double gap_sum[2] = {0.0, 0.0};
  std::int64_t gap_n[2] = {0, 0};
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    int we = calendar.is_weekend(sorted[i].lease_begin) ? 1 : 0;
    gap_sum[we] += static_cast<double>(sorted[i].lease_begin - sorted[i - 1].lease_begin);
    gap_n[we] += 1;
    if (buildings[i] != buildings[i - 1]) {
      auto a = *coords.find(buildings[i - 1]);
      auto b = *coords.find(buildings[i]);
      tj[we] += std::hypot(b.first - a.first, b.second - a.second);
    }
  }

  DeviceFeatures f;
  auto modal = [](const std::map<std::string, double>& occ) {
    double best = 0.0;
    for (const auto& [bld, sec] : occ) best = std::max(best, sec);
    return best;
  };
  f.pdtw = modal(occupancy[0]);
  f.pdte = modal(occupancy[1]);
  f.tjw = tj[0];
  f.tje = tj[1];
  auto mean_activity = [](const std::map<std::int64_t, double>& act) {
    if (act.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [day, sec] : act) sum += sec;
    return sum / static_cast<double>(act.size());
  };
  f.aatw = mean_activity(activity[0]);
  f.aate = mean_activity(activity[1]);
  f.aiw_assoc = gap_n[0] > 0 ? gap_sum[0] / static_cast<double>(gap_n[0]) : 0.0;
  f.aie_assoc = gap_n[1] > 0 ? gap_sum[1] / static_cast<double>(gap_n[1]) : 0.0;
  return f;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInput("length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateInput("need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("zero variance");
  return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlation_report(const std::map<std::string, double>& accuracy,
                                     const std::map<std::string, DeviceFeatures>& features,
                                     const std::map<std::string, DeviceClass>& classes) {
  CorrelationReport report;
  std::map<DeviceClass, std::vector<std::string>> joined;
  std::set<std::string> all;
  for (const auto& [d, a] : accuracy) all.insert(d);
  for (const auto& [d, f] : features) all.insert(d);
  for (const auto& d : all) {
    auto ai = accuracy.find(d);
    auto fi = features.find(d);
    auto ci = classes.find(d);
    if (ai == accuracy.end() || fi == features.end() || ci == classes.end()) {
      report.dropped += 1;
      continue;
    }
    joined[ci->second].push_back(d);
  }
  for (const auto& [cls, devices] : joined) {
    for (const auto& feat : feature_names()) {
      CorrelationCell cell;
      cell.cls = cls;
      cell.feature = feat;
      cell.n_devices = static_cast<int>(devices.size());
      std::vector<double> xs, ys;
      xs.reserve(devices.size());
      ys.reserve(devices.size());
      for (const auto& d : devices) {
        xs.push_back(feature_value(features.at(d), feat));
        ys.push_back(accuracy.at(d));
      }
      try {
        cell.r = pearson(xs, ys);
      } catch (const DegenerateInput&) {
        cell.r = std::nullopt;
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

void write_correlations_csv(std::ostream& os, const CorrelationReport& report) {
  os << "class,feature,r,n_devices\n";
  char buf[32];
  for (const auto& cell : report.cells) {
    if (cell.r) {
      std::snprintf(buf, sizeof(buf), "%.6f", *cell.r);
      os << to_string(cell.cls) << ',' << cell.feature << ',' << buf << ','
         << cell.n_devices << '\n';
    } else {
      os << to_string(cell.cls) << ',' << cell.feature << ",NA," << cell.n_devices
         << '\n';
    }
  }
}

}  // namespace mobipred
