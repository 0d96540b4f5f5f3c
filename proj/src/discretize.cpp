#include "mobipred/discretize.hpp"

#include <algorithm>
#include <map>

namespace mobipred {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_to(std::int64_t t, std::int64_t w) { return floor_div(t, w) * w; }

struct Weight {
  std::int64_t duration = 0;
  std::int64_t first_start = 0;
};

Symbol pick_dominant(const std::map<Symbol, Weight>& weights) {
  Symbol best = kUnknown;
  Weight bw{0, 0};
  for (const auto& [sym, w] : weights) {
    if (w.duration <= 0) continue;
    bool better;
    if (best == kUnknown)
      better = true;
    else if (w.duration != bw.duration)
      better = w.duration > bw.duration;
    else if (w.first_start != bw.first_start)
      better = w.first_start < bw.first_start;
    else
      better = sym < best;
    if (better) {
      best = sym;
      bw = w;
    }
  }
  return best;
}

}  // namespace

std::vector<OccupancyInterval> normalize_intervals(
    std::span<const AssociationRecord> records, const DiscretizerConfig& config,
    LocationAlphabet& alphabet) {
  std::vector<OccupancyInterval> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string loc_name = config.spatial == SpatialResolution::Building
                               ? building_of(r.ap_name)
                               : r.ap_name;
    Symbol loc = alphabet.intern(loc_name);
    std::int64_t begin = r.lease_begin;
    std::int64_t end = begin + config.t_max_s;
    if (i + 1 < records.size()) end = std::min(end, records[i + 1].lease_begin);
    if (end > begin) out.push_back({loc, begin, end});
  }
  return out;
}

Symbol step_value(std::int64_t t0, std::int64_t window_s,
                  std::span<const OccupancyInterval> intervals) {
  std::int64_t t1 = t0 + window_s;
  std::map<Symbol, Weight> weights;
  for (const auto& iv : intervals) {
    std::int64_t lo = std::max(iv.begin, t0);
    std::int64_t hi = std::min(iv.end, t1);
    if (hi <= lo) continue;
    auto [it, fresh] = weights.try_emplace(iv.location, Weight{0, lo});
    it->second.duration += hi - lo;
    if (!fresh) it->second.first_start = std::min(it->second.first_start, lo);
  }
  return pick_dominant(weights);
}

DiscreteSeries discretize(std::span<const AssociationRecord> records,
                          const std::string& device, DeviceClass cls,
                          const DiscretizerConfig& config) {
  if (records.empty()) throw EmptyTrace("no records for device " + device);
  if (config.window_s <= 0 || config.t_max_s <= 0)
    throw ConfigInvalid("window and t_max must be positive");

  std::vector<AssociationRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const AssociationRecord& a, const AssociationRecord& b) {
              if (a.lease_begin != b.lease_begin) return a.lease_begin < b.lease_begin;
              return a.ap_name < b.ap_name;
            });

  DiscreteSeries series;
  series.device = device;
  series.cls = cls;
  series.spatial = config.spatial;
  series.window_s = config.window_s;

  auto intervals = normalize_intervals(sorted, config, series.alphabet);
  if (intervals.empty()) throw EmptyTrace("records collapse to empty occupancy");

  std::int64_t first = intervals.front().begin;
  if (config.calendar_anchor) {
    std::int64_t midnight = floor_to(first + config.tz_offset_s, 86400) - config.tz_offset_s;
    series.start_time = midnight + floor_div(first - midnight, config.window_s) * config.window_s;
  } else {
    series.start_time = floor_to(first, config.window_s);
  }

  std::int64_t series_end = 0;
  for (const auto& iv : intervals) series_end = std::max(series_end, iv.end);
  std::int64_t span = series_end - series.start_time;
  std::int64_t n_windows = floor_div(span + config.window_s - 1, config.window_s);
  series.symbols.assign(static_cast<std::size_t>(n_windows), kUnknown);

  // One sweep: intervals are non-overlapping and begin-sorted, so a window's
  // overlapping intervals are contiguous.
  std::size_t lo = 0;
  std::map<Symbol, Weight> weights;
  for (std::int64_t wi = 0; wi < n_windows; ++wi) {
    std::int64_t t0 = series.start_time + wi * config.window_s;
    std::int64_t t1 = t0 + config.window_s;
    while (lo < intervals.size() && intervals[lo].end <= t0) ++lo;
    weights.clear();
    for (std::size_t j = lo; j < intervals.size() && intervals[j].begin < t1; ++j) {
      std::int64_t a = std::max(intervals[j].begin, t0);
      std::int64_t b = std::min(intervals[j].end, t1);
      if (b <= a) continue;
      auto [it, fresh] = weights.try_emplace(intervals[j].location, Weight{0, a});
      it->second.duration += b - a;
      if (!fresh) it->second.first_start = std::min(it->second.first_start, a);
    }
    series.symbols[static_cast<std::size_t>(wi)] = pick_dominant(weights);
  }
  return series;
}

}  // namespace mobipred
