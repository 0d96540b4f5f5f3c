#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mobipred/ingest.hpp"
#include "mobipred/types.hpp"

namespace mobipred {

// Half-open occupancy of one location, epoch seconds.
struct OccupancyInterval {
  Symbol location = kUnknown;
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

struct DiscretizerConfig {
  std::int64_t window_s = 900;
  std::int64_t t_max_s = 3600;  // location persistence cap after an association
  SpatialResolution spatial = SpatialResolution::AccessPoint;
  // Window grid anchor. Default: first association floored to a multiple of
  // window_s. With calendar_anchor the grid starts at local midnight.
  bool calendar_anchor = false;
  std::int64_t tz_offset_s = 0;
};

// Association at location l at time t occupies [t, min(next association,
// t + t_max)). A later association truncates the earlier occupancy. Records
// must be sorted by lease_begin; empty intervals are dropped.
std::vector<OccupancyInterval> normalize_intervals(
    std::span<const AssociationRecord> records, const DiscretizerConfig& config,
    LocationAlphabet& alphabet);

// Duration-weighted dominant location inside [t0, t0 + w). Ties break to the
// earliest occupancy start within the window, then to the smaller symbol id.
// Returns Unknown when nothing overlaps.
Symbol step_value(std::int64_t t0, std::int64_t window_s,
                  std::span<const OccupancyInterval> intervals);

// Full per-device pipeline: sort, intern locations (rolled up to buildings
// when the config says so), normalize, then sample every window.
DiscreteSeries discretize(std::span<const AssociationRecord> records,
                          const std::string& device, DeviceClass cls,
                          const DiscretizerConfig& config);

}  // namespace mobipred
