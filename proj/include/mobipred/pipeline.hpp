#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mobipred/discretize.hpp"
#include "mobipred/entropy.hpp"
#include "mobipred/ingest.hpp"
#include "mobipred/types.hpp"

namespace mobipred {

struct Population {
  std::vector<std::string> devices;  // sorted, kept by the study filter
  std::map<std::string, DeviceClass> classes;
};

// Applies the study filter (>= 7 days, > 5 APs, Flute/Cello) to a loaded
// trace.
Population filter_trace(const Trace& trace, const OuiMap& oui,
                        std::int64_t tz_offset_s = 0);

// Discretizes every kept device under one configuration, in device order.
std::vector<DiscreteSeries> discretize_population(const Trace& trace,
                                                  const Population& pop,
                                                  const DiscretizerConfig& cfg,
                                                  int jobs = 1);

// Entropy reports for every series; devices whose series cannot be estimated
// (too short, all Unknown) are skipped and counted.
struct EntropyRun {
  std::vector<EntropyReport> reports;
  int skipped = 0;
};
EntropyRun entropy_population(const std::vector<DiscreteSeries>& series,
                              bool keep_unknown, std::int64_t bwt_segments, int jobs);

}  // namespace mobipred
