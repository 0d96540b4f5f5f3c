#include "mobipred/pipeline.hpp"

#include <optional>

#include "mobipred/errors.hpp"
#include "mobipred/parallel.hpp"

namespace mobipred {

Population filter_trace(const Trace& trace, const OuiMap& oui,
                        std::int64_t tz_offset_s) {
  SummaryAccumulator acc(tz_offset_s);
  for (const auto& [device, records] : trace.by_device)
    for (const auto& r : records) acc.add(device, r);
  Population pop;
  pop.devices = filter_population(acc.finalize(oui));
  for (const auto& d : pop.devices) pop.classes[d] = oui.classify(d);
  return pop;
}

std::vector<DiscreteSeries> discretize_population(const Trace& trace,
                                                  const Population& pop,
                                                  const DiscretizerConfig& cfg,
                                                  int jobs) {
  std::vector<DiscreteSeries> out(pop.devices.size());
  parallel_for(pop.devices.size(), jobs, [&](std::size_t i) {
    const std::string& device = pop.devices[i];
    const auto& records = trace.by_device.at(device);
    out[i] = discretize(records, device, pop.classes.at(device), cfg);
  });
  return out;
}

EntropyRun entropy_population(const std::vector<DiscreteSeries>& series,
                              bool keep_unknown, std::int64_t bwt_segments, int jobs) {
  std::vector<std::optional<EntropyReport>> reports(series.size());
  parallel_for(series.size(), jobs, [&](std::size_t i) {
    try {
      reports[i] = entropy_report(series[i], keep_unknown, bwt_segments);
    } catch (const DataError&) {
      reports[i] = std::nullopt;
    }
  });
  EntropyRun run;
  for (auto& r : reports) {
    if (r)
      run.reports.push_back(std::move(*r));
    else
      run.skipped += 1;
  }
  return run;
}

}  // namespace mobipred
