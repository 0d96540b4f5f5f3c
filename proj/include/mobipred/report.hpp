#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mobipred/entropy.hpp"
#include "mobipred/eval.hpp"
#include "mobipred/features.hpp"

namespace mobipred {

inline constexpr const char* kToolVersion = "1.0.0";

// Which accuracy population feeds the per-class ECDF files.
struct EcdfSelection {
  Method method = Method::MC;
  int k = 5;
  std::int64_t window_s = 900;
};

struct ReportInputs {
  const MatrixResult* matrix = nullptr;
  const std::vector<EntropyReport>* entropy = nullptr;
  const CorrelationReport* correlations = nullptr;
  EcdfSelection ecdf;
  // Extra lines for run_meta (config dump, seed, counts); keys are sorted.
  std::map<std::string, std::string> meta;
};

// Table-shaped medians: one line per (spatial, window, method, k) with both
// classes side by side and diff = cello - flute. Percentages, 2 decimals.
void write_matrix_csv(std::ostream& os, const std::vector<MatrixRow>& rows);

// Per-combination wall times plus per-method totals.
void write_runtimes_csv(std::ostream& os, const std::vector<MatrixRow>& rows);

// Writes matrix.csv, runtimes.csv, per-device accuracy files, per-class ECDF
// files, entropy.csv, correlations.csv and run_meta under dir. Refuses a
// nonempty existing directory unless force; omitted sections are noted in
// run_meta.
void write_report(const std::filesystem::path& dir, const ReportInputs& inputs,
                  bool force);

}  // namespace mobipred
