#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mobipred/ingest.hpp"
#include "mobipred/rng.hpp"
#include "mobipred/types.hpp"

namespace mobipred {

struct SynthBuilding {
  std::string name;  // must carry the b<digits> prefix so roll-up works
  int n_aps = 1;
  double x_m = 0.0;
  double y_m = 0.0;
};

struct SynthClassParams {
  DeviceClass cls = DeviceClass::Flute;
  int n_devices = 0;
  double stay_prob = 0.5;      // per dwell-end building-chain self-transition
  double dwell_median_s = 1800;
  double dwell_sigma = 0.5;    // log-normal shape
  double ap_switch_prob = 0.0; // AP re-draw chance at each lease renewal
  std::string oui_prefix;      // xx:xx:xx
  // Row-stochastic movement matrix over campus buildings. Empty means the
  // uniform-off-diagonal chain built from stay_prob.
  std::vector<std::vector<double>> matrix;
};

struct SynthConfig {
  std::vector<SynthBuilding> campus;
  std::vector<SynthClassParams> classes;
  std::int64_t start_epoch = 1333324800;  // a Monday, 00:00 UTC
  int days = 14;
  std::int64_t day_start_s = 8 * 3600;   // active window within each day
  std::int64_t day_end_s = 20 * 3600;
  std::int64_t renew_s = 600;            // lease renewal cadence
  std::int64_t session_cap_s = 4 * 3600; // lease length cap
  std::uint64_t seed = 1;
};

// Two-class campus: 8 buildings x 6 APs; Cello stays (0.95, long dwells),
// Flute moves (0.6, short dwells).
SynthConfig default_synth_config();

class Config;  // mobipred/config.hpp

// Defaults overridden by synth.* keys (buildings, aps_per_building, days,
// start_epoch, day_start_s, day_end_s, renew_s, session_cap_s, and per class
// <class>.devices/.stay/.dwell_median_s/.dwell_sigma/.ap_switch/.oui).
SynthConfig synth_config_from(const Config& config, std::uint64_t seed);

// Throws ConfigInvalid on malformed campus, class params, or a movement
// matrix whose rows do not sum to 1 within 1e-9.
void validate(const SynthConfig& cfg);

// Uniform-off-diagonal chain: stay on the diagonal, (1-stay)/(n-1) elsewhere.
std::vector<std::vector<double>> uniform_chain(int n, double stay);

// Entropy rate in bits/step: sum_i pi_i * H(row_i) with pi the stationary
// distribution (power iteration).
double chain_entropy_rate(const std::vector<std::vector<double>>& matrix);

// Samples the next state from one matrix row by CDF walk.
int chain_step(SplitMix64& rng, const std::vector<double>& row);

// Association records for one device, deterministic in (cfg.seed, the
// device's global index). class_idx/device_idx index into cfg.classes.
std::vector<AssociationRecord> device_records(const SynthConfig& cfg, int class_idx,
                                              int device_idx);

std::string device_mac(const SynthConfig& cfg, int class_idx, int device_idx);

struct SynthOutputs {
  std::filesystem::path trace;
  std::filesystem::path oui_map;
  std::filesystem::path building_coords;
  std::filesystem::path ground_truth;
  std::int64_t n_records = 0;
};

// Writes trace.txt, oui_map.csv, building_coords.csv and ground_truth.csv
// under out_dir (created if missing). Byte-deterministic for a given config.
SynthOutputs generate(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                      int jobs = 1);

}  // namespace mobipred
