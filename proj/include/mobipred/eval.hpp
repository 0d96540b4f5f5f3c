#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobipred/markov.hpp"
#include "mobipred/nn.hpp"
#include "mobipred/types.hpp"

namespace mobipred {

enum class Method { MC, LSTM, CNN, LZ, BWT };

std::string to_string(Method m);
std::optional<Method> method_from_string(std::string_view s);
bool is_neural(Method m);
bool is_bound(Method m);  // LZ/BWT rows report predictability bounds

// Online next-symbol predictor: asked for a guess from the trailing window,
// then shown the truth. predict returns nullopt while cold.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::optional<Symbol> predict(std::span<const Symbol> window) = 0;
  virtual void update(std::span<const Symbol> window, Symbol target) = 0;
};

class MarkovPredictor final : public Predictor {
 public:
  explicit MarkovPredictor(int k) : model_(k) {}
  std::optional<Symbol> predict(std::span<const Symbol> window) override;
  void update(std::span<const Symbol> window, Symbol target) override;
  const MarkovModel& model() const { return model_; }

 private:
  MarkovModel model_;
};

class NeuralPredictor final : public Predictor {
 public:
  NeuralPredictor(const NeuralConfig& cfg, int alphabet)
      : model_(make_neural_model(cfg, alphabet)) {}
  std::optional<Symbol> predict(std::span<const Symbol> window) override;
  void update(std::span<const Symbol> window, Symbol target) override;
  const NeuralModel& model() const { return *model_; }

 private:
  std::unique_ptr<NeuralModel> model_;
};

struct EvalOptions {
  bool skip_unknown_targets = true;  // skip scoring when the truth is Unknown
  bool transitions_only = false;     // score only steps that change location
};

struct DeviceEval {
  std::int64_t attempted = 0;
  std::int64_t correct = 0;
  double accuracy = 0.0;  // fraction
};

// Predict-then-update over the series: for t in [k, len), predict symbols[t]
// from the preceding k symbols, score it, then reveal the truth. The model
// is updated at every step, scored or not. Cold predictions are wrong.
// Throws SeriesTooShort when len <= k and EmptyAfterFilter when no step is
// scorable.
DeviceEval evaluate_device(const DiscreteSeries& series, Predictor& predictor, int k,
                           const EvalOptions& options = {});

struct MatrixRow {
  DeviceClass cls = DeviceClass::Other;
  SpatialResolution spatial = SpatialResolution::AccessPoint;
  std::int64_t window_s = 0;
  Method method = Method::MC;
  int k = 0;  // 0 on bound rows: LZ/BWT do not take a window
  int n_devices = 0;
  int n_skipped = 0;
  double median_acc = 0.0;  // percent; bound rows carry median Pi_max * 100
  double mean_acc = 0.0;    // percent
  double wall_time_s = 0.0;
};

struct EvalConfig {
  std::vector<Method> methods{Method::MC, Method::LSTM, Method::CNN, Method::LZ,
                              Method::BWT};
  std::vector<int> seq_lens{5, 10, 20, 40};
  int nn_device_sample = 50;  // per class; <= 0 means every device
  EvalOptions options;
  NeuralConfig nn;  // arch/seq_len/seed overridden per cell
  std::int64_t bwt_segments = 0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

// Discretized population for one (spatial, window) pair.
struct MatrixInput {
  SpatialResolution spatial = SpatialResolution::AccessPoint;
  std::int64_t window_s = 0;
  std::vector<DiscreteSeries> series;
};

struct ComboKey {
  Method method = Method::MC;
  int k = 0;
  SpatialResolution spatial = SpatialResolution::AccessPoint;
  std::int64_t window_s = 0;
};

struct DeviceAccuracy {
  std::string device;
  DeviceClass cls = DeviceClass::Other;
  double accuracy = 0.0;  // fraction; bound combos carry Pi_max
};

struct MatrixResult {
  std::vector<MatrixRow> rows;  // canonical order: spatial, window, method, k, class
  std::vector<std::pair<ComboKey, std::vector<DeviceAccuracy>>> per_device;
};

// Runs the full method/seq-len grid over every input population. Per-device
// failures are counted as skips, never fatal. Deterministic for a given
// config regardless of jobs.
MatrixResult run_matrix(const std::vector<MatrixInput>& inputs, const EvalConfig& cfg);

// Sorted (value, fraction <= value) steps. Throws EmptyInput.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

// Midpoint-convention median. Throws EmptyInput.
double median(std::vector<double> values);

}  // namespace mobipred
