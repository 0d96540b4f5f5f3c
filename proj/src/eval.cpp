#include "mobipred/eval.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <tuple>

#include "mobipred/entropy.hpp"
#include "mobipred/errors.hpp"
#include "mobipred/parallel.hpp"
#include "mobipred/rng.hpp"

namespace mobipred {

std::string to_string(Method m) {
  switch (m) {
    case Method::MC: return "mc";
    case Method::LSTM: return "lstm";
    case Method::CNN: return "cnn";
    case Method::LZ: return "lz";
    case Method::BWT: return "bwt";
  }
  return "?";
}

std::optional<Method> method_from_string(std::string_view s) {
  if (s == "mc") return Method::MC;
  if (s == "lstm") return Method::LSTM;
  if (s == "cnn") return Method::CNN;
  if (s == "lz") return Method::LZ;
  if (s == "bwt") return Method::BWT;
  return std::nullopt;
}

bool is_neural(Method m) { return m == Method::LSTM || m == Method::CNN; }
bool is_bound(Method m) { return m == Method::LZ || m == Method::BWT; }

std::optional<Symbol> MarkovPredictor::predict(std::span<const Symbol> window) {
  return model_.predict(window);
}

void MarkovPredictor::update(std::span<const Symbol> window, Symbol target) {
  model_.update(window, target);
}

std::optional<Symbol> NeuralPredictor::predict(std::span<const Symbol> window) {
  return model_->predict(window);
}

void NeuralPredictor::update(std::span<const Symbol> window, Symbol target) {
  model_->train_step(window, target);
}

DeviceEval evaluate_device(const DiscreteSeries& series, Predictor& predictor, int k,
                           const EvalOptions& options) {
  if (k < 0) throw ConfigInvalid("window length must be nonnegative");
  const auto& sym = series.symbols;
  const std::size_t n = sym.size();
  if (n <= static_cast<std::size_t>(k))
    throw SeriesTooShort("series of length " + std::to_string(n) +
                         " cannot be evaluated with window " + std::to_string(k));
  DeviceEval ev;
  for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
    std::span<const Symbol> window(sym.data() + t - static_cast<std::size_t>(k),
                                   static_cast<std::size_t>(k));
    const Symbol target = sym[t];
    bool scored = true;
    if (options.skip_unknown_targets && target == kUnknown) scored = false;
    if (options.transitions_only && t > 0 && target == sym[t - 1]) scored = false;
    if (scored) {
      ev.attempted += 1;
      auto guess = predictor.predict(window);
      if (guess && *guess == target) ev.correct += 1;
    }
    predictor.update(window, target);
  }
  if (ev.attempted == 0)
    throw EmptyAfterFilter("no scorable step in series: " + series.device);
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.attempted);
  return ev;
}

namespace {

constexpr std::array<Method, 5> kCanonicalMethods = {Method::MC, Method::LSTM,
                                                     Method::CNN, Method::LZ,
                                                     Method::BWT};

int class_rank(DeviceClass c) {
  switch (c) {
    case DeviceClass::Flute: return 0;
    case DeviceClass::Cello: return 1;
    case DeviceClass::Other: return 2;
  }
  return 3;
}

bool combo_less(const ComboKey& a, const ComboKey& b) {
  auto key = [](const ComboKey& c) {
    return std::tuple(static_cast<int>(c.spatial), c.window_s,
                      static_cast<int>(c.method), c.k);
  };
  return key(a) < key(b);
}

// Deterministic per-class sample: shuffle each class's device indices with a
// seed-derived stream, keep the first `want`, restore input order.
std::vector<std::size_t> sample_devices(const std::vector<DiscreteSeries>& series,
                                        int want, std::uint64_t seed) {
  if (want <= 0) {
    std::vector<std::size_t> all(series.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  std::map<DeviceClass, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < series.size(); ++i) by_class[series[i].cls].push_back(i);
  std::vector<std::size_t> keep;
  for (auto& [cls, idx] : by_class) {
    SplitMix64 rng(mix_seed(seed, 0x5a0000u + static_cast<std::uint64_t>(class_rank(cls))));
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.next_below(i))]);
    const std::size_t take = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(want));
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace

MatrixResult run_matrix(const std::vector<MatrixInput>& inputs, const EvalConfig& cfg) {
  MatrixResult out;
  for (const auto& input : inputs) {
    for (Method method : kCanonicalMethods) {
      if (std::find(cfg.methods.begin(), cfg.methods.end(), method) == cfg.methods.end())
        continue;
      std::vector<int> ks;
      if (is_bound(method)) {
        ks = {0};  // bounds take no window
      } else {
        for (int k : cfg.seq_lens) ks.push_back(k);
      }
      for (int k : ks) {
        const std::vector<std::size_t> selected =
            is_neural(method) ? sample_devices(input.series, cfg.nn_device_sample, cfg.seed)
                              : sample_devices(input.series, 0, cfg.seed);
        const double t0 = wall_seconds();
        std::vector<std::optional<double>> acc(selected.size());
        parallel_for(selected.size(), cfg.jobs, [&](std::size_t i) {
          const DiscreteSeries& s = input.series[selected[i]];
          try {
            if (is_bound(method)) {
              EntropyReport rep = entropy_report(s, false, cfg.bwt_segments);
              acc[i] = method == Method::LZ ? rep.pi_lz : rep.pi_bwt;
            } else if (is_neural(method)) {
              NeuralConfig nc = cfg.nn;
              nc.arch = method == Method::LSTM ? Arch::Lstm : Arch::Cnn;
              nc.seq_len = k;
              nc.seed = mix_seed(mix_seed(cfg.seed, cfg.nn.seed), hash_string(s.device));
              NeuralPredictor pred(nc, static_cast<int>(s.alphabet.size()));
              acc[i] = evaluate_device(s, pred, k, cfg.options).accuracy;
            } else {
              MarkovPredictor pred(k);
              acc[i] = evaluate_device(s, pred, k, cfg.options).accuracy;
            }
          } catch (const DataError&) {
            acc[i] = std::nullopt;  // counts as a skipped device
          }
        });
        const double wall = wall_seconds() - t0;

        ComboKey key{method, k, input.spatial, input.window_s};
        std::vector<DeviceAccuracy> per_dev;
        std::map<DeviceClass, std::vector<double>> by_class;
        std::map<DeviceClass, int> skipped;
        for (std::size_t i = 0; i < selected.size(); ++i) {
          const DiscreteSeries& s = input.series[selected[i]];
          if (acc[i]) {
            per_dev.push_back({s.device, s.cls, *acc[i]});
            by_class[s.cls].push_back(*acc[i]);
          } else {
            skipped[s.cls] += 1;
          }
        }
        for (auto& [cls, values] : by_class) {
          MatrixRow row;
          row.cls = cls;
          row.spatial = input.spatial;
          row.window_s = input.window_s;
          row.method = method;
          row.k = k;
          row.n_devices = static_cast<int>(values.size());
          row.n_skipped = skipped.count(cls) ? skipped[cls] : 0;
          double sum = 0.0;
          for (double v : values) sum += v;
          row.mean_acc = 100.0 * sum / static_cast<double>(values.size());
          row.median_acc = 100.0 * median(values);
          row.wall_time_s = wall;
          out.rows.push_back(row);
        }
        out.per_device.emplace_back(key, std::move(per_dev));
      }
    }
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const MatrixRow& a, const MatrixRow& b) {
    auto key = [](const MatrixRow& r) {
      return std::tuple(static_cast<int>(r.spatial), r.window_s,
                        static_cast<int>(r.method), r.k, class_rank(r.cls));
    };
    return key(a) < key(b);
  });
  std::sort(out.per_device.begin(), out.per_device.end(),
            [](const auto& a, const auto& b) { return combo_less(a.first, b.first); });
  return out;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("ecdf needs at least one value");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> steps;
  steps.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double fraction = static_cast<double>(i + 1) / n;
    if (!steps.empty() && steps.back().first == values[i])
      steps.back().second = fraction;  // one riser per distinct value
    else
      steps.emplace_back(values[i], fraction);
  }
  return steps;
}

double median(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace mobipred
