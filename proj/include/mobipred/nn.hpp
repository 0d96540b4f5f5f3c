#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobipred/types.hpp"

namespace mobipred {

enum class Arch { Lstm, Cnn };

std::string to_string(Arch a);
Arch arch_from_string(std::string_view s);

struct NeuralConfig {
  Arch arch = Arch::Lstm;
  int seq_len = 5;   // context window length fed to the model
  int embed = 32;    // embedding width
  int hidden = 64;   // recurrent units per layer / convolution channels
  int layers = 2;    // recurrent stack depth (the conv net always uses two)
  double lr = 1e-3;  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 1;
};

// Next-symbol classifier trained online, one example per step. Parameters
// live in a single flat vector; gradients are computed by hand and checked
// against finite differences in the tests. All math is double precision.
class NeuralModel {
 public:
  virtual ~NeuralModel() = default;

  int alphabet() const { return alphabet_; }
  const NeuralConfig& config() const { return cfg_; }
  Eigen::Index param_count() const { return theta_.size(); }
  Eigen::VectorXd& params() { return theta_; }
  const Eigen::VectorXd& params() const { return theta_; }

  // Raw class scores for a window of up to seq_len symbols; shorter windows
  // are left-padded with Unknown.
  virtual Eigen::VectorXd logits(std::span<const Symbol> window) const = 0;

  // Cross-entropy of target under softmax(logits); fills grad (resized to
  // param_count) with dLoss/dtheta.
  virtual double loss_and_gradient(std::span<const Symbol> window, Symbol target,
                                   Eigen::VectorXd& grad) const = 0;

  Eigen::VectorXd probabilities(std::span<const Symbol> window) const;
  Symbol predict(std::span<const Symbol> window) const;  // argmax, tie -> smaller id
  double loss(std::span<const Symbol> window, Symbol target) const;

  // One Adam update on a single example. Returns the pre-step loss. Throws
  // NumericalDivergence if the loss or any parameter stops being finite.
  double train_step(std::span<const Symbol> window, Symbol target);

 protected:
  NeuralModel(const NeuralConfig& cfg, int alphabet);
  // Validates symbols, rejects windows longer than seq_len, and left-pads
  // shorter ones with Unknown into buf. Returns the full-length view.
  std::span<const Symbol> pad_window(std::span<const Symbol> window,
                                     std::vector<Symbol>& buf) const;
  void allocate(Eigen::Index n_params);  // zero theta/moments

  NeuralConfig cfg_;
  int alphabet_;
  Eigen::VectorXd theta_;

 private:
  Eigen::VectorXd adam_m_, adam_v_;
  std::int64_t adam_t_ = 0;
  Eigen::VectorXd grad_buf_;
};

std::unique_ptr<NeuralModel> make_neural_model(const NeuralConfig& cfg, int alphabet);

struct GradCheckResult {
  bool pass = true;
  int checked = 0;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;  // |ga-gn| / max(|ga|, |gn|, tiny)
};

// Central finite differences (step h) against loss_and_gradient on n_coords
// randomly chosen coordinates (n_coords <= 0 checks all). A coordinate passes
// when |ga-gn| < 1e-4 * max(|ga|,|gn|) or |ga-gn| < 1e-8.
GradCheckResult gradient_check(NeuralModel& model, std::span<const Symbol> window,
                               Symbol target, int n_coords, std::uint64_t seed,
                               double h = 1e-4);

}  // namespace mobipred
