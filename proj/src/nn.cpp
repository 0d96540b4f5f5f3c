#include "mobipred/nn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mobipred/errors.hpp"
#include "mobipred/rng.hpp"

namespace mobipred {

std::string to_string(Arch a) { return a == Arch::Lstm ? "lstm" : "cnn"; }

Arch arch_from_string(std::string_view s) {
  if (s == "lstm") return Arch::Lstm;
  if (s == "cnn") return Arch::Cnn;
  throw ConfigInvalid("unknown architecture: " + std::string(s));
}

namespace {

double logsumexp(const Eigen::VectorXd& v) {
  double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

using CMap = Eigen::Map<const Eigen::MatrixXd>;
using MMap = Eigen::Map<Eigen::MatrixXd>;

CMap cmat(const Eigen::VectorXd& v, Eigen::Index off, Eigen::Index r, Eigen::Index c) {
  return CMap(v.data() + off, r, c);
}

MMap mmat(Eigen::VectorXd& v, Eigen::Index off, Eigen::Index r, Eigen::Index c) {
  return MMap(v.data() + off, r, c);
}

void fill_uniform(SplitMix64& rng, Eigen::VectorXd& v, Eigen::Index off, Eigen::Index len,
                  double scale) {
  for (Eigen::Index i = 0; i < len; ++i) v[off + i] = rng.uniform(-scale, scale);
}

}  // namespace

NeuralModel::NeuralModel(const NeuralConfig& cfg, int alphabet)
    : cfg_(cfg), alphabet_(alphabet) {
  if (alphabet < 1) throw ConfigInvalid("alphabet size must be positive");
  if (cfg.seq_len < 1) throw ConfigInvalid("seq_len must be positive");
  if (cfg.embed < 1 || cfg.hidden < 1 || cfg.layers < 1)
    throw ConfigInvalid("embed, hidden and layers must be positive");
}

void NeuralModel::allocate(Eigen::Index n_params) {
  theta_ = Eigen::VectorXd::Zero(n_params);
  adam_m_ = Eigen::VectorXd::Zero(n_params);
  adam_v_ = Eigen::VectorXd::Zero(n_params);
}

std::span<const Symbol> NeuralModel::pad_window(std::span<const Symbol> window,
                                                std::vector<Symbol>& buf) const {
  const auto want = static_cast<std::size_t>(cfg_.seq_len);
  if (window.size() > want)
    throw ConfigInvalid("window length " + std::to_string(window.size()) +
                        " exceeds seq_len " + std::to_string(cfg_.seq_len));
  for (Symbol s : window)
    if (s < 0 || s >= alphabet_)
      throw DataError("symbol " + std::to_string(s) + " outside alphabet");
  if (window.size() == want) return window;
  buf.assign(want, kUnknown);
  std::copy(window.begin(), window.end(), buf.end() - static_cast<std::ptrdiff_t>(window.size()));
  return std::span<const Symbol>(buf);
}

Eigen::VectorXd NeuralModel::probabilities(std::span<const Symbol> window) const {
  return softmax(logits(window));
}

Symbol NeuralModel::predict(std::span<const Symbol> window) const {
  Eigen::VectorXd l = logits(window);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < l.size(); ++i)
    if (l[i] > l[best]) best = i;
  return static_cast<Symbol>(best);
}

double NeuralModel::loss(std::span<const Symbol> window, Symbol target) const {
  if (target < 0 || target >= alphabet_) throw DataError("target outside alphabet");
  Eigen::VectorXd l = logits(window);
  return logsumexp(l) - l[target];
}

double NeuralModel::train_step(std::span<const Symbol> window, Symbol target) {
  double l = loss_and_gradient(window, target, grad_buf_);
  if (!std::isfinite(l)) throw NumericalDivergence("loss is not finite");
  adam_t_ += 1;
  adam_m_ = cfg_.beta1 * adam_m_ + (1.0 - cfg_.beta1) * grad_buf_;
  adam_v_.array() =
      cfg_.beta2 * adam_v_.array() + (1.0 - cfg_.beta2) * grad_buf_.array().square();
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(adam_t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(adam_t_));
  theta_.array() -= cfg_.lr * (adam_m_.array() / bc1) /
                    ((adam_v_.array() / bc2).sqrt() + cfg_.eps);
  if (!theta_.allFinite()) throw NumericalDivergence("parameters diverged");
  return l;
}

// ---------------------------------------------------------------------------
// Recurrent model: embedding -> stacked LSTM -> linear readout of the last
// hidden state. Gate rows are packed [input; forget; cell; output].
// ---------------------------------------------------------------------------

namespace {

class LstmModel final : public NeuralModel {
 public:
  LstmModel(const NeuralConfig& cfg, int alphabet) : NeuralModel(cfg, alphabet) {
    const Eigen::Index A = alphabet_, E = cfg_.embed, H = cfg_.hidden, L = cfg_.layers;
    Eigen::Index off = 0;
    off_embed_ = off;
    off += E * A;
    for (Eigen::Index l = 0; l < L; ++l) {
      Eigen::Index in = l == 0 ? E : H;
      off_w_.push_back(off);
      off += 4 * H * (in + H);
      off_b_.push_back(off);
      off += 4 * H;
    }
    off_wout_ = off;
    off += A * H;
    off_bout_ = off;
    off += A;
    allocate(off);

    SplitMix64 rng(cfg_.seed);
    fill_uniform(rng, theta_, off_embed_, E * A, 1.0 / std::sqrt(static_cast<double>(A)));
    for (Eigen::Index l = 0; l < L; ++l) {
      Eigen::Index in = l == 0 ? E : H;
      fill_uniform(rng, theta_, off_w_[static_cast<std::size_t>(l)], 4 * H * (in + H),
                   1.0 / std::sqrt(static_cast<double>(in + H)));
      // biases start at zero except the forget gate, which starts open
      theta_.segment(off_b_[static_cast<std::size_t>(l)] + H, H).setConstant(1.0);
    }
    fill_uniform(rng, theta_, off_wout_, A * H, 1.0 / std::sqrt(static_cast<double>(H)));
  }

  Eigen::VectorXd logits(std::span<const Symbol> window) const override {
    Cache cache;
    return forward(window, cache);
  }

  double loss_and_gradient(std::span<const Symbol> raw, Symbol target,
                           Eigen::VectorXd& grad) const override {
    if (target < 0 || target >= alphabet_) throw DataError("target outside alphabet");
    std::vector<Symbol> pad_buf;
    std::span<const Symbol> window = pad_window(raw, pad_buf);
    Cache cache;
    Eigen::VectorXd l = forward(window, cache);
    double loss = logsumexp(l) - l[target];

    const Eigen::Index A = alphabet_, E = cfg_.embed, H = cfg_.hidden, L = cfg_.layers,
                       T = cfg_.seq_len;
    grad.setZero(theta_.size());

    Eigen::VectorXd dlogits = softmax(l);
    dlogits[target] -= 1.0;

    mmat(grad, off_wout_, A, H).noalias() +=
        dlogits * cache.h[static_cast<std::size_t>(L - 1)].back().transpose();
    grad.segment(off_bout_, A) += dlogits;

    // Per-step gradients flowing into the current layer's outputs; starts as
    // the readout gradient on the top layer's last step.
    std::vector<Eigen::VectorXd> dh_ext(static_cast<std::size_t>(T),
                                        Eigen::VectorXd::Zero(H));
    dh_ext.back().noalias() = cmat(theta_, off_wout_, A, H).transpose() * dlogits;

    for (Eigen::Index l2 = L - 1; l2 >= 0; --l2) {
      const auto li = static_cast<std::size_t>(l2);
      const Eigen::Index in = l2 == 0 ? E : H;
      CMap W = cmat(theta_, off_w_[li], 4 * H, in + H);
      MMap gW = mmat(grad, off_w_[li], 4 * H, in + H);
      std::vector<Eigen::VectorXd> dx(static_cast<std::size_t>(T));
      Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(H);
      Eigen::VectorXd dc_carry = Eigen::VectorXd::Zero(H);
      for (Eigen::Index t = T - 1; t >= 0; --t) {
        const auto ti = static_cast<std::size_t>(t);
        const Eigen::VectorXd& ig = cache.i[li][ti];
        const Eigen::VectorXd& fg = cache.f[li][ti];
        const Eigen::VectorXd& gg = cache.g[li][ti];
        const Eigen::VectorXd& og = cache.o[li][ti];
        const Eigen::VectorXd& tc = cache.tc[li][ti];
        Eigen::VectorXd dh = dh_ext[ti] + dh_carry;
        Eigen::ArrayXd do_ = dh.array() * tc.array();
        Eigen::ArrayXd dc =
            dc_carry.array() + dh.array() * og.array() * (1.0 - tc.array().square());
        Eigen::VectorXd c_prev =
            t > 0 ? cache.c[li][ti - 1] : Eigen::VectorXd::Zero(H);
        Eigen::VectorXd dz(4 * H);
        dz.segment(0, H) =
            (dc * gg.array() * ig.array() * (1.0 - ig.array())).matrix();
        dz.segment(H, H) =
            (dc * c_prev.array() * fg.array() * (1.0 - fg.array())).matrix();
        dz.segment(2 * H, H) = (dc * ig.array() * (1.0 - gg.array().square())).matrix();
        dz.segment(3 * H, H) = (do_ * og.array() * (1.0 - og.array())).matrix();
        gW.noalias() += dz * cache.v[li][ti].transpose();
        grad.segment(off_b_[li], 4 * H) += dz;
        Eigen::VectorXd dv = W.transpose() * dz;
        dx[ti] = dv.head(in);
        dh_carry = dv.tail(H);
        dc_carry = (dc * fg.array()).matrix();
      }
      dh_ext = std::move(dx);
    }

    MMap gE = mmat(grad, off_embed_, E, A);
    for (Eigen::Index t = 0; t < T; ++t)
      gE.col(window[static_cast<std::size_t>(t)]) += dh_ext[static_cast<std::size_t>(t)];
    return loss;
  }

 private:
  struct Cache {
    // [layer][t]; v is the gate input [x_t; h_{t-1}]
    std::vector<std::vector<Eigen::VectorXd>> v, i, f, g, o, c, tc, h;
  };

  Eigen::VectorXd forward(std::span<const Symbol> raw, Cache& cache) const {
    std::vector<Symbol> pad_buf;
    std::span<const Symbol> window = pad_window(raw, pad_buf);
    const Eigen::Index A = alphabet_, E = cfg_.embed, H = cfg_.hidden, L = cfg_.layers,
                       T = cfg_.seq_len;
    CMap Emb = cmat(theta_, off_embed_, E, A);
    std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(T));
    for (Eigen::Index t = 0; t < T; ++t)
      xs[static_cast<std::size_t>(t)] = Emb.col(window[static_cast<std::size_t>(t)]);

    auto resize = [&](std::vector<std::vector<Eigen::VectorXd>>& m) {
      m.assign(static_cast<std::size_t>(L), std::vector<Eigen::VectorXd>(
                                                static_cast<std::size_t>(T)));
    };
    resize(cache.v);
    resize(cache.i);
    resize(cache.f);
    resize(cache.g);
    resize(cache.o);
    resize(cache.c);
    resize(cache.tc);
    resize(cache.h);

    for (Eigen::Index l = 0; l < L; ++l) {
      const auto li = static_cast<std::size_t>(l);
      const Eigen::Index in = l == 0 ? E : H;
      CMap W = cmat(theta_, off_w_[li], 4 * H, in + H);
      Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(H);
      Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(H);
      for (Eigen::Index t = 0; t < T; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        Eigen::VectorXd v(in + H);
        v.head(in) = xs[ti];
        v.tail(H) = h_prev;
        Eigen::VectorXd z = W * v + theta_.segment(off_b_[li], 4 * H);
        Eigen::ArrayXd ig = 1.0 / (1.0 + (-z.segment(0, H).array()).exp());
        Eigen::ArrayXd fg = 1.0 / (1.0 + (-z.segment(H, H).array()).exp());
        Eigen::ArrayXd gg = z.segment(2 * H, H).array().tanh();
        Eigen::ArrayXd og = 1.0 / (1.0 + (-z.segment(3 * H, H).array()).exp());
        Eigen::VectorXd c = (fg * c_prev.array() + ig * gg).matrix();
        Eigen::VectorXd tc = c.array().tanh().matrix();
        Eigen::VectorXd h = (og * tc.array()).matrix();
        cache.v[li][ti] = std::move(v);
        cache.i[li][ti] = ig.matrix();
        cache.f[li][ti] = fg.matrix();
        cache.g[li][ti] = gg.matrix();
        cache.o[li][ti] = og.matrix();
        cache.c[li][ti] = c;
        cache.tc[li][ti] = tc;
        cache.h[li][ti] = h;
        h_prev = h;
        c_prev = std::move(c);
      }
      for (Eigen::Index t = 0; t < T; ++t)
        xs[static_cast<std::size_t>(t)] = cache.h[li][static_cast<std::size_t>(t)];
    }
    return cmat(theta_, off_wout_, A, H) * cache.h.back().back() +
           theta_.segment(off_bout_, A);
  }

  Eigen::Index off_embed_ = 0, off_wout_ = 0, off_bout_ = 0;
  std::vector<Eigen::Index> off_w_, off_b_;
};

// ---------------------------------------------------------------------------
// Convolutional model: embedding -> two width-3 same-padded convolutions with
// ReLU -> global max pool over time (ties to the earliest step) -> linear.
// ---------------------------------------------------------------------------

class CnnModel final : public NeuralModel {
 public:
  CnnModel(const NeuralConfig& cfg, int alphabet) : NeuralModel(cfg, alphabet) {
    const Eigen::Index A = alphabet_, E = cfg_.embed, C = cfg_.hidden;
    Eigen::Index off = 0;
    off_embed_ = off;
    off += E * A;
    off_k1_ = off;
    off += C * 3 * E;
    off_b1_ = off;
    off += C;
    off_k2_ = off;
    off += C * 3 * C;
    off_b2_ = off;
    off += C;
    off_wout_ = off;
    off += A * C;
    off_bout_ = off;
    off += A;
    allocate(off);

    SplitMix64 rng(cfg_.seed);
    fill_uniform(rng, theta_, off_embed_, E * A, 1.0 / std::sqrt(static_cast<double>(A)));
    fill_uniform(rng, theta_, off_k1_, C * 3 * E,
                 1.0 / std::sqrt(static_cast<double>(3 * E)));
    fill_uniform(rng, theta_, off_k2_, C * 3 * C,
                 1.0 / std::sqrt(static_cast<double>(3 * C)));
    fill_uniform(rng, theta_, off_wout_, A * C, 1.0 / std::sqrt(static_cast<double>(C)));
  }

  Eigen::VectorXd logits(std::span<const Symbol> window) const override {
    Cache cache;
    return forward(window, cache);
  }

  double loss_and_gradient(std::span<const Symbol> raw, Symbol target,
                           Eigen::VectorXd& grad) const override {
    if (target < 0 || target >= alphabet_) throw DataError("target outside alphabet");
    std::vector<Symbol> pad_buf;
    std::span<const Symbol> window = pad_window(raw, pad_buf);
    Cache cache;
    Eigen::VectorXd l = forward(window, cache);
    double loss = logsumexp(l) - l[target];

    const Eigen::Index A = alphabet_, E = cfg_.embed, C = cfg_.hidden, T = cfg_.seq_len;
    grad.setZero(theta_.size());

    Eigen::VectorXd dlogits = softmax(l);
    dlogits[target] -= 1.0;
    mmat(grad, off_wout_, A, C).noalias() += dlogits * cache.pooled.transpose();
    grad.segment(off_bout_, A) += dlogits;
    Eigen::VectorXd dp = cmat(theta_, off_wout_, A, C).transpose() * dlogits;

    Eigen::MatrixXd dY2 = Eigen::MatrixXd::Zero(C, T);
    for (Eigen::Index ch = 0; ch < C; ++ch) dY2(ch, cache.argmax[static_cast<std::size_t>(ch)]) = dp[ch];
    // ReLU passes gradient only where the pre-activation was strictly positive
    Eigen::MatrixXd dZ2 = (cache.z2.array() > 0.0).select(dY2, 0.0);

    mmat(grad, off_k2_, C, 3 * C).noalias() += dZ2 * cache.v2.transpose();
    grad.segment(off_b2_, C) += dZ2.rowwise().sum();
    Eigen::MatrixXd dV2 = cmat(theta_, off_k2_, C, 3 * C).transpose() * dZ2;
    Eigen::MatrixXd dY1 = Eigen::MatrixXd::Zero(C, T);
    scatter_taps(dV2, C, dY1);

    Eigen::MatrixXd dZ1 = (cache.z1.array() > 0.0).select(dY1, 0.0);
    mmat(grad, off_k1_, C, 3 * E).noalias() += dZ1 * cache.v1.transpose();
    grad.segment(off_b1_, C) += dZ1.rowwise().sum();
    Eigen::MatrixXd dV1 = cmat(theta_, off_k1_, C, 3 * E).transpose() * dZ1;
    Eigen::MatrixXd dX = Eigen::MatrixXd::Zero(E, T);
    scatter_taps(dV1, E, dX);

    MMap gE = mmat(grad, off_embed_, E, A);
    for (Eigen::Index t = 0; t < T; ++t)
      gE.col(window[static_cast<std::size_t>(t)]) += dX.col(t);
    return loss;
  }

 private:
  struct Cache {
    Eigen::MatrixXd v1, z1, v2, z2;  // tap stacks and pre-activations
    Eigen::VectorXd pooled;
    std::vector<Eigen::Index> argmax;
  };

  // Stack the width-3 neighborhood of every column, zero-padded at the ends.
  static Eigen::MatrixXd make_taps(const Eigen::MatrixXd& in) {
    const Eigen::Index rows = in.rows(), T = in.cols();
    Eigen::MatrixXd taps = Eigen::MatrixXd::Zero(3 * rows, T);
    for (Eigen::Index t = 0; t < T; ++t) {
      if (t > 0) taps.col(t).segment(0, rows) = in.col(t - 1);
      taps.col(t).segment(rows, rows) = in.col(t);
      if (t + 1 < T) taps.col(t).segment(2 * rows, rows) = in.col(t + 1);
    }
    return taps;
  }

  // Adjoint of make_taps: fold tap-stack gradients back onto the columns.
  static void scatter_taps(const Eigen::MatrixXd& dtaps, Eigen::Index rows,
                           Eigen::MatrixXd& dinto) {
    const Eigen::Index T = dinto.cols();
    for (Eigen::Index t = 0; t < T; ++t) {
      if (t > 0) dinto.col(t - 1) += dtaps.col(t).segment(0, rows);
      dinto.col(t) += dtaps.col(t).segment(rows, rows);
      if (t + 1 < T) dinto.col(t + 1) += dtaps.col(t).segment(2 * rows, rows);
    }
  }

  Eigen::VectorXd forward(std::span<const Symbol> raw, Cache& cache) const {
    std::vector<Symbol> pad_buf;
    std::span<const Symbol> window = pad_window(raw, pad_buf);
    const Eigen::Index A = alphabet_, E = cfg_.embed, C = cfg_.hidden, T = cfg_.seq_len;
    CMap Emb = cmat(theta_, off_embed_, E, A);
    Eigen::MatrixXd X(E, T);
    for (Eigen::Index t = 0; t < T; ++t)
      X.col(t) = Emb.col(window[static_cast<std::size_t>(t)]);

    cache.v1 = make_taps(X);
    cache.z1 = cmat(theta_, off_k1_, C, 3 * E) * cache.v1;
    cache.z1.colwise() += Eigen::VectorXd(theta_.segment(off_b1_, C));
    Eigen::MatrixXd y1 = cache.z1.cwiseMax(0.0);

    cache.v2 = make_taps(y1);
    cache.z2 = cmat(theta_, off_k2_, C, 3 * C) * cache.v2;
    cache.z2.colwise() += Eigen::VectorXd(theta_.segment(off_b2_, C));
    Eigen::MatrixXd y2 = cache.z2.cwiseMax(0.0);

    cache.pooled.resize(C);
    cache.argmax.assign(static_cast<std::size_t>(C), 0);
    for (Eigen::Index ch = 0; ch < C; ++ch) {
      Eigen::Index best = 0;
      for (Eigen::Index t = 1; t < T; ++t)
        if (y2(ch, t) > y2(ch, best)) best = t;
      cache.argmax[static_cast<std::size_t>(ch)] = best;
      cache.pooled[ch] = y2(ch, best);
    }
    return cmat(theta_, off_wout_, A, C) * cache.pooled + theta_.segment(off_bout_, A);
  }

  Eigen::Index off_embed_ = 0, off_k1_ = 0, off_b1_ = 0, off_k2_ = 0, off_b2_ = 0,
               off_wout_ = 0, off_bout_ = 0;
};

}  // namespace

std::unique_ptr<NeuralModel> make_neural_model(const NeuralConfig& cfg, int alphabet) {
  if (cfg.arch == Arch::Lstm) return std::make_unique<LstmModel>(cfg, alphabet);
  return std::make_unique<CnnModel>(cfg, alphabet);
}

GradCheckResult gradient_check(NeuralModel& model, std::span<const Symbol> window,
                               Symbol target, int n_coords, std::uint64_t seed,
                               double h) {
  GradCheckResult res;
  Eigen::VectorXd analytic;
  model.loss_and_gradient(window, target, analytic);
  const Eigen::Index n = model.param_count();
  SplitMix64 rng(seed);
  const bool all = n_coords <= 0 || static_cast<Eigen::Index>(n_coords) >= n;
  const Eigen::Index trials = all ? n : n_coords;
  for (Eigen::Index k = 0; k < trials; ++k) {
    Eigen::Index j = all ? k
                         : static_cast<Eigen::Index>(
                               rng.next_below(static_cast<std::uint64_t>(n)));
    double saved = model.params()[j];
    model.params()[j] = saved + h;
    double lp = model.loss(window, target);
    model.params()[j] = saved - h;
    double lm = model.loss(window, target);
    model.params()[j] = saved;
    double gn = (lp - lm) / (2.0 * h);
    double ga = analytic[j];
    double abs_err = std::abs(ga - gn);
    double scale = std::max(std::abs(ga), std::abs(gn));
    bool ok = abs_err < 1e-4 * scale || abs_err < 1e-8;
    res.pass = res.pass && ok;
    res.checked += 1;
    res.max_abs_err = std::max(res.max_abs_err, abs_err);
    res.max_rel_err = std::max(res.max_rel_err, abs_err / std::max(scale, 1e-12));
  }
  return res;
}

}  // namespace mobipred
