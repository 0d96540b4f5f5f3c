#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "mobipred/errors.hpp"
#include "mobipred/nn.hpp"
#include "mobipred/rng.hpp"

using namespace mobipred;

namespace {

constexpr Symbol A = 1, B = 2;

NeuralConfig tiny(Arch arch) {
  NeuralConfig cfg;
  cfg.arch = arch;
  cfg.seq_len = 4;
  cfg.embed = 4;
  cfg.hidden = 8;
  cfg.layers = 2;
  cfg.seed = 7;
  return cfg;
}

const Arch kArchs[] = {Arch::Lstm, Arch::Cnn};

}  // namespace

TEST_CASE("fresh models emit a normalized distribution") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    std::vector<Symbol> window{A, B, A, B};
    auto p = model->probabilities(window);
    REQUIRE(p.size() == 3);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p[i] > 0.0);
  }
}

TEST_CASE("identical windows produce identical outputs") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    std::vector<Symbol> window{B, A, B, A};
    CHECK(model->logits(window) == model->logits(window));
  }
}

TEST_CASE("short windows are left-padded into a valid distribution") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    std::vector<Symbol> part{A, B};
    std::vector<Symbol> padded{kUnknown, kUnknown, A, B};
    auto p = model->probabilities(part);
    REQUIRE(p.size() == 3);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(model->logits(part) == model->logits(padded));
  }
}

TEST_CASE("windows longer than the context or with alien symbols are rejected") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    std::vector<Symbol> wide{A, B, A, B, A};
    CHECK_THROWS_AS(model->logits(wide), ConfigInvalid);
    std::vector<Symbol> alien{A, B, A, 3};
    CHECK_THROWS_AS(model->logits(alien), DataError);
  }
}

TEST_CASE("repeated training on one pattern drives the loss to zero") {
  for (Arch arch : kArchs) {
    NeuralConfig cfg = tiny(arch);
    cfg.seq_len = 2;
    auto model = make_neural_model(cfg, 3);
    std::vector<Symbol> window{A, B};
    double loss = 1.0;
    for (int step = 0; step < 500 && loss >= 0.01; ++step)
      loss = model->train_step(window, A);
    CAPTURE(static_cast<int>(arch));
    CHECK(loss < 0.01);
  }
}

TEST_CASE("analytic gradients match central differences everywhere") {
  for (Arch arch : kArchs) {
    SplitMix64 rng(arch == Arch::Lstm ? 100 : 200);
    for (int trial = 0; trial < 8; ++trial) {
      NeuralConfig cfg = tiny(arch);
      cfg.seed = rng.next_u64();
      auto model = make_neural_model(cfg, 3);
      std::vector<Symbol> window(4);
      for (auto& s : window) s = static_cast<Symbol>(rng.next_below(3));
      Symbol target = static_cast<Symbol>(rng.next_below(3));
      auto res = gradient_check(*model, window, target, 0, rng.next_u64());
      CAPTURE(static_cast<int>(arch));
      CAPTURE(trial);
      CAPTURE(res.max_rel_err);
      REQUIRE(res.pass);
      CHECK(res.checked == model->param_count());
    }
  }
}

TEST_CASE("gradients stay correct for padded windows") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    std::vector<Symbol> part{B};
    auto res = gradient_check(*model, part, A, 0, 5);
    REQUIRE(res.pass);
  }
}

TEST_CASE("a zero learning rate leaves parameters bit-identical") {
  for (Arch arch : kArchs) {
    NeuralConfig cfg = tiny(arch);
    cfg.lr = 0.0;
    auto model = make_neural_model(cfg, 3);
    Eigen::VectorXd before = model->params();
    std::vector<Symbol> window{A, B, A, B};
    model->train_step(window, A);
    CHECK(model->params() == before);
  }
}

TEST_CASE("an overfit alternation model continues the pattern") {
  for (Arch arch : kArchs) {
    NeuralConfig cfg = tiny(arch);
    auto model = make_neural_model(cfg, 3);
    std::vector<Symbol> series;
    for (int i = 0; i < 1200; ++i) series.push_back(i % 2 ? B : A);
    for (std::size_t t = 4; t < series.size(); ++t)
      model->train_step({series.data() + t - 4, 4}, series[t]);
    std::vector<Symbol> ends_in_a{B, A, B, A};
    CHECK(model->predict(ends_in_a) == B);
    std::vector<Symbol> ends_in_b{A, B, A, B};
    CHECK(model->predict(ends_in_b) == A);
  }
}

TEST_CASE("prediction is the argmax of the forward pass") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 5);
    std::vector<Symbol> window{1, 2, 3, 4};
    auto p = model->probabilities(window);
    Eigen::Index argmax = 0;
    p.maxCoeff(&argmax);
    Symbol predicted = model->predict(window);
    CHECK(predicted == static_cast<Symbol>(argmax));
    CHECK(predicted >= 0);
    CHECK(predicted < 5);
  }
}

TEST_CASE("online accuracy on a period-2 source exceeds 0.95") {
  for (Arch arch : kArchs) {
    NeuralConfig cfg = tiny(arch);
    auto model = make_neural_model(cfg, 3);
    int correct_tail = 0;
    std::vector<Symbol> series;
    for (int i = 0; i < 1001; ++i) series.push_back(i % 2 ? B : A);
    for (int t = 4; t < 1001; ++t) {
      std::span<const Symbol> window{series.data() + t - 4, 4};
      Symbol guess = model->predict(window);
      if (t >= 901 && guess == series[t]) ++correct_tail;
      model->train_step(window, series[t]);
    }
    CAPTURE(static_cast<int>(arch));
    CHECK(correct_tail >= 95);
  }
}

TEST_CASE("the same seed reproduces the same prediction sequence") {
  for (Arch arch : kArchs) {
    SplitMix64 rng(31);
    std::vector<Symbol> series(300);
    for (auto& s : series) s = static_cast<Symbol>(rng.next_below(3));

    auto run = [&] {
      auto model = make_neural_model(tiny(arch), 3);
      std::vector<Symbol> out;
      for (std::size_t t = 4; t < series.size(); ++t) {
        std::span<const Symbol> window{series.data() + t - 4, 4};
        out.push_back(model->predict(window));
        model->train_step(window, series[t]);
      }
      return out;
    };
    CHECK(run() == run());
  }
}

TEST_CASE("cross entropy of a one-hot output is numerically tiny") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    // Zeroed weights mute every path to the logits, leaving the output bias
    // (the tail of the flat vector) as the whole story.
    model->params().setZero();
    model->params().tail(3)[A] = 40.0;
    std::vector<Symbol> window{B, B, A, B};
    auto p = model->probabilities(window);
    CHECK(p[A] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(model->loss(window, A) <= 1e-3);
  }
}

TEST_CASE("poisoned parameters surface as divergence") {
  for (Arch arch : kArchs) {
    auto model = make_neural_model(tiny(arch), 3);
    model->params()[0] = std::numeric_limits<double>::quiet_NaN();
    std::vector<Symbol> window{A, B, A, B};
    CHECK_THROWS_AS(model->train_step(window, A), NumericalDivergence);
  }
}
