#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mobipred/entropy.hpp"
#include "mobipred/errors.hpp"
#include "mobipred/eval.hpp"
#include "mobipred/report.hpp"
#include "mobipred/rng.hpp"

using namespace mobipred;
namespace fs = std::filesystem;

namespace {

constexpr Symbol A = 1, B = 2, C = 3;

DiscreteSeries make_series(const std::string& device, DeviceClass cls,
                           std::vector<Symbol> symbols, int n_names,
                           SpatialResolution spatial = SpatialResolution::AccessPoint,
                           std::int64_t window_s = 900) {
  DiscreteSeries s;
  s.device = device;
  s.cls = cls;
  s.spatial = spatial;
  s.window_s = window_s;
  for (int i = 0; i < n_names; ++i) s.alphabet.intern("loc" + std::to_string(i));
  s.symbols = std::move(symbols);
  return s;
}

// Clairvoyant predictor: it has read the series ahead of time.
class OraclePredictor final : public Predictor {
 public:
  explicit OraclePredictor(const DiscreteSeries& s, int k) : series_(s), t_(k) {}
  std::optional<Symbol> predict(std::span<const Symbol>) override {
    return series_.symbols[static_cast<std::size_t>(t_)];
  }
  void update(std::span<const Symbol>, Symbol) override { ++t_; }

 private:
  const DiscreteSeries& series_;
  int t_;
};

std::vector<Symbol> alternation(int n) {
  std::vector<Symbol> s;
  for (int i = 0; i < n; ++i) s.push_back(i % 2 ? B : A);
  return s;
}

bool rows_equal_ignoring_wall(const MatrixRow& a, const MatrixRow& b) {
  return a.cls == b.cls && a.spatial == b.spatial && a.window_s == b.window_s &&
         a.method == b.method && a.k == b.k && a.n_devices == b.n_devices &&
         a.n_skipped == b.n_skipped && a.median_acc == b.median_acc &&
         a.mean_acc == b.mean_acc;
}

}  // namespace

TEST_CASE("a clairvoyant predictor scores a perfect accuracy") {
  auto s = make_series("dev", DeviceClass::Flute, alternation(50), 2);
  OraclePredictor oracle(s, 3);
  auto r = evaluate_device(s, oracle, 3);
  CHECK(r.accuracy == doctest::Approx(1.0));
  CHECK(r.attempted == 47);
}

TEST_CASE("an order-1 chain nails an alternation after one cold step") {
  auto s = make_series("dev", DeviceClass::Flute, alternation(100), 2);
  MarkovPredictor mc(1);
  auto r = evaluate_device(s, mc, 1);
  CHECK(r.attempted == 99);
  // two early misses: the cold step, then the order-0 fallback that has
  // only ever seen the other symbol
  CHECK(r.correct == 97);
  CHECK(r.accuracy >= 0.97);
}

TEST_CASE("series no longer than the context are refused") {
  auto s = make_series("dev", DeviceClass::Flute, {A, B, A, B, A}, 2);
  MarkovPredictor mc(1);
  CHECK_THROWS_AS(evaluate_device(s, mc, 5), SeriesTooShort);
  CHECK_THROWS_AS(evaluate_device(s, mc, 7), SeriesTooShort);
  CHECK_NOTHROW(evaluate_device(s, mc, 4));
}

TEST_CASE("unknown targets are skipped unless asked for") {
  auto s = make_series("dev", DeviceClass::Flute, {A, kUnknown, A, kUnknown, A}, 1);
  MarkovPredictor mc(1);
  auto r = evaluate_device(s, mc, 1);
  CHECK(r.attempted == 2);  // the two known targets

  MarkovPredictor mc2(1);
  EvalOptions keep;
  keep.skip_unknown_targets = false;
  auto r2 = evaluate_device(s, mc2, 1, keep);
  CHECK(r2.attempted == 4);
}

TEST_CASE("transition scoring only counts location changes") {
  auto s = make_series("dev", DeviceClass::Flute, {A, A, A, B, B, A}, 2);
  MarkovPredictor mc(1);
  EvalOptions opt;
  opt.transitions_only = true;
  auto r = evaluate_device(s, mc, 1, opt);
  CHECK(r.attempted == 2);  // A->B at t=3, B->A at t=5
}

TEST_CASE("a series with nothing scorable is an error") {
  auto s = make_series("dev", DeviceClass::Flute, {A, kUnknown, kUnknown, kUnknown}, 1);
  MarkovPredictor mc(1);
  CHECK_THROWS_AS(evaluate_device(s, mc, 1), EmptyAfterFilter);
}

TEST_CASE("cold guesses are charged as wrong") {
  auto s = make_series("dev", DeviceClass::Flute, {A, B}, 2);
  MarkovPredictor mc(1);
  auto r = evaluate_device(s, mc, 1);
  CHECK(r.attempted == 1);
  CHECK(r.correct == 0);
}

TEST_CASE("ecdf lists one riser per distinct value") {
  auto points = ecdf({3, 1, 2});
  REQUIRE(points.size() == 3);
  CHECK(points[0] == std::pair<double, double>{1.0, 1.0 / 3});
  CHECK(points[1] == std::pair<double, double>{2.0, 2.0 / 3});
  CHECK(points[2] == std::pair<double, double>{3.0, 1.0});

  auto flat = ecdf({2, 2, 2});
  REQUIRE(flat.size() == 1);
  CHECK(flat[0] == std::pair<double, double>{2.0, 1.0});

  CHECK_THROWS_AS(ecdf({}), EmptyInput);
}

TEST_CASE("median uses the midpoint convention") {
  CHECK(median({1, 2, 3, 4}) == doctest::Approx(2.5));
  CHECK(median({5}) == doctest::Approx(5.0));
  CHECK(median({3, 1, 2}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(median({}), EmptyInput);
}

TEST_CASE("the matrix honors the method filter and orders its rows") {
  MatrixInput input;
  input.spatial = SpatialResolution::AccessPoint;
  input.window_s = 900;
  input.series.push_back(make_series("f1", DeviceClass::Flute, alternation(60), 2));
  input.series.push_back(
      make_series("c1", DeviceClass::Cello, std::vector<Symbol>(60, A), 2));

  EvalConfig cfg;
  cfg.methods = {Method::MC};
  cfg.seq_lens = {1, 2};
  MatrixResult res = run_matrix({input}, cfg);

  REQUIRE(res.rows.size() == 4);  // 2 ks x 2 classes
  for (const auto& row : res.rows) {
    CHECK(row.method == Method::MC);
    CHECK(row.n_devices == 1);
  }
  // canonical order: k ascending, flute before cello
  CHECK(res.rows[0].k == 1);
  CHECK(res.rows[0].cls == DeviceClass::Flute);
  CHECK(res.rows[1].cls == DeviceClass::Cello);
  CHECK(res.rows[2].k == 2);
  // the constant cello series scores above the alternating flute
  CHECK(res.rows[1].median_acc > res.rows[0].median_acc - 1e-9);
}

TEST_CASE("bound rows appear once per combination with the plugged-in medians") {
  MatrixInput input;
  input.window_s = 900;
  SplitMix64 rng(17);
  std::vector<Symbol> noisy;
  for (int i = 0; i < 400; ++i) noisy.push_back(1 + static_cast<Symbol>(rng.next_below(3)));
  input.series.push_back(make_series("f1", DeviceClass::Flute, noisy, 4));

  EvalConfig cfg;
  cfg.methods = {Method::LZ, Method::BWT};
  cfg.seq_lens = {5, 40};  // irrelevant for bounds
  MatrixResult res = run_matrix({input}, cfg);

  REQUIRE(res.rows.size() == 2);  // one row per method, not per k
  for (const auto& row : res.rows) CHECK(row.k == 0);

  EntropyReport er = entropy_report(input.series[0]);
  CHECK(res.rows[0].method == Method::LZ);
  CHECK(res.rows[0].median_acc == doctest::Approx(er.pi_lz * 100.0));
  CHECK(res.rows[1].method == Method::BWT);
  CHECK(res.rows[1].median_acc == doctest::Approx(er.pi_bwt * 100.0));
}

TEST_CASE("the matrix is reproducible and worker-count independent") {
  std::vector<MatrixInput> inputs(1);
  inputs[0].window_s = 900;
  SplitMix64 rng(5);
  for (int d = 0; d < 4; ++d) {
    std::vector<Symbol> sym;
    for (int i = 0; i < 80; ++i) sym.push_back(1 + static_cast<Symbol>(rng.next_below(2)));
    inputs[0].series.push_back(make_series(
        "dev" + std::to_string(d), d % 2 ? DeviceClass::Cello : DeviceClass::Flute,
        std::move(sym), 2));
  }

  EvalConfig cfg;
  cfg.methods = {Method::MC, Method::LSTM, Method::CNN};
  cfg.seq_lens = {2};
  cfg.nn.hidden = 4;
  cfg.nn.embed = 2;
  cfg.nn.layers = 1;

  MatrixResult first = run_matrix(inputs, cfg);
  MatrixResult again = run_matrix(inputs, cfg);
  EvalConfig parallel = cfg;
  parallel.jobs = 2;
  MatrixResult threaded = run_matrix(inputs, parallel);

  REQUIRE(first.rows.size() == again.rows.size());
  REQUIRE(first.rows.size() == threaded.rows.size());
  for (std::size_t i = 0; i < first.rows.size(); ++i) {
    CHECK(rows_equal_ignoring_wall(first.rows[i], again.rows[i]));
    CHECK(rows_equal_ignoring_wall(first.rows[i], threaded.rows[i]));
  }
  REQUIRE(first.per_device.size() == threaded.per_device.size());
  for (std::size_t i = 0; i < first.per_device.size(); ++i) {
    REQUIRE(first.per_device[i].second.size() == threaded.per_device[i].second.size());
    for (std::size_t j = 0; j < first.per_device[i].second.size(); ++j)
      CHECK(first.per_device[i].second[j].accuracy ==
            threaded.per_device[i].second[j].accuracy);
  }
}

TEST_CASE("short series are skipped, not fatal") {
  MatrixInput input;
  input.window_s = 900;
  input.series.push_back(make_series("ok", DeviceClass::Flute, alternation(60), 2));
  input.series.push_back(make_series("runt", DeviceClass::Flute, {A, B, A}, 2));

  EvalConfig cfg;
  cfg.methods = {Method::MC};
  cfg.seq_lens = {5};
  MatrixResult res = run_matrix({input}, cfg);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].n_devices == 1);
  CHECK(res.rows[0].n_skipped == 1);
}

TEST_CASE("coarser locations are easier to predict") {
  // The AP layer ping-pongs unpredictably between two APs of one building.
  SplitMix64 rng(9);
  std::vector<Symbol> ap_symbols, bldg_symbols;
  for (int i = 0; i < 200; ++i) {
    ap_symbols.push_back(1 + static_cast<Symbol>(rng.next_below(2)));
    bldg_symbols.push_back(1);
  }
  auto ap = make_series("dev", DeviceClass::Cello, ap_symbols, 2);
  auto bldg = make_series("dev", DeviceClass::Cello, bldg_symbols, 1,
                          SpatialResolution::Building);
  MarkovPredictor m1(5), m2(5);
  double ap_acc = evaluate_device(ap, m1, 5).accuracy;
  double bldg_acc = evaluate_device(bldg, m2, 5).accuracy;
  CHECK(bldg_acc >= ap_acc);
  CHECK(bldg_acc > 0.99);  // perfect except the one cold step
}

TEST_CASE("the matrix table pairs classes and takes their difference") {
  std::vector<MatrixRow> rows(2);
  rows[0].cls = DeviceClass::Flute;
  rows[0].window_s = 900;
  rows[0].method = Method::MC;
  rows[0].k = 5;
  rows[0].n_devices = 3;
  rows[0].median_acc = 40.0;
  rows[0].mean_acc = 41.0;
  rows[1] = rows[0];
  rows[1].cls = DeviceClass::Cello;
  rows[1].median_acc = 65.5;
  rows[1].mean_acc = 66.0;

  std::ostringstream os;
  write_matrix_csv(os, rows);
  std::string text = os.str();
  CHECK(text.find("spatial,window_s,method,k,"
                  "n_flute,median_flute,mean_flute,skipped_flute,"
                  "n_cello,median_cello,mean_cello,skipped_cello,diff") == 0);
  CHECK(text.find("ap,900,mc,5,3,40.00,41.00,0,3,65.50,66.00,0,25.50") !=
        std::string::npos);

  std::ostringstream half;
  write_matrix_csv(half, {rows[0]});
  CHECK(half.str().find(",NA") != std::string::npos);
}

TEST_CASE("report directories are created once and guarded after") {
  MatrixInput input;
  input.window_s = 900;
  input.series.push_back(make_series("f1", DeviceClass::Flute, alternation(60), 2));
  input.series.push_back(
      make_series("c1", DeviceClass::Cello, std::vector<Symbol>(60, A), 2));
  EvalConfig cfg;
  cfg.methods = {Method::MC};
  cfg.seq_lens = {5};
  MatrixResult res = run_matrix({input}, cfg);

  ReportInputs ri;
  ri.matrix = &res;
  ri.ecdf.method = Method::MC;
  ri.ecdf.k = 5;
  ri.ecdf.window_s = 900;
  ri.meta["note"] = "unit test";

  fs::path dir = fs::temp_directory_path() / "mobipred_report_test";
  fs::remove_all(dir);
  write_report(dir, ri, false);
  CHECK(fs::exists(dir / "matrix.csv"));
  CHECK(fs::exists(dir / "runtimes.csv"));
  CHECK(fs::exists(dir / "ecdf_flute_ap.csv"));
  CHECK(fs::exists(dir / "ecdf_cello_ap.csv"));

  std::ostringstream meta;
  meta << std::ifstream(dir / "run_meta").rdbuf();
  CHECK(meta.str().find("note = unit test") != std::string::npos);
  CHECK(meta.str().find("entropy.csv = omitted") != std::string::npos);

  CHECK_THROWS_AS(write_report(dir, ri, false), IoFailure);
  CHECK_NOTHROW(write_report(dir, ri, true));
  fs::remove_all(dir);
}
