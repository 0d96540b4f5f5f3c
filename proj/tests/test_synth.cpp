#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mobipred/errors.hpp"
#include "mobipred/ingest.hpp"
#include "mobipred/synth.hpp"

using namespace mobipred;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config() {
  SynthConfig cfg = default_synth_config();
  for (auto& c : cfg.classes) c.n_devices = 3;
  cfg.days = 3;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ostringstream os;
  os << std::ifstream(p).rdbuf();
  return os.str();
}

fs::path scratch_dir(const char* name) {
  fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("stay probability one pins every device to a single building") {
  SynthConfig cfg = small_config();
  for (auto& c : cfg.classes) {
    c.stay_prob = 1.0;
    c.matrix.clear();
  }
  for (int cls = 0; cls < 2; ++cls) {
    for (int dev = 0; dev < 3; ++dev) {
      auto records = device_records(cfg, cls, dev);
      REQUIRE(!records.empty());
      std::set<std::string> buildings;
      for (const auto& r : records) buildings.insert(building_of(r.ap_name));
      CHECK(buildings.size() == 1);
    }
  }
}

TEST_CASE("two state symmetric chain has the textbook entropy rate") {
  auto chain = uniform_chain(2, 0.9);
  double h_09 = -(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1));
  CHECK(chain_entropy_rate(chain) == doctest::Approx(h_09).epsilon(1e-9));
  CHECK(chain_entropy_rate(uniform_chain(4, 1.0)) == doctest::Approx(0.0));
}

TEST_CASE("the sidecar carries the analytic entropy rate") {
  SynthConfig cfg = small_config();
  cfg.campus.resize(2);
  SynthClassParams& flute = cfg.classes[0];
  flute.stay_prob = 0.9;
  flute.matrix.clear();
  fs::path dir = scratch_dir("mobipred_synth_sidecar");
  generate(cfg, dir, 1);
  std::string truth = slurp(dir / "ground_truth.csv");
  CHECK(truth.find("flute,3,0.9000") != std::string::npos);
  CHECK(truth.find("0.468996") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("the same seed regenerates byte-identical outputs") {
  SynthConfig cfg = small_config();
  fs::path d1 = scratch_dir("mobipred_synth_det1");
  fs::path d2 = scratch_dir("mobipred_synth_det2");
  auto o1 = generate(cfg, d1, 1);
  auto o2 = generate(cfg, d2, 2);  // different worker count, same stream
  CHECK(o1.n_records == o2.n_records);
  CHECK(slurp(o1.trace) == slurp(o2.trace));
  CHECK(slurp(o1.oui_map) == slurp(o2.oui_map));
  CHECK(slurp(o1.building_coords) == slurp(o2.building_coords));
  CHECK(slurp(o1.ground_truth) == slurp(o2.ground_truth));

  cfg.seed = 999;
  fs::path d3 = scratch_dir("mobipred_synth_det3");
  auto o3 = generate(cfg, d3, 1);
  CHECK(slurp(o3.trace) != slurp(o1.trace));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("generated traces parse without a single malformed line") {
  SynthConfig cfg = small_config();
  fs::path dir = scratch_dir("mobipred_synth_parse");
  auto out = generate(cfg, dir, 1);
  Trace t = load_trace({out.trace});
  CHECK(t.stats.malformed == 0);
  CHECK(t.stats.parsed == out.n_records);
  CHECK(t.by_device.size() == 6);

  OuiMap oui = OuiMap::load(out.oui_map);
  for (const auto& [device, records] : t.by_device)
    CHECK(oui.classify(device) != DeviceClass::Other);
  fs::remove_all(dir);
}

TEST_CASE("simulated transitions track the configured matrix") {
  auto chain = uniform_chain(3, 0.7);
  SplitMix64 rng(12345);
  std::vector<std::vector<double>> counts(3, std::vector<double>(3, 0.0));
  std::vector<double> visits(3, 0.0);
  int state = 0;
  for (int i = 0; i < 100000; ++i) {
    int next = chain_step(rng, chain[state]);
    counts[state][next] += 1.0;
    visits[state] += 1.0;
    state = next;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(counts[i][j] / visits[i] - chain[i][j]) < 0.01);
}

TEST_CASE("the sit-to-use class is configured more regular than the portable one") {
  SynthConfig cfg = default_synth_config();
  REQUIRE(cfg.classes.size() == 2);
  const auto& flute = cfg.classes[0];
  const auto& cello = cfg.classes[1];
  CHECK(cello.stay_prob > flute.stay_prob);
  CHECK(cello.dwell_median_s > flute.dwell_median_s);
  int n = static_cast<int>(cfg.campus.size());
  CHECK(chain_entropy_rate(uniform_chain(n, cello.stay_prob)) <
        chain_entropy_rate(uniform_chain(n, flute.stay_prob)));
}

TEST_CASE("bad configurations are rejected") {
  SynthConfig cfg = small_config();
  SUBCASE("matrix rows must sum to one") {
    cfg.classes[0].matrix = {{0.5, 0.4}, {0.5, 0.5}};
    cfg.campus.resize(2);
    CHECK_THROWS_AS(validate(cfg), ConfigInvalid);
  }
  SUBCASE("dwell times must be positive") {
    cfg.classes[0].dwell_median_s = 0;
    CHECK_THROWS_AS(validate(cfg), ConfigInvalid);
  }
  SUBCASE("prefixes must look like an OUI") {
    cfg.classes[0].oui_prefix = "nope";
    CHECK_THROWS_AS(validate(cfg), ConfigInvalid);
  }
  SUBCASE("the activity window must be ordered") {
    cfg.day_end_s = cfg.day_start_s;
    CHECK_THROWS_AS(validate(cfg), ConfigInvalid);
  }
}

TEST_CASE("device macs carry the class prefix and stay unique") {
  SynthConfig cfg = small_config();
  std::set<std::string> macs;
  for (int dev = 0; dev < 3; ++dev) {
    std::string mac = device_mac(cfg, 0, dev);
    CHECK(mac.substr(0, 8) == cfg.classes[0].oui_prefix);
    CHECK(is_mac(mac));
    macs.insert(mac);
    macs.insert(device_mac(cfg, 1, dev));
  }
  CHECK(macs.size() == 6);
}
