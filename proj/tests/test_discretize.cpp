#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "mobipred/discretize.hpp"
#include "mobipred/errors.hpp"

using namespace mobipred;

namespace {

AssociationRecord rec(const char* ap, std::int64_t begin, std::int64_t end) {
  AssociationRecord r;
  r.user_ip = "10.0.0.1";
  r.uuid = "00:11:22:00:00:00";
  r.ap_name = ap;
  r.ap_mac = "00:1d:e5:00:00:00";
  r.lease_begin = begin;
  r.lease_end = end;
  return r;
}

}  // namespace

TEST_CASE("a lone association persists for t_max") {
  DiscretizerConfig cfg;
  cfg.t_max_s = 3600;
  LocationAlphabet alphabet;
  std::vector<AssociationRecord> records{rec("a", 0, 10)};
  auto iv = normalize_intervals(records, cfg, alphabet);
  REQUIRE(iv.size() == 1);
  CHECK(iv[0].begin == 0);
  CHECK(iv[0].end == 3600);
  CHECK(alphabet.name(iv[0].location) == "a");
}

TEST_CASE("a later association truncates the earlier occupancy") {
  DiscretizerConfig cfg;
  cfg.t_max_s = 3600;
  LocationAlphabet alphabet;
  std::vector<AssociationRecord> records{rec("a", 0, 5), rec("b", 600, 605)};
  auto iv = normalize_intervals(records, cfg, alphabet);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].begin == 0);
  CHECK(iv[0].end == 600);
  CHECK(iv[1].begin == 600);
  CHECK(iv[1].end == 4200);
}

TEST_CASE("a long silence leaves a gap between occupancies") {
  DiscretizerConfig cfg;
  cfg.t_max_s = 3600;
  LocationAlphabet alphabet;
  std::vector<AssociationRecord> records{rec("a", 0, 5), rec("b", 10800, 10805)};
  auto iv = normalize_intervals(records, cfg, alphabet);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].end == 3600);
  CHECK(iv[1].begin == 10800);
  CHECK(iv[1].end == 14400);
}

TEST_CASE("step value picks the duration dominant location") {
  LocationAlphabet alphabet;
  Symbol a = alphabet.intern("a"), b = alphabet.intern("b");
  std::vector<OccupancyInterval> iv{{a, 900, 1500}, {b, 1500, 1800}};
  CHECK(step_value(900, 900, iv) == a);  // 600 s vs 300 s

  SUBCASE("nothing overlapping yields the unknown symbol") {
    CHECK(step_value(3600, 900, iv) == kUnknown);
  }
  SUBCASE("duration ties break to the earlier occupancy") {
    std::vector<OccupancyInterval> tie{{a, 0, 450}, {b, 450, 900}};
    CHECK(step_value(0, 900, tie) == a);
    std::vector<OccupancyInterval> tie2{{b, 0, 450}, {a, 450, 900}};
    CHECK(step_value(0, 900, tie2) == b);
  }
  SUBCASE("equal-start ties break to the smaller id") {
    std::vector<OccupancyInterval> tie{{b, 0, 450}, {a, 0, 450}};
    CHECK(step_value(0, 900, tie) == a);
  }
}

TEST_CASE("window weighting sums split occupancies of one location") {
  LocationAlphabet alphabet;
  Symbol a = alphabet.intern("a"), b = alphabet.intern("b");
  // Window [900,1800): a holds 300+300 s against b's 300 s.
  std::vector<OccupancyInterval> iv{{a, 0, 1200}, {b, 1200, 1500}, {a, 1500, 2400}};
  CHECK(step_value(0, 900, iv) == a);
  CHECK(step_value(900, 900, iv) == a);
  CHECK(step_value(1800, 900, iv) == a);
}

TEST_CASE("a static device discretizes to a constant series") {
  DiscretizerConfig cfg;
  cfg.window_s = 900;
  cfg.t_max_s = 2700;
  std::vector<AssociationRecord> records{rec("a", 0, 10)};
  DiscreteSeries s = discretize(records, "dev", DeviceClass::Flute, cfg);
  REQUIRE(s.symbols.size() == 3);
  for (Symbol sym : s.symbols) CHECK(s.alphabet.name(sym) == "a");
  CHECK(s.start_time == 0);
  CHECK(s.window_s == 900);
}

TEST_CASE("ap ping-pong inside one building is flat at building resolution") {
  std::vector<AssociationRecord> records;
  for (int i = 0; i < 8; ++i)
    records.push_back(rec(i % 2 ? "b422r143-win-1" : "b422r9-ap", i * 600, i * 600 + 5));
  DiscretizerConfig cfg;
  cfg.window_s = 900;
  cfg.t_max_s = 3600;

  cfg.spatial = SpatialResolution::Building;
  DiscreteSeries bldg = discretize(records, "dev", DeviceClass::Cello, cfg);
  CHECK(bldg.distinct_known() == 1);
  for (Symbol sym : bldg.symbols) CHECK(bldg.alphabet.name(sym) == "b422");

  cfg.spatial = SpatialResolution::AccessPoint;
  DiscreteSeries ap = discretize(records, "dev", DeviceClass::Cello, cfg);
  CHECK(ap.distinct_known() == 2);
  CHECK(bldg.distinct_known() <= ap.distinct_known());
  CHECK(ap.symbols.size() == bldg.symbols.size());
}

TEST_CASE("series length covers the observed span") {
  std::vector<AssociationRecord> records{rec("a", 130, 140), rec("b", 4000, 4010)};
  DiscretizerConfig cfg;
  cfg.window_s = 900;
  cfg.t_max_s = 600;
  DiscreteSeries s = discretize(records, "dev", DeviceClass::Flute, cfg);
  CHECK(s.start_time == 0);  // floored to the window grid
  // occupancy ends at 4600, so ceil(4600/900) = 6 windows
  CHECK(s.symbols.size() == 6);
  for (Symbol sym : s.symbols) CHECK(sym < static_cast<Symbol>(s.alphabet.size()));

  DiscretizerConfig wide = cfg;
  wide.window_s = 1800;
  DiscreteSeries s2 = discretize(records, "dev", DeviceClass::Flute, wide);
  CHECK(s2.symbols.size() <= s.symbols.size());
}

TEST_CASE("silent stretches become unknown windows") {
  std::vector<AssociationRecord> records{rec("a", 0, 5), rec("b", 10800, 10805)};
  DiscretizerConfig cfg;
  cfg.window_s = 900;
  cfg.t_max_s = 3600;
  DiscreteSeries s = discretize(records, "dev", DeviceClass::Flute, cfg);
  // a:[0,3600) fills windows 0-3, gap to 10800 = windows 4-11, b from window 12
  REQUIRE(s.symbols.size() == 16);
  CHECK(s.alphabet.name(s.symbols[3]) == "a");
  for (int i = 4; i < 12; ++i) CHECK(s.symbols[i] == kUnknown);
  CHECK(s.alphabet.name(s.symbols[12]) == "b");
}

TEST_CASE("empty record set refuses to discretize") {
  DiscretizerConfig cfg;
  std::vector<AssociationRecord> none;
  CHECK_THROWS_AS(discretize(none, "dev", DeviceClass::Flute, cfg), EmptyTrace);
}

TEST_CASE("calendar anchoring aligns the window grid to local midnight") {
  std::vector<AssociationRecord> records{rec("a", 1333238737, 1333238747)};
  DiscretizerConfig cfg;
  cfg.window_s = 900;
  cfg.t_max_s = 900;
  cfg.calendar_anchor = true;
  cfg.tz_offset_s = -7 * 3600;
  DiscreteSeries s = discretize(records, "dev", DeviceClass::Flute, cfg);
  // Grid points sit at local midnight plus a whole number of windows; the
  // series starts at the last grid point at or before the first record.
  CHECK((s.start_time + cfg.tz_offset_s) % 86400 % cfg.window_s == 0);
  CHECK(s.start_time <= 1333238737);
  CHECK(s.start_time > 1333238737 - cfg.window_s);
  CHECK(s.start_time + static_cast<std::int64_t>(s.symbols.size()) * 900 >= 1333239637);

  DiscretizerConfig plain = cfg;
  plain.calendar_anchor = false;
  DiscreteSeries s2 = discretize(records, "dev", DeviceClass::Flute, plain);
  CHECK(s2.start_time % cfg.window_s == 0);
}
