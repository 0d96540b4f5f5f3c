#include "mobipred/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mobipred/config.hpp"
#include "mobipred/errors.hpp"
#include "mobipred/parallel.hpp"

namespace mobipred {

SynthConfig default_synth_config() {
  SynthConfig cfg;
  for (int b = 0; b < 8; ++b) {
    SynthBuilding bl;
    char name[16];
    std::snprintf(name, sizeof(name), "b%03d", 101 + b);
    bl.name = name;
    bl.n_aps = 6;
    bl.x_m = 150.0 * (b % 4);
    bl.y_m = 200.0 * (b / 4);
    cfg.campus.push_back(bl);
  }
  SynthClassParams flute;
  flute.cls = DeviceClass::Flute;
  flute.n_devices = 50;
  flute.stay_prob = 0.6;
  flute.dwell_median_s = 1500;
  flute.dwell_sigma = 0.75;
  flute.ap_switch_prob = 0.25;
  flute.oui_prefix = "0a:11:22";
  SynthClassParams cello;
  cello.cls = DeviceClass::Cello;
  cello.n_devices = 50;
  cello.stay_prob = 0.95;
  cello.dwell_median_s = 7200;
  cello.dwell_sigma = 0.5;
  cello.ap_switch_prob = 0.05;
  cello.oui_prefix = "0b:33:44";
  cfg.classes = {flute, cello};
  return cfg;
}

SynthConfig synth_config_from(const Config& config, std::uint64_t seed) {
  SynthConfig cfg = default_synth_config();
  cfg.seed = seed;
  const int n_buildings =
      static_cast<int>(config.get_int("synth.buildings", static_cast<std::int64_t>(cfg.campus.size())));
  const int aps = static_cast<int>(config.get_int("synth.aps_per_building", 6));
  if (n_buildings != static_cast<int>(cfg.campus.size()) || aps != 6) {
    cfg.campus.clear();
    for (int b = 0; b < n_buildings; ++b) {
      SynthBuilding bl;
      char name[16];
      std::snprintf(name, sizeof(name), "b%03d", 101 + b);
      bl.name = name;
      bl.n_aps = aps;
      bl.x_m = 150.0 * (b % 4);
      bl.y_m = 200.0 * (b / 4);
      cfg.campus.push_back(bl);
    }
  }
  cfg.days = static_cast<int>(config.get_int("synth.days", cfg.days));
  cfg.start_epoch = config.get_int("synth.start_epoch", cfg.start_epoch);
  cfg.day_start_s = config.get_int("synth.day_start_s", cfg.day_start_s);
  cfg.day_end_s = config.get_int("synth.day_end_s", cfg.day_end_s);
  cfg.renew_s = config.get_int("synth.renew_s", cfg.renew_s);
  cfg.session_cap_s = config.get_int("synth.session_cap_s", cfg.session_cap_s);
  for (auto& c : cfg.classes) {
    const std::string p = std::string("synth.") + to_string(c.cls) + ".";
    c.n_devices = static_cast<int>(config.get_int(p + "devices", c.n_devices));
    c.stay_prob = config.get_double(p + "stay", c.stay_prob);
    c.dwell_median_s = config.get_double(p + "dwell_median_s", c.dwell_median_s);
    c.dwell_sigma = config.get_double(p + "dwell_sigma", c.dwell_sigma);
    c.ap_switch_prob = config.get_double(p + "ap_switch", c.ap_switch_prob);
    c.oui_prefix = config.get_string(p + "oui", c.oui_prefix);
  }
  return cfg;
}

void validate(const SynthConfig& cfg) {
  if (cfg.campus.empty()) throw ConfigInvalid("campus has no buildings");
  for (const auto& b : cfg.campus) {
    if (b.name.empty()) throw ConfigInvalid("building without a name");
    if (b.n_aps < 1) throw ConfigInvalid("building " + b.name + " has no APs");
  }
  if (cfg.classes.empty()) throw ConfigInvalid("no device classes configured");
  if (cfg.days < 1) throw ConfigInvalid("days must be positive");
  if (cfg.day_start_s < 0 || cfg.day_end_s > 86400 || cfg.day_start_s >= cfg.day_end_s)
    throw ConfigInvalid("activity window must satisfy 0 <= start < end <= 86400");
  if (cfg.renew_s < 1 || cfg.session_cap_s < 1)
    throw ConfigInvalid("renew_s and session_cap_s must be positive");
  const std::size_t nb = cfg.campus.size();
  for (const auto& c : cfg.classes) {
    if (c.n_devices < 0) throw ConfigInvalid("negative device count");
    if (!(c.stay_prob >= 0.0 && c.stay_prob <= 1.0))
      throw ConfigInvalid("stay_prob outside [0,1]");
    if (!(c.dwell_median_s > 0) || !(c.dwell_sigma > 0))
      throw ConfigInvalid("dwell parameters must be positive");
    if (!(c.ap_switch_prob >= 0.0 && c.ap_switch_prob <= 1.0))
      throw ConfigInvalid("ap_switch_prob outside [0,1]");
    if (c.oui_prefix.size() != 8 || c.oui_prefix[2] != ':' || c.oui_prefix[5] != ':')
      throw ConfigInvalid("oui_prefix must be xx:xx:xx");
    if (!c.matrix.empty()) {
      if (c.matrix.size() != nb)
        throw ConfigInvalid("movement matrix size does not match campus");
      for (const auto& row : c.matrix) {
        if (row.size() != nb)
          throw ConfigInvalid("movement matrix is not square over the campus");
        double sum = 0.0;
        for (double p : row) {
          if (p < 0.0) throw ConfigInvalid("negative transition probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw ConfigInvalid("movement matrix row does not sum to 1");
      }
    }
    if (nb == 1 && c.matrix.empty() && c.stay_prob < 1.0)
      throw ConfigInvalid("single-building campus needs stay_prob 1");
  }
}

std::vector<std::vector<double>> uniform_chain(int n, double stay) {
  if (n < 1) throw ConfigInvalid("chain needs at least one state");
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          i == j ? stay : (n > 1 ? (1.0 - stay) / (n - 1) : 0.0);
    if (n == 1) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  }
  return m;
}

double chain_entropy_rate(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  if (n == 0) throw ConfigInvalid("empty chain");
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * matrix[i][j];
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) delta += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (delta < 1e-13) break;
  }
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_h = 0.0;
    for (double p : matrix[i])
      if (p > 0.0) row_h -= p * std::log2(p);
    h += pi[i] * row_h;
  }
  return h;
}

int chain_step(SplitMix64& rng, const std::vector<double>& row) {
  double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(row.size()) - 1;  // guards rounding at u ~ 1
}

namespace {

int global_device_index(const SynthConfig& cfg, int class_idx, int device_idx) {
  int g = device_idx;
  for (int c = 0; c < class_idx; ++c) g += cfg.classes[static_cast<std::size_t>(c)].n_devices;
  return g;
}

std::string format_mac(const std::string& prefix, int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s:%02x:%02x:%02x", prefix.c_str(),
                (idx >> 16) & 0xff, (idx >> 8) & 0xff, idx & 0xff);
  return buf;
}

std::string format_ap_mac(int building_idx, int ap_idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "00:1d:e5:%02x:%02x:00", building_idx & 0xff,
                ap_idx & 0xff);
  return buf;
}

}  // namespace

std::string device_mac(const SynthConfig& cfg, int class_idx, int device_idx) {
  const auto& params = cfg.classes[static_cast<std::size_t>(class_idx)];
  return format_mac(params.oui_prefix, global_device_index(cfg, class_idx, device_idx));
}

std::vector<AssociationRecord> device_records(const SynthConfig& cfg, int class_idx,
                                              int device_idx) {
  const auto& params = cfg.classes[static_cast<std::size_t>(class_idx)];
  const int g = global_device_index(cfg, class_idx, device_idx);
  SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(g)));
  const auto& matrix =
      params.matrix.empty()
          ? uniform_chain(static_cast<int>(cfg.campus.size()), params.stay_prob)
          : params.matrix;

  const std::string mac = format_mac(params.oui_prefix, g);
  char ip[24];
  std::snprintf(ip, sizeof(ip), "10.%d.%d.%d", (g >> 16) & 0xff, (g >> 8) & 0xff,
                g & 0xff);

  const double mu = std::log(params.dwell_median_s);
  int building = static_cast<int>(rng.next_below(cfg.campus.size()));
  int ap = static_cast<int>(
      rng.next_below(static_cast<std::uint64_t>(cfg.campus[static_cast<std::size_t>(building)].n_aps)));

  std::vector<AssociationRecord> out;
  for (int day = 0; day < cfg.days; ++day) {
    std::int64_t t = cfg.start_epoch + static_cast<std::int64_t>(day) * 86400 + cfg.day_start_s;
    const std::int64_t day_end =
        cfg.start_epoch + static_cast<std::int64_t>(day) * 86400 + cfg.day_end_s;
    while (t < day_end) {
      std::int64_t dwell =
          std::llround(rng.lognormal(mu, params.dwell_sigma));
      dwell = std::clamp<std::int64_t>(dwell, 60, 86400);
      const std::int64_t dwell_end = std::min(t + dwell, day_end);
      // lease renewals every renew_s while the dwell lasts; the AP may
      // ping-pong within the building at each renewal
      for (std::int64_t r = t; r < dwell_end; r += cfg.renew_s) {
        if (r != t && rng.next_double() < params.ap_switch_prob)
          ap = static_cast<int>(rng.next_below(
              static_cast<std::uint64_t>(cfg.campus[static_cast<std::size_t>(building)].n_aps)));
        AssociationRecord rec;
        rec.user_ip = ip;
        rec.uuid = mac;
        const auto& bl = cfg.campus[static_cast<std::size_t>(building)];
        rec.ap_name = bl.name + "r" + std::to_string(ap) + "-ap";
        rec.ap_mac = format_ap_mac(building, ap);
        rec.lease_begin = r;
        rec.lease_end = r + std::min(dwell_end - r, cfg.session_cap_s);
        out.push_back(std::move(rec));
      }
      t = dwell_end;
      if (t >= day_end) break;  // overnight freeze: resume here tomorrow
      int next = chain_step(rng, matrix[static_cast<std::size_t>(building)]);
      if (next != building) {
        building = next;
        ap = static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(cfg.campus[static_cast<std::size_t>(building)].n_aps)));
      }
    }
  }
  return out;
}

SynthOutputs generate(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                      int jobs) {
  validate(cfg);
  std::filesystem::create_directories(out_dir);
  SynthOutputs paths;
  paths.trace = out_dir / "trace.txt";
  paths.oui_map = out_dir / "oui_map.csv";
  paths.building_coords = out_dir / "building_coords.csv";
  paths.ground_truth = out_dir / "ground_truth.csv";

  std::vector<std::pair<int, int>> devices;  // (class_idx, device_idx)
  for (std::size_t c = 0; c < cfg.classes.size(); ++c)
    for (int d = 0; d < cfg.classes[c].n_devices; ++d)
      devices.emplace_back(static_cast<int>(c), d);

  std::vector<std::vector<AssociationRecord>> per_device(devices.size());
  parallel_for(devices.size(), jobs, [&](std::size_t i) {
    per_device[i] = device_records(cfg, devices[i].first, devices[i].second);
  });

  {
    std::ofstream os(paths.trace);
    if (!os) throw IoFailure("cannot write " + paths.trace.string());
    for (const auto& recs : per_device) {
      for (const auto& r : recs) {
        os << serialize_record(r) << '\n';
        paths.n_records += 1;
      }
    }
  }
  {
    std::ofstream os(paths.oui_map);
    if (!os) throw IoFailure("cannot write " + paths.oui_map.string());
    os << "# prefix,class\n";
    for (const auto& c : cfg.classes) os << c.oui_prefix << ',' << to_string(c.cls) << '\n';
  }
  {
    std::ofstream os(paths.building_coords);
    if (!os) throw IoFailure("cannot write " + paths.building_coords.string());
    os << "building,x_m,y_m\n";
    char buf[64];
    for (const auto& b : cfg.campus) {
      std::snprintf(buf, sizeof(buf), "%.3f,%.3f", b.x_m, b.y_m);
      os << b.name << ',' << buf << '\n';
    }
  }
  {
    std::ofstream os(paths.ground_truth);
    if (!os) throw IoFailure("cannot write " + paths.ground_truth.string());
    os << "class,n_devices,stay_prob,dwell_median_s,dwell_sigma,n_buildings,"
          "entropy_rate_bits\n";
    char buf[128];
    std::vector<std::vector<std::vector<double>>> matrices;
    for (const auto& c : cfg.classes) {
      auto m = c.matrix.empty()
                   ? uniform_chain(static_cast<int>(cfg.campus.size()), c.stay_prob)
                   : c.matrix;
      std::snprintf(buf, sizeof(buf), "%.4f,%.1f,%.4f,%zu,%.6f", c.stay_prob,
                    c.dwell_median_s, c.dwell_sigma, cfg.campus.size(),
                    chain_entropy_rate(m));
      os << to_string(c.cls) << ',' << c.n_devices << ',' << buf << '\n';
      matrices.push_back(std::move(m));
    }
    // transition matrices, one row per line: matrix,<class>,<row>,<p0>,...
    for (std::size_t ci = 0; ci < cfg.classes.size(); ++ci) {
      for (std::size_t i = 0; i < matrices[ci].size(); ++i) {
        os << "matrix," << to_string(cfg.classes[ci].cls) << ',' << i;
        for (double p : matrices[ci][i]) {
          std::snprintf(buf, sizeof(buf), "%.9f", p);
          os << ',' << buf;
        }
        os << '\n';
      }
    }
  }
  return paths;
}

}  // namespace mobipred
