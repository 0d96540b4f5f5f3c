#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "mobipred/config.hpp"
#include "mobipred/discretize.hpp"
#include "mobipred/entropy.hpp"
#include "mobipred/errors.hpp"
#include "mobipred/eval.hpp"
#include "mobipred/features.hpp"
#include "mobipred/ingest.hpp"
#include "mobipred/parallel.hpp"
#include "mobipred/pipeline.hpp"
#include "mobipred/report.hpp"
#include "mobipred/synth.hpp"

namespace fs = std::filesystem;
using namespace mobipred;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  std::string config_path;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool force = false;
};

std::string sanitize(const std::string& device) {
  std::string s = device;
  for (char& c : s)
    if (c == ':' || c == '/') c = '-';
  return s;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& names) {
  std::vector<fs::path> out;
  for (const auto& n : names) out.emplace_back(n);
  return out;
}

SpatialResolution parse_spatial(const std::string& s) {
  auto sp = spatial_from(s);
  if (!sp) throw UsageError("--spatial must be 'ap' or 'building', got '" + s + "'");
  return *sp;
}

DiscretizerConfig discretizer_from(const Config& config) {
  DiscretizerConfig dc;
  dc.t_max_s = config.get_int("discretize.t_max_s", dc.t_max_s);
  dc.calendar_anchor = config.get_bool("discretize.calendar_anchor", dc.calendar_anchor);
  dc.tz_offset_s = config.get_int("discretize.tz_offset_s", dc.tz_offset_s);
  return dc;
}

EvalConfig eval_config_from(const Config& config, const GlobalOpts& g) {
  EvalConfig e;
  e.seed = g.seed;
  e.jobs = g.jobs;
  e.methods.clear();
  for (const auto& name :
       config.get_string_list("eval.methods", {"mc", "lstm", "cnn", "lz", "bwt"})) {
    auto m = method_from_string(name);
    if (!m) throw ConfigInvalid("eval.methods: unknown method '" + name + "'");
    e.methods.push_back(*m);
  }
  e.seq_lens.clear();
  for (auto k : config.get_int_list("eval.seq_lens", {5, 10, 20, 40}))
    e.seq_lens.push_back(static_cast<int>(k));
  e.nn_device_sample = static_cast<int>(config.get_int("nn.device_sample", 50));
  e.options.skip_unknown_targets = config.get_bool("eval.skip_unknown_targets", true);
  e.options.transitions_only = config.get_bool("eval.transitions_only", false);
  e.nn.hidden = static_cast<int>(config.get_int("nn.hidden", 64));
  e.nn.layers = static_cast<int>(config.get_int("nn.layers", 2));
  e.nn.embed = static_cast<int>(config.get_int("nn.embed", 32));
  e.nn.lr = config.get_double("nn.lr", 1e-3);
  e.nn.seed = static_cast<std::uint64_t>(config.get_int("nn.seed", 1));
  e.bwt_segments = config.get_int("entropy.bwt_segments", 0);
  return e;
}

std::vector<std::int64_t> eval_windows(const Config& config) {
  return config.get_int_list("eval.windows", {300, 900, 1800, 3600, 7200});
}

std::vector<SpatialResolution> eval_spatials(const Config& config) {
  std::vector<SpatialResolution> out;
  for (const auto& s : config.get_string_list("eval.spatials", {"ap", "building"})) {
    auto sp = spatial_from(s);
    if (!sp) throw ConfigInvalid("eval.spatials: unknown resolution '" + s + "'");
    out.push_back(*sp);
  }
  return out;
}

struct LoadedTrace {
  Trace trace;
  OuiMap oui;
  Population population;
};

LoadedTrace load_and_filter(const std::vector<std::string>& trace_files,
                            const std::string& oui_file, const Config& config) {
  if (trace_files.empty()) throw UsageError("--trace is required");
  if (oui_file.empty()) throw UsageError("--oui is required");
  LoadedTrace lt;
  lt.trace = load_trace(to_paths(trace_files));
  lt.oui = OuiMap::load(oui_file);
  lt.population =
      filter_trace(lt.trace, lt.oui, config.get_int("discretize.tz_offset_s", 0));
  if (lt.population.devices.empty())
    throw EmptyAfterFilter("no device passes the study filter");
  return lt;
}

std::map<std::string, std::string> base_meta(const Config& config, const GlobalOpts& g) {
  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : config.entries()) meta["config." + k] = v;
  meta["seed"] = std::to_string(g.seed);
  meta["jobs"] = std::to_string(g.jobs);
  meta["openmp"] = openmp_enabled() ? "yes" : "no";
  return meta;
}

int run_synth(const GlobalOpts& g, const Config& config, int devices, int days) {
  SynthConfig sc = synth_config_from(config, g.seed);
  if (devices >= 0)
    for (auto& c : sc.classes) c.n_devices = devices;
  if (days > 0) sc.days = days;
  fs::path out_dir = g.out;
  if (fs::exists(out_dir / "trace.txt") && !g.force)
    throw IoFailure("refusing to overwrite " + (out_dir / "trace.txt").string() +
                    " without --force");
  SynthOutputs paths = generate(sc, out_dir, g.jobs);
  std::cout << "wrote " << paths.n_records << " records for "
            << (sc.classes.size() ? sc.classes[0].n_devices : 0) << "+"
            << (sc.classes.size() > 1 ? sc.classes[1].n_devices : 0) << " devices to "
            << paths.trace.string() << "\n"
            << "sidecars: " << paths.oui_map.filename().string() << ", "
            << paths.building_coords.filename().string() << ", "
            << paths.ground_truth.filename().string() << "\n";
  return 0;
}

int run_ingest(const std::vector<std::string>& trace_files, const std::string& clean_out,
               const GlobalOpts& g) {
  if (trace_files.empty()) throw UsageError("--trace is required");
  Trace t = load_trace(to_paths(trace_files));
  const auto& s = t.stats;
  std::cout << "lines " << s.lines << ", parsed " << s.parsed << ", malformed "
            << s.malformed << ", duplicates " << s.duplicates << ", devices "
            << t.by_device.size() << "\n";
  for (std::size_t i = 0; i < s.errors.size() && i < 10; ++i)
    std::cerr << "  " << s.errors[i] << "\n";
  if (s.errors.size() > 10)
    std::cerr << "  ... " << (s.errors.size() - 10) << " more\n";
  if (s.parsed == 0) throw EmptyTrace("no parsable records in input");
  if (!clean_out.empty()) {
    fs::path p = clean_out;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw IoFailure("cannot write " + p.string());
    for (const auto& [device, records] : t.by_device)
      for (const auto& r : records) os << serialize_record(r) << '\n';
    std::cout << "cleaned trace written to " << p.string() << "\n";
  }
  (void)g;
  return 0;
}

int run_summarize(const std::vector<std::string>& trace_files, const std::string& oui_file,
                  const GlobalOpts& g, const Config& config) {
  if (trace_files.empty()) throw UsageError("--trace is required");
  if (oui_file.empty()) throw UsageError("--oui is required");
  Trace t = load_trace(to_paths(trace_files));
  OuiMap oui = OuiMap::load(oui_file);
  SummaryAccumulator acc(config.get_int("discretize.tz_offset_s", 0));
  for (const auto& [device, records] : t.by_device)
    for (const auto& r : records) acc.add(device, r);
  auto summaries = acc.finalize(oui);
  auto kept = filter_population(summaries);
  fs::create_directories(g.out);
  {
    std::ofstream os(fs::path(g.out) / "summary.csv");
    if (!os) throw IoFailure("cannot write summary.csv");
    write_summary_csv(os, summaries);
  }
  {
    std::ofstream os(fs::path(g.out) / "population.txt");
    if (!os) throw IoFailure("cannot write population.txt");
    for (const auto& d : kept) os << d << '\n';
  }
  std::cout << summaries.size() << " devices summarized, " << kept.size()
            << " pass the study filter; wrote summary.csv and population.txt under "
            << g.out << "\n";
  return 0;
}

int run_discretize(const std::vector<std::string>& trace_files, const std::string& oui_file,
                   const std::string& spatial_s, std::int64_t window_s,
                   const GlobalOpts& g, const Config& config) {
  if (window_s <= 0) throw UsageError("--window must be positive seconds");
  SpatialResolution spatial = parse_spatial(spatial_s);
  LoadedTrace lt = load_and_filter(trace_files, oui_file, config);
  DiscretizerConfig dc = discretizer_from(config);
  dc.spatial = spatial;
  dc.window_s = window_s;
  auto series = discretize_population(lt.trace, lt.population, dc, g.jobs);
  fs::path dir = fs::path(g.out) / ("series_" + std::string(to_string(spatial)) + "_w" +
                                    std::to_string(window_s));
  fs::create_directories(dir);
  for (const auto& s : series) {
    std::ofstream os(dir / (sanitize(s.device) + ".series"));
    if (!os) throw IoFailure("cannot write series for " + s.device);
    s.write(os);
  }
  std::cout << series.size() << " series written to " << dir.string() << "\n";
  return 0;
}

int run_entropy(const std::vector<std::string>& trace_files, const std::string& oui_file,
                const std::string& series_dir, const std::string& spatial_s,
                std::int64_t window_s, const GlobalOpts& g, const Config& config) {
  std::vector<DiscreteSeries> series;
  if (!series_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(series_dir))
      if (entry.path().extension() == ".series") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw EmptyTrace("no .series files in " + series_dir);
    for (const auto& f : files) {
      std::ifstream is(f);
      if (!is) throw IoFailure("cannot read " + f.string());
      series.push_back(DiscreteSeries::read(is));
    }
  } else {
    if (window_s <= 0) throw UsageError("--window must be positive seconds");
    LoadedTrace lt = load_and_filter(trace_files, oui_file, config);
    DiscretizerConfig dc = discretizer_from(config);
    dc.spatial = parse_spatial(spatial_s);
    dc.window_s = window_s;
    series = discretize_population(lt.trace, lt.population, dc, g.jobs);
  }
  EntropyRun run = entropy_population(series, config.get_bool("entropy.keep_unknown", false),
                                      config.get_int("entropy.bwt_segments", 0), g.jobs);
  fs::create_directories(g.out);
  fs::path out = fs::path(g.out) / "entropy.csv";
  {
    std::ofstream os(out);
    if (!os) throw IoFailure("cannot write " + out.string());
    write_entropy_csv(os, run.reports);
  }
  std::cout << run.reports.size() << " devices reported (" << run.skipped
            << " skipped) to " << out.string() << "\n";
  return 0;
}

std::vector<MatrixInput> build_inputs(const LoadedTrace& lt, const Config& config,
                                      const GlobalOpts& g) {
  std::vector<MatrixInput> inputs;
  for (SpatialResolution spatial : eval_spatials(config)) {
    for (std::int64_t window : eval_windows(config)) {
      DiscretizerConfig dc = discretizer_from(config);
      dc.spatial = spatial;
      dc.window_s = window;
      MatrixInput input;
      input.spatial = spatial;
      input.window_s = window;
      input.series = discretize_population(lt.trace, lt.population, dc, g.jobs);
      inputs.push_back(std::move(input));
    }
  }
  return inputs;
}

EcdfSelection ecdf_selection(const Config& config) {
  EcdfSelection sel;
  auto m = method_from_string(config.get_string("report.ecdf_method", "mc"));
  if (!m) throw ConfigInvalid("report.ecdf_method: unknown method");
  sel.method = *m;
  sel.k = is_bound(sel.method) ? 0 : static_cast<int>(config.get_int("report.ecdf_k", 5));
  sel.window_s = config.get_int("report.ecdf_window", 900);
  return sel;
}

int run_evaluate(const std::vector<std::string>& trace_files, const std::string& oui_file,
                 const GlobalOpts& g, const Config& config) {
  LoadedTrace lt = load_and_filter(trace_files, oui_file, config);
  auto inputs = build_inputs(lt, config, g);
  EvalConfig ec = eval_config_from(config, g);
  MatrixResult matrix = run_matrix(inputs, ec);
  ReportInputs ri;
  ri.matrix = &matrix;
  ri.ecdf = ecdf_selection(config);
  ri.meta = base_meta(config, g);
  ri.meta["population"] = std::to_string(lt.population.devices.size());
  ri.meta["trace_parsed"] = std::to_string(lt.trace.stats.parsed);
  ri.meta["trace_malformed"] = std::to_string(lt.trace.stats.malformed);
  write_report(g.out, ri, g.force);
  std::cout << matrix.rows.size() << " matrix rows over "
            << lt.population.devices.size() << " devices; report in " << g.out << "\n";
  return 0;
}

std::map<std::string, DeviceFeatures> features_for(
    const LoadedTrace& lt, const BuildingCoords& coords, const Calendar& cal,
    const std::vector<std::string>& devices) {
  std::map<std::string, DeviceFeatures> out;
  for (const auto& d : devices) {
    auto it = lt.trace.by_device.find(d);
    if (it == lt.trace.by_device.end()) continue;
    out[d] = compute_features(it->second, coords, cal);
  }
  return out;
}

int run_correlate(const std::vector<std::string>& trace_files, const std::string& oui_file,
                  const std::string& coords_file, const std::string& acc_file,
                  const GlobalOpts& g, const Config& config) {
  if (coords_file.empty()) throw UsageError("--coords is required");
  if (acc_file.empty()) throw UsageError("--acc is required");
  LoadedTrace lt = load_and_filter(trace_files, oui_file, config);
  BuildingCoords coords = BuildingCoords::load(coords_file);
  Calendar cal{config.get_int("features.tz_offset_s", 0)};

  std::map<std::string, double> accuracy;
  std::map<std::string, DeviceClass> classes;
  {
    std::ifstream is(acc_file);
    if (!is) throw IoFailure("cannot open " + acc_file);
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line == "device,class,accuracy") continue;
      auto c1 = line.find(',');
      auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
      if (c2 == std::string::npos)
        throw MalformedLine("accuracy file needs 'device,class,accuracy'", line_no);
      std::string device = line.substr(0, c1);
      auto cls = device_class_from(line.substr(c1 + 1, c2 - c1 - 1));
      if (!cls) throw MalformedLine("unknown class in accuracy file", line_no);
      try {
        accuracy[device] = std::stod(line.substr(c2 + 1));
      } catch (const std::exception&) {
        throw MalformedLine("non-numeric accuracy", line_no);
      }
      classes[device] = *cls;
    }
  }
  if (accuracy.empty()) throw EmptyAfterFilter("accuracy file has no rows");

  std::vector<std::string> devices;
  for (const auto& [d, a] : accuracy) devices.push_back(d);
  auto features = features_for(lt, coords, cal, devices);
  CorrelationReport report = correlation_report(accuracy, features, classes);
  fs::create_directories(g.out);
  fs::path out = fs::path(g.out) / "correlations.csv";
  {
    std::ofstream os(out);
    if (!os) throw IoFailure("cannot write " + out.string());
    write_correlations_csv(os, report);
  }
  std::cout << report.cells.size() << " cells (" << report.dropped
            << " devices dropped) to " << out.string() << "\n";
  return 0;
}

int run_report(const std::vector<std::string>& trace_files, const std::string& oui_file,
               const std::string& coords_file, const GlobalOpts& g, const Config& config) {
  LoadedTrace lt = load_and_filter(trace_files, oui_file, config);
  auto inputs = build_inputs(lt, config, g);
  EvalConfig ec = eval_config_from(config, g);
  MatrixResult matrix = run_matrix(inputs, ec);

  ReportInputs ri;
  ri.matrix = &matrix;
  ri.ecdf = ecdf_selection(config);
  ri.meta = base_meta(config, g);
  ri.meta["population"] = std::to_string(lt.population.devices.size());
  ri.meta["trace_parsed"] = std::to_string(lt.trace.stats.parsed);
  ri.meta["trace_malformed"] = std::to_string(lt.trace.stats.malformed);

  // entropy reports at one configured resolution
  auto entropy_spatial = parse_spatial(config.get_string("report.entropy_spatial", "building"));
  auto entropy_window = config.get_int("report.entropy_window", 3600);
  EntropyRun erun;
  bool have_entropy = false;
  for (const auto& input : inputs) {
    if (input.spatial == entropy_spatial && input.window_s == entropy_window) {
      erun = entropy_population(input.series,
                                config.get_bool("entropy.keep_unknown", false),
                                config.get_int("entropy.bwt_segments", 0), g.jobs);
      have_entropy = true;
      break;
    }
  }
  if (have_entropy) {
    ri.entropy = &erun.reports;
    ri.meta["entropy_skipped"] = std::to_string(erun.skipped);
  } else {
    ri.meta["entropy.csv"] =
        "omitted (no evaluated combination matches report.entropy_spatial/window)";
  }

  // correlations against one configured accuracy population
  CorrelationReport creport;
  bool have_corr = false;
  if (!coords_file.empty()) {
    auto acc_method = method_from_string(config.get_string("report.acc_method", "mc"));
    if (!acc_method) throw ConfigInvalid("report.acc_method: unknown method");
    int acc_k = is_bound(*acc_method) ? 0
                                      : static_cast<int>(config.get_int("report.acc_k", 5));
    auto acc_spatial = parse_spatial(config.get_string("report.acc_spatial", "building"));
    auto acc_window = config.get_int("report.acc_window", 3600);
    const std::vector<DeviceAccuracy>* accs = nullptr;
    for (const auto& [key, list] : matrix.per_device) {
      if (key.method == *acc_method && key.k == acc_k && key.spatial == acc_spatial &&
          key.window_s == acc_window) {
        accs = &list;
        break;
      }
    }
    if (accs && !accs->empty()) {
      BuildingCoords coords = BuildingCoords::load(coords_file);
      Calendar cal{config.get_int("features.tz_offset_s", 0)};
      std::map<std::string, double> accuracy;
      std::vector<std::string> devices;
      for (const auto& a : *accs) {
        accuracy[a.device] = a.accuracy;
        devices.push_back(a.device);
      }
      auto features = features_for(lt, coords, cal, devices);
      creport = correlation_report(accuracy, features, lt.population.classes);
      ri.correlations = &creport;
      have_corr = true;
    } else {
      ri.meta["correlations.csv"] =
          "omitted (no evaluated combination matches report.acc_*)";
    }
  } else {
    ri.meta["correlations.csv"] = "omitted (no --coords given)";
  }
  (void)have_corr;

  write_report(g.out, ri, g.force);
  std::cout << "report in " << g.out << ": " << matrix.rows.size() << " matrix rows, "
            << (have_entropy ? erun.reports.size() : 0) << " entropy rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WiFi association mobility: predictors, entropy bounds, reports"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--jobs", g.jobs, "worker threads (1 = serial)");
  app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--out", g.out, "output directory (default: out)");
  app.add_flag("--force", g.force, "overwrite existing outputs");

  std::vector<std::string> trace_files;
  std::string oui_file, coords_file, acc_file, series_dir, clean_out;
  std::string spatial_s = "ap";
  std::int64_t window_s = 900;
  int synth_devices = -1, synth_days = -1;

  auto* synth = app.add_subcommand("synth", "generate a synthetic association trace");
  synth->add_option("--devices", synth_devices, "devices per class");
  synth->add_option("--days", synth_days, "simulated days");

  auto* ingest = app.add_subcommand("ingest", "parse association logs, report stats");
  ingest->add_option("--trace", trace_files, "trace file(s)");
  ingest->add_option("--write-clean", clean_out, "write parsed records to this file");

  auto* summarize = app.add_subcommand("summarize", "per-device summary + study filter");
  summarize->add_option("--trace", trace_files, "trace file(s)");
  summarize->add_option("--oui", oui_file, "OUI map (prefix,class)");

  auto* discretize_cmd =
      app.add_subcommand("discretize", "write per-device discrete location series");
  discretize_cmd->add_option("--trace", trace_files, "trace file(s)");
  discretize_cmd->add_option("--oui", oui_file, "OUI map (prefix,class)");
  discretize_cmd->add_option("--spatial", spatial_s, "ap or building");
  discretize_cmd->add_option("--window", window_s, "window seconds");

  auto* entropy_cmd = app.add_subcommand("entropy", "per-device entropy and bounds");
  entropy_cmd->add_option("--trace", trace_files, "trace file(s)");
  entropy_cmd->add_option("--oui", oui_file, "OUI map (prefix,class)");
  entropy_cmd->add_option("--series-dir", series_dir, "read .series files instead");
  entropy_cmd->add_option("--spatial", spatial_s, "ap or building");
  entropy_cmd->add_option("--window", window_s, "window seconds");

  auto* evaluate = app.add_subcommand("evaluate", "run the predictor/bound matrix");
  evaluate->add_option("--trace", trace_files, "trace file(s)");
  evaluate->add_option("--oui", oui_file, "OUI map (prefix,class)");
  bool transitions_only = false;
  evaluate->add_flag("--transitions-only", transitions_only,
                     "score only steps that change location");

  auto* correlate = app.add_subcommand("correlate", "features vs accuracy correlations");
  correlate->add_option("--trace", trace_files, "trace file(s)");
  correlate->add_option("--oui", oui_file, "OUI map (prefix,class)");
  correlate->add_option("--coords", coords_file, "building,x_m,y_m CSV");
  correlate->add_option("--acc", acc_file, "device,class,accuracy CSV");

  auto* report = app.add_subcommand("report", "full pipeline report directory");
  report->add_option("--trace", trace_files, "trace file(s)");
  report->add_option("--oui", oui_file, "OUI map (prefix,class)");
  report->add_option("--coords", coords_file, "building,x_m,y_m CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Config config;
    if (!g.config_path.empty()) config = Config::load(g.config_path);
    if (transitions_only) config.set("eval.transitions_only", "true");

    if (synth->parsed()) return run_synth(g, config, synth_devices, synth_days);
    if (ingest->parsed()) return run_ingest(trace_files, clean_out, g);
    if (summarize->parsed()) return run_summarize(trace_files, oui_file, g, config);
    if (discretize_cmd->parsed())
      return run_discretize(trace_files, oui_file, spatial_s, window_s, g, config);
    if (entropy_cmd->parsed())
      return run_entropy(trace_files, oui_file, series_dir, spatial_s, window_s, g,
                         config);
    if (evaluate->parsed()) return run_evaluate(trace_files, oui_file, g, config);
    if (correlate->parsed())
      return run_correlate(trace_files, oui_file, coords_file, acc_file, g, config);
    if (report->parsed()) return run_report(trace_files, oui_file, coords_file, g, config);
    throw UsageError("no subcommand selected");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
