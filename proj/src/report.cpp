#include "mobipred/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <tuple>

#include "mobipred/errors.hpp"

namespace mobipred {

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string frac(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

using GroupKey = std::tuple<int, std::int64_t, int, int>;  // spatial, window, method, k

GroupKey group_of(const MatrixRow& r) {
  return {static_cast<int>(r.spatial), r.window_s, static_cast<int>(r.method), r.k};
}

}  // namespace

void write_matrix_csv(std::ostream& os, const std::vector<MatrixRow>& rows) {
  os << "spatial,window_s,method,k,n_flute,median_flute,mean_flute,skipped_flute,"
        "n_cello,median_cello,mean_cello,skipped_cello,diff\n";
  std::size_t i = 0;
  while (i < rows.size()) {
    const GroupKey key = group_of(rows[i]);
    const MatrixRow* flute = nullptr;
    const MatrixRow* cello = nullptr;
    std::size_t j = i;
    for (; j < rows.size() && group_of(rows[j]) == key; ++j) {
      if (rows[j].cls == DeviceClass::Flute) flute = &rows[j];
      if (rows[j].cls == DeviceClass::Cello) cello = &rows[j];
    }
    const MatrixRow& any = rows[i];
    os << to_string(any.spatial) << ',' << any.window_s << ',' << to_string(any.method)
       << ',' << any.k << ',';
    if (flute)
      os << flute->n_devices << ',' << pct(flute->median_acc) << ','
         << pct(flute->mean_acc) << ',' << flute->n_skipped << ',';
    else
      os << "0,NA,NA,0,";
    if (cello)
      os << cello->n_devices << ',' << pct(cello->median_acc) << ','
         << pct(cello->mean_acc) << ',' << cello->n_skipped << ',';
    else
      os << "0,NA,NA,0,";
    if (flute && cello)
      os << pct(cello->median_acc - flute->median_acc);
    else
      os << "NA";
    os << '\n';
    i = j;
  }
}

void write_runtimes_csv(std::ostream& os, const std::vector<MatrixRow>& rows) {
  os << "method,spatial,window_s,k,n_devices,wall_time_s\n";
  char buf[32];
  std::map<int, double> totals;
  std::size_t i = 0;
  while (i < rows.size()) {
    const GroupKey key = group_of(rows[i]);
    int n = 0;
    std::size_t j = i;
    for (; j < rows.size() && group_of(rows[j]) == key; ++j) n += rows[j].n_devices;
    const MatrixRow& any = rows[i];
    std::snprintf(buf, sizeof(buf), "%.3f", any.wall_time_s);
    os << to_string(any.method) << ',' << to_string(any.spatial) << ',' << any.window_s
       << ',' << any.k << ',' << n << ',' << buf << '\n';
    totals[static_cast<int>(any.method)] += any.wall_time_s;
    i = j;
  }
  for (const auto& [method, total] : totals) {
    std::snprintf(buf, sizeof(buf), "%.3f", total);
    os << "total_" << to_string(static_cast<Method>(method)) << ",,,,," << buf << '\n';
  }
}

void write_report(const std::filesystem::path& dir, const ReportInputs& inputs,
                  bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(dir) && !fs::is_empty(dir) && !force)
    throw IoFailure("refusing to write into nonempty " + dir.string() +
                    " without --force");
  fs::create_directories(dir);

  std::map<std::string, std::string> meta = inputs.meta;
  meta["version"] = kToolVersion;

  auto open = [&](const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw IoFailure("cannot write " + (dir / name).string());
    return os;
  };

  if (inputs.matrix) {
    {
      auto os = open("matrix.csv");
      write_matrix_csv(os, inputs.matrix->rows);
    }
    {
      auto os = open("runtimes.csv");
      write_runtimes_csv(os, inputs.matrix->rows);
    }
    for (const auto& [key, accs] : inputs.matrix->per_device) {
      std::string name = "accuracy_" + to_string(key.method) + "_" +
                         to_string(key.spatial) + "_w" + std::to_string(key.window_s) +
                         "_k" + std::to_string(key.k) + ".csv";
      auto os = open(name);
      os << "device,class,accuracy\n";
      for (const auto& a : accs)
        os << a.device << ',' << to_string(a.cls) << ',' << frac(a.accuracy) << '\n';
    }
    // per-class ECDFs of the configured accuracy population
    for (SpatialResolution spatial :
         {SpatialResolution::AccessPoint, SpatialResolution::Building}) {
      const std::vector<DeviceAccuracy>* accs = nullptr;
      for (const auto& [key, list] : inputs.matrix->per_device) {
        if (key.method == inputs.ecdf.method && key.k == inputs.ecdf.k &&
            key.window_s == inputs.ecdf.window_s && key.spatial == spatial) {
          accs = &list;
          break;
        }
      }
      for (DeviceClass cls : {DeviceClass::Flute, DeviceClass::Cello}) {
        const std::string stem =
            "ecdf_" + std::string(to_string(cls)) + "_" + to_string(spatial);
        std::vector<double> values;
        if (accs)
          for (const auto& a : *accs)
            if (a.cls == cls) values.push_back(a.accuracy);
        if (values.empty()) {
          meta[stem] = "omitted (no data)";
          continue;
        }
        auto os = open(stem + ".csv");
        os << "accuracy,fraction\n";
        for (const auto& [v, f] : ecdf(values)) os << frac(v) << ',' << frac(f) << '\n';
        meta[stem + "_median"] = frac(median(values));
      }
    }
  } else {
    meta["matrix.csv"] = "omitted (no matrix)";
  }

  if (inputs.entropy) {
    auto os = open("entropy.csv");
    write_entropy_csv(os, *inputs.entropy);
  } else {
    meta["entropy.csv"] = "omitted (no entropy reports)";
  }

  if (inputs.correlations) {
    auto os = open("correlations.csv");
    write_correlations_csv(os, *inputs.correlations);
  } else {
    meta["correlations.csv"] = "omitted (no correlations)";
  }

  {
    auto os = open("run_meta");
    for (const auto& [k, v] : meta) os << k << " = " << v << '\n';
  }
}

}  // namespace mobipred
