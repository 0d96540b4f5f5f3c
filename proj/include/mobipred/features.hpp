#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobipred/ingest.hpp"
#include "mobipred/types.hpp"

namespace mobipred {

// Per-device behavior summary, split into weekday (..w) and weekend (..e)
// halves. The inter-arrival pair is computed from association records, not
// traffic flows, hence the _assoc suffix carried through to the output.
struct DeviceFeatures {
  double pdtw = 0, pdte = 0;            // seconds at the preferred building
  double tjw = 0, tje = 0;              // total jump distance, meters
  double aatw = 0, aate = 0;            // mean active seconds per day
  double aiw_assoc = 0, aie_assoc = 0;  // mean record inter-arrival, seconds
};

// The eight feature names in output order.
std::span<const std::string> feature_names();
double feature_value(const DeviceFeatures& f, const std::string& name);

class BuildingCoords {
 public:
  // CSV `building,x_m,y_m`; a header line is detected and skipped.
  static BuildingCoords load(const std::filesystem::path& file);
  void set(const std::string& building, double x_m, double y_m);
  std::optional<std::pair<double, double>> find(const std::string& building) const;
  std::size_t size() const { return coords_.size(); }

 private:
  std::map<std::string, std::pair<double, double>> coords_;
};

// Weekday/weekend calendar on epoch seconds shifted by a fixed offset.
struct Calendar {
  std::int64_t tz_offset_s = 0;

  std::int64_t day_index(std::int64_t epoch_s) const;
  bool is_weekend(std::int64_t epoch_s) const;  // Saturday or Sunday
};

// Features for one device's records. Lease intervals are split at local
// midnights so every piece lands in exactly one day class. Jumps and
// inter-arrival gaps are attributed to the day class of the later record.
// Throws MissingCoordinates when an observed building has no coordinates.
DeviceFeatures compute_features(std::span<const AssociationRecord> records,
                                const BuildingCoords& coords, const Calendar& calendar);

// Sample Pearson coefficient. Throws DegenerateInput when either vector has
// fewer than two entries or zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationCell {
  DeviceClass cls = DeviceClass::Other;
  std::string feature;
  std::optional<double> r;  // absent when the cell is degenerate
  int n_devices = 0;
};

struct CorrelationReport {
  std::vector<CorrelationCell> cells;
  int dropped = 0;  // devices missing accuracy or features
};

// One r per (class, feature) over devices present on both sides. Degenerate
// cells (fewer than two devices, zero variance) are kept but marked absent.
CorrelationReport correlation_report(const std::map<std::string, double>& accuracy,
                                     const std::map<std::string, DeviceFeatures>& features,
                                     const std::map<std::string, DeviceClass>& classes);

// CSV `class,feature,r,n_devices`; absent cells write NA.
void write_correlations_csv(std::ostream& os, const CorrelationReport& report);

}  // namespace mobipred
