#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mobipred/errors.hpp"

namespace mobipred {

// Dense location index into a per-device alphabet. 0 is always Unknown.
using Symbol = std::int32_t;
inline constexpr Symbol kUnknown = 0;
inline constexpr const char* kUnknownName = "?";

enum class DeviceClass { Flute, Cello, Other };

const char* to_string(DeviceClass c);
std::optional<DeviceClass> device_class_from(std::string_view s);

enum class SpatialResolution { AccessPoint, Building };

const char* to_string(SpatialResolution s);
std::optional<SpatialResolution> spatial_from(std::string_view s);

struct TemporalResolution {
  std::int64_t window_s = 0;
};

// Canonical experiment windows, seconds.
inline constexpr std::int64_t kCanonicalWindows[] = {300, 900, 1800, 3600, 7200};

// Ordered set of location names with dense ids. Index 0 is reserved for the
// Unknown marker and never maps to a physical location.
class LocationAlphabet {
 public:
  LocationAlphabet();

  // Returns the id of `name`, appending it if unseen. Deterministic for a
  // given insertion order.
  Symbol intern(std::string_view name);

  std::optional<Symbol> find(std::string_view name) const;
  const std::string& name(Symbol id) const;

  // Number of symbols including Unknown.
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Symbol> index_;
};

struct DiscreteSeries {
  std::string device;
  DeviceClass cls = DeviceClass::Other;
  SpatialResolution spatial = SpatialResolution::AccessPoint;
  std::int64_t window_s = 0;
  std::int64_t start_time = 0;  // epoch seconds, multiple of the anchor grid
  std::vector<Symbol> symbols;  // symbols[i] covers [start_time+i*w, start_time+(i+1)*w)
  LocationAlphabet alphabet;

  // Columnar text format: one header line with the five metadata fields,
  // then one symbol name per line ("?" for Unknown).
  void write(std::ostream& os) const;
  static DiscreteSeries read(std::istream& is);

  std::size_t distinct_known() const;
};

}  // namespace mobipred
