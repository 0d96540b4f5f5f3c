#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mobipred/errors.hpp"
#include "mobipred/types.hpp"

namespace mobipred {

// One parsed association-log row.
struct AssociationRecord {
  std::string user_ip;
  std::string uuid;     // device MAC, xx:xx:xx:xx:xx:xx
  std::string ap_name;
  std::string ap_mac;
  std::int64_t lease_begin = 0;
  std::int64_t lease_end = 0;
};

bool is_mac(std::string_view s);

// Parses one 6-field line. Separator is detected per line: tab when the
// line contains one, comma otherwise. Throws MalformedLine on wrong field
// count, bad MAC, non-integer timestamps or lease_end < lease_begin.
AssociationRecord parse_record(std::string_view line);
AssociationRecord parse_record(std::string_view line, char sep);

std::string serialize_record(const AssociationRecord& r, char sep = ',');

// OUI prefix (first 3 MAC bytes) -> device class. Unmapped prefixes are Other.
class OuiMap {
 public:
  static OuiMap load(const std::filesystem::path& file);
  void add(std::string_view prefix, DeviceClass cls);
  DeviceClass classify(std::string_view uuid) const;  // classify_device
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, DeviceClass> entries_;
};

// Leading "b<digits>" token of an AP name. Names without the prefix keep
// AP-level identity under "unknown-bldg:<ap_name>".
std::string building_of(std::string_view ap_name);
// Same with a caller-supplied anchored prefix pattern (ECMAScript regex).
std::string building_of(std::string_view ap_name, const std::string& pattern);
bool has_building_prefix(std::string_view ap_name);

struct DeviceSummary {
  std::string device;
  DeviceClass cls = DeviceClass::Other;
  std::int64_t n_ap = 0;
  std::int64_t n_day = 0;
  std::int64_t n_rec = 0;
};

// Accumulates per-device statistics; shards merge commutatively.
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(std::int64_t tz_offset_s = 0) : tz_offset_s_(tz_offset_s) {}
  void add(const std::string& device, const AssociationRecord& r);
  void merge(const SummaryAccumulator& other);
  std::vector<DeviceSummary> finalize(const OuiMap& oui) const;

 private:
  struct PerDevice {
    std::set<std::string> aps;
    std::set<std::int64_t> days;
    std::int64_t records = 0;
  };
  std::int64_t tz_offset_s_;
  std::map<std::string, PerDevice> devices_;
};

// Keeps devices observed on >= 7 distinct days, on more than 5 distinct APs,
// and classified as Flute or Cello.
std::vector<std::string> filter_population(const std::vector<DeviceSummary>& summaries);

struct TraceStats {
  std::int64_t lines = 0;
  std::int64_t parsed = 0;
  std::int64_t malformed = 0;
  std::int64_t duplicates = 0;
  std::vector<std::string> errors;  // "file:line: reason"
};

struct Trace {
  // Device uuid -> records sorted by (lease_begin, ap_name).
  std::map<std::string, std::vector<AssociationRecord>> by_device;
  TraceStats stats;
};

// Reads trace files ('#' comments ignored), skipping malformed lines and
// deduplicating identical (uuid, ap_name, lease_begin) rows.
Trace load_trace(const std::vector<std::filesystem::path>& files);

void write_summary_csv(std::ostream& os, const std::vector<DeviceSummary>& summaries);

}  // namespace mobipred
