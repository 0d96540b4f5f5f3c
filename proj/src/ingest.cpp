#include "mobipred/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>
#include <regex>
#include <unordered_set>

namespace mobipred {

namespace {

bool is_hex(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

std::int64_t parse_ts(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw MalformedLine("non-integer timestamp: " + std::string(s));
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

bool is_mac(std::string_view s) {
  if (s.size() != 17) return false;
  for (std::size_t i = 0; i < 17; ++i) {
    if (i % 3 == 2) {
      if (s[i] != ':') return false;
    } else if (!is_hex(s[i])) {
      return false;
    }
  }
  return true;
}

AssociationRecord parse_record(std::string_view line) {
  char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
  return parse_record(line, sep);
}

AssociationRecord parse_record(std::string_view line, char sep) {
  auto fields = split(line, sep);
  if (fields.size() != 6)
    throw MalformedLine("expected 6 fields, got " + std::to_string(fields.size()));
  AssociationRecord r;
  r.user_ip = std::string(fields[0]);
  r.uuid = std::string(fields[1]);
  r.ap_name = std::string(fields[2]);
  r.ap_mac = std::string(fields[3]);
  if (!is_mac(r.uuid)) throw MalformedLine("bad device MAC: " + r.uuid);
  if (!is_mac(r.ap_mac)) throw MalformedLine("bad AP MAC: " + r.ap_mac);
  if (r.ap_name.empty()) throw MalformedLine("empty AP name");
  r.lease_begin = parse_ts(fields[4]);
  r.lease_end = parse_ts(fields[5]);
  if (r.lease_end < r.lease_begin)
    throw MalformedLine("lease_end precedes lease_begin");
  return r;
}

std::string serialize_record(const AssociationRecord& r, char sep) {
  std::string out;
  out += r.user_ip;
  out += sep;
  out += r.uuid;
  out += sep;
  out += r.ap_name;
  out += sep;
  out += r.ap_mac;
  out += sep;
  out += std::to_string(r.lease_begin);
  out += sep;
  out += std::to_string(r.lease_end);
  return out;
}

OuiMap OuiMap::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoFailure("cannot open OUI map: " + file.string());
  OuiMap map;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw MalformedLine("OUI map needs 'prefix,class'", line_no);
    std::string prefix = line.substr(0, comma);
    auto cls = device_class_from(line.substr(comma + 1));
    if (!cls) throw MalformedLine("unknown device class: " + line.substr(comma + 1), line_no);
    map.add(prefix, *cls);
  }
  return map;
}

void OuiMap::add(std::string_view prefix, DeviceClass cls) {
  if (prefix.size() != 8 || prefix[2] != ':' || prefix[5] != ':')
    throw MalformedLine("OUI prefix must be xx:xx:xx: " + std::string(prefix));
  entries_[lower(prefix)] = cls;
}

DeviceClass OuiMap::classify(std::string_view uuid) const {
  if (uuid.size() < 8) return DeviceClass::Other;
  auto it = entries_.find(lower(uuid.substr(0, 8)));
  return it == entries_.end() ? DeviceClass::Other : it->second;
}

bool has_building_prefix(std::string_view ap_name) {
  if (ap_name.size() < 2 || ap_name[0] != 'b') return false;
  return std::isdigit(static_cast<unsigned char>(ap_name[1])) != 0;
}

std::string building_of(std::string_view ap_name) {
  if (ap_name.empty()) throw DataError("empty AP name");
  if (!has_building_prefix(ap_name))
    return "unknown-bldg:" + std::string(ap_name);
  std::size_t i = 1;
  while (i < ap_name.size() && std::isdigit(static_cast<unsigned char>(ap_name[i]))) ++i;
  return std::string(ap_name.substr(0, i));
}

std::string building_of(std::string_view ap_name, const std::string& pattern) {
  if (ap_name.empty()) throw DataError("empty AP name");
  std::regex re("^(" + pattern + ")");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(ap_name.begin(), ap_name.end(), m, re))
    return m[1].str();
  return "unknown-bldg:" + std::string(ap_name);
}

void SummaryAccumulator::add(const std::string& device, const AssociationRecord& r) {
  PerDevice& d = devices_[device];
  d.aps.insert(r.ap_name);
  // floor division keeps pre-epoch timestamps on the right day
  std::int64_t t = r.lease_begin + tz_offset_s_;
  std::int64_t day = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  d.days.insert(day);
  d.records += 1;
}

void SummaryAccumulator::merge(const SummaryAccumulator& other) {
  for (const auto& [device, pd] : other.devices_) {
    PerDevice& d = devices_[device];
    d.aps.insert(pd.aps.begin(), pd.aps.end());
    d.days.insert(pd.days.begin(), pd.days.end());
    d.records += pd.records;
  }
}

std::vector<DeviceSummary> SummaryAccumulator::finalize(const OuiMap& oui) const {
  std::vector<DeviceSummary> out;
  out.reserve(devices_.size());
  for (const auto& [device, pd] : devices_) {
    DeviceSummary s;
    s.device = device;
    s.cls = oui.classify(device);
    s.n_ap = static_cast<std::int64_t>(pd.aps.size());
    s.n_day = static_cast<std::int64_t>(pd.days.size());
    s.n_rec = pd.records;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> filter_population(const std::vector<DeviceSummary>& summaries) {
  std::vector<std::string> kept;
  for (const auto& s : summaries) {
    if (s.n_day >= 7 && s.n_ap > 5 &&
        (s.cls == DeviceClass::Flute || s.cls == DeviceClass::Cello)) {
      kept.push_back(s.device);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

Trace load_trace(const std::vector<std::filesystem::path>& files) {
  Trace trace;
  std::unordered_set<std::string> seen;  // uuid|ap|begin
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw IoFailure("cannot open trace file: " + file.string());
    std::string line;
    long line_no = 0;
    char sep = 0;  // fixed per file from the first valid line
    while (std::getline(in, line)) {
      ++line_no;
      ++trace.stats.lines;
      if (line.empty() || line[0] == '#') continue;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      try {
        AssociationRecord r = sep ? parse_record(line, sep) : parse_record(line);
        if (!sep) sep = line.find('\t') != std::string::npos ? '\t' : ',';
        std::string key = r.uuid + '|' + r.ap_name + '|' + std::to_string(r.lease_begin);
        if (!seen.insert(key).second) {
          ++trace.stats.duplicates;
          continue;
        }
        trace.by_device[r.uuid].push_back(std::move(r));
        ++trace.stats.parsed;
      } catch (const MalformedLine& e) {
        ++trace.stats.malformed;
        trace.stats.errors.push_back(file.filename().string() + ":" +
                                     std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  for (auto& [uuid, records] : trace.by_device) {
    std::sort(records.begin(), records.end(),
              [](const AssociationRecord& a, const AssociationRecord& b) {
                if (a.lease_begin != b.lease_begin) return a.lease_begin < b.lease_begin;
                return a.ap_name < b.ap_name;
              });
  }
  return trace;
}

void write_summary_csv(std::ostream& os, const std::vector<DeviceSummary>& summaries) {
  os << "device,class,n_ap,n_day,n_rec\n";
  for (const auto& s : summaries) {
    os << s.device << ',' << to_string(s.cls) << ',' << s.n_ap << ',' << s.n_day
       << ',' << s.n_rec << '\n';
  }
}

}  // namespace mobipred
