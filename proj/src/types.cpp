#include "mobipred/types.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace mobipred {

const char* to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::Flute: return "flute";
    case DeviceClass::Cello: return "cello";
    case DeviceClass::Other: return "other";
  }
  return "other";
}

std::optional<DeviceClass> device_class_from(std::string_view s) {
  if (s == "flute") return DeviceClass::Flute;
  if (s == "cello") return DeviceClass::Cello;
  if (s == "other") return DeviceClass::Other;
  return std::nullopt;
}

const char* to_string(SpatialResolution s) {
  return s == SpatialResolution::AccessPoint ? "ap" : "building";
}

std::optional<SpatialResolution> spatial_from(std::string_view s) {
  if (s == "ap") return SpatialResolution::AccessPoint;
  if (s == "building") return SpatialResolution::Building;
  return std::nullopt;
}

LocationAlphabet::LocationAlphabet() {
  names_.emplace_back(kUnknownName);
}

Symbol LocationAlphabet::intern(std::string_view name) {
  if (name.empty()) throw DataError("cannot intern empty location name");
  if (name == kUnknownName) throw DataError("'?' is reserved for the Unknown marker");
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  Symbol id = static_cast<Symbol>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<Symbol> LocationAlphabet::find(std::string_view name) const {
  if (name == kUnknownName) return kUnknown;
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& LocationAlphabet::name(Symbol id) const {
  return names_.at(static_cast<std::size_t>(id));
}

void DiscreteSeries::write(std::ostream& os) const {
  os << device << ',' << to_string(cls) << ',' << to_string(spatial) << ','
     << window_s << ',' << start_time << '\n';
  for (Symbol s : symbols) os << alphabet.name(s) << '\n';
}

DiscreteSeries DiscreteSeries::read(std::istream& is) {
  DiscreteSeries out;
  std::string header;
  if (!std::getline(is, header)) throw MalformedLine("empty series stream");
  std::stringstream hs(header);
  std::string cls_s, spatial_s, window_s_s, start_s;
  if (!std::getline(hs, out.device, ',') || !std::getline(hs, cls_s, ',') ||
      !std::getline(hs, spatial_s, ',') || !std::getline(hs, window_s_s, ',') ||
      !std::getline(hs, start_s)) {
    throw MalformedLine("bad series header: " + header);
  }
  auto cls = device_class_from(cls_s);
  auto spatial = spatial_from(spatial_s);
  if (!cls || !spatial) throw MalformedLine("bad series header: " + header);
  out.cls = *cls;
  out.spatial = *spatial;
  try {
    out.window_s = std::stoll(window_s_s);
    out.start_time = std::stoll(start_s);
  } catch (const std::exception&) {
    throw MalformedLine("bad series header: " + header);
  }
  if (out.window_s <= 0) throw MalformedLine("series window must be positive");
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) break;
    if (line == kUnknownName) {
      out.symbols.push_back(kUnknown);
    } else {
      out.symbols.push_back(out.alphabet.intern(line));
    }
  }
  return out;
}

std::size_t DiscreteSeries::distinct_known() const {
  std::unordered_set<Symbol> seen;
  for (Symbol s : symbols)
    if (s != kUnknown) seen.insert(s);
  return seen.size();
}

}  // namespace mobipred
