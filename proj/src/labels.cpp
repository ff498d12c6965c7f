#include "treemil/labels.hpp"

#include <algorithm>

namespace treemil {

Veracity parse_veracity(const std::string& s) {
  if (s == "N") return Veracity::N;
  if (s == "T") return Veracity::T;
  if (s == "F") return Veracity::F;
  if (s == "U") return Veracity::U;
  throw ContractError("unknown veracity label: '" + s + "'");
}

Stance parse_stance(const std::string& s) {
  if (s == "S") return Stance::S;
  if (s == "D") return Stance::D;
  if (s == "Q") return Stance::Q;
  if (s == "C") return Stance::C;
  throw ContractError("unknown stance label: '" + s + "'");
}

VeracitySet VeracitySet::parse(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ntfu" || lower == "4") return ntfu();
  if (lower == "tfu" || lower == "3") return tfu();
  throw ConfigError("unknown veracity set: '" + name + "' (expected ntfu or tfu)");
}

bool VeracitySet::contains(Veracity v) const {
  return std::find(classes.begin(), classes.end(), v) != classes.end();
}

std::size_t VeracitySet::index_of(Veracity v) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == v) return i;
  }
  throw ContractError(std::string("veracity ") + veracity_char(v) + " not in class set " +
                      name());
}

std::string VeracitySet::name() const {
  std::string out;
  for (Veracity v : classes) out += veracity_char(v);
  return out;
}

}  // namespace treemil
