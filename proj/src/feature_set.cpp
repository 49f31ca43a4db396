#include "vaani/feature_set.hpp"

#include "vaani/text.hpp"

namespace vaani {

FeatureSet parse_features(std::string_view text) {
  FeatureSet out;
  std::string t = trim(text);
  if (t.empty()) return out;
  for (const auto& part : split_char(t, ';')) {
    std::string kv = trim(part);
    if (kv.empty()) continue;
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
      throw InvalidFeatures("malformed feature '" + kv + "'");
    std::string key = trim(kv.substr(0, eq));
    std::string val = trim(kv.substr(eq + 1));
    auto [it, inserted] = out.emplace(key, val);
    if (!inserted && it->second != val)
      throw InvalidFeatures("conflicting values for '" + key + "': " + it->second + " vs " + val);
  }
  return out;
}

std::string format_features(const FeatureSet& f, std::string_view sep) {
  std::string out;
  for (const auto& [k, v] : f) {
    if (!out.empty()) out += sep;
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::optional<FeatureSet> unify(const FeatureSet& a, const FeatureSet& b) {
  FeatureSet out = a;
  for (const auto& [k, v] : b) {
    auto [it, inserted] = out.emplace(k, v);
    if (!inserted && it->second != v) return std::nullopt;
  }
  return out;
}

size_t count_matches(const FeatureSet& a, const FeatureSet& b) {
  size_t n = 0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it != b.end() && it->second == v) ++n;
  }
  return n;
}

bool subsumes(const FeatureSet& super, const FeatureSet& sub) {
  for (const auto& [k, v] : sub) {
    auto it = super.find(k);
    if (it == super.end() || it->second != v) return false;
  }
  return true;
}

}  // namespace vaani
