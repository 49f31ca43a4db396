#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vaani {

// Attribute=value set, e.g. {number=plural, case=oblique}. Ordered so that
// formatting is canonical.
using FeatureSet = std::map<std::string, std::string>;

class InvalidFeatures : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses "k=v;k=v". Empty string gives the empty set. A repeated attribute
// with two different values throws InvalidFeatures.
FeatureSet parse_features(std::string_view text);

// Inverse of parse_features with a configurable separator.
std::string format_features(const FeatureSet& f, std::string_view sep = ";");

// Unification: the union of both sets, or nullopt when some attribute is
// assigned two different values. Attributes present on one side only unify
// freely.
std::optional<FeatureSet> unify(const FeatureSet& a, const FeatureSet& b);

// Number of attributes that appear in both sets with the same value.
size_t count_matches(const FeatureSet& a, const FeatureSet& b);

// True when every attribute of `sub` is present in `super` with the same value.
bool subsumes(const FeatureSet& super, const FeatureSet& sub);

}  // namespace vaani
