#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace surveil {

/// Level value used when a record lacks the attribute for a level.
/// Keeping these records in a residual child preserves additivity of the
/// parent's measures.
inline constexpr const char* kUnclassified = "(unclassified)";

/// Dimension names with builtin record fields; everything else resolves
/// through ClaimRecord::attributes.
inline constexpr const char* kDimCondition = "condition";
inline constexpr const char* kDimClaimType = "claim_type";

struct Qualification {
  double min_member_months = 0.0;
  double min_cost_share = 0.0;
};

/// A drill path: the ordered dimensions along which claims are rolled up.
struct ViewpointSpec {
  std::string name;
  std::vector<std::string> levels;
  Qualification qualification;

  void validate() const {
    if (name.empty()) throw std::invalid_argument("viewpoint spec requires a name");
    if (levels.empty())
      throw std::invalid_argument("viewpoint spec '" + name + "' has no levels");
    std::set<std::string> seen;
    for (const auto& dim : levels) {
      if (dim.empty())
        throw std::invalid_argument("viewpoint spec '" + name + "' has an empty level name");
      if (!seen.insert(dim).second)
        throw std::invalid_argument("viewpoint spec '" + name + "' repeats level '" + dim + "'");
    }
    if (!std::isfinite(qualification.min_member_months) ||
        !std::isfinite(qualification.min_cost_share))
      throw std::invalid_argument("viewpoint spec '" + name + "' has non-finite thresholds");
  }
};

/// A concrete node on a drill path: a prefix of the spec's levels with values.
/// The empty prefix (path.size() == 0) is the spec's root and aggregates
/// every record the spec sees.
struct ViewpointKey {
  std::string spec_name;
  std::vector<std::pair<std::string, std::string>> path;  // (dimension, code)

  auto operator<=>(const ViewpointKey&) const = default;
  bool operator==(const ViewpointKey&) const = default;

  std::size_t depth() const { return path.size(); }

  const std::string* level(const std::string& dim) const {
    for (const auto& [d, code] : path)
      if (d == dim) return &code;
    return nullptr;
  }

  /// Prefix of this key ending at the condition level, when present.
  std::optional<ViewpointKey> conditionPrefix() const {
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (path[i].first == kDimCondition) {
        ViewpointKey p{spec_name, {path.begin(), path.begin() + static_cast<long>(i) + 1}};
        return p;
      }
    }
    return std::nullopt;
  }

  std::string display() const {
    if (path.empty()) return spec_name + ":/";
    std::string out = spec_name + ":";
    for (const auto& [dim, code] : path) {
      out += "/";
      out += code;
    }
    return out;
  }
};

}  // namespace surveil
