#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace surveil {

/// Error in user-supplied inputs (files, configs, record contents).
/// The CLI maps this to exit status 2; anything else that escapes a
/// pipeline stage maps to 3.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ClaimType { pharmacy, inpatient, outpatient };

inline const char* toString(ClaimType t) {
  switch (t) {
    case ClaimType::pharmacy: return "pharmacy";
    case ClaimType::inpatient: return "inpatient";
    case ClaimType::outpatient: return "outpatient";
  }
  return "?";
}

inline ClaimType claimTypeFromString(const std::string& s) {
  if (s == "pharmacy") return ClaimType::pharmacy;
  if (s == "inpatient") return ClaimType::inpatient;
  if (s == "outpatient") return ClaimType::outpatient;
  throw InputError("unknown claim_type: '" + s + "'");
}

/// Inclusive period range [start, end].
struct PeriodRange {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool contains(int t) const { return t >= start && t <= end; }
};

/// One atomic claim event. `attributes` holds the non-builtin dimensions
/// (therapeutic_class, product_name, ...) in column order; empty condition
/// or episode_id means absent.
struct ClaimRecord {
  std::string enrollee_id;
  int period = 0;
  ClaimType claim_type = ClaimType::pharmacy;
  std::string condition;   // empty = absent
  std::string episode_id;  // empty = absent
  std::vector<std::pair<std::string, std::string>> attributes;
  double quantity = 0.0;  // days of supply for pharmacy, service units otherwise
  double cost = 0.0;      // allowed amount

  const std::string* attribute(const std::string& dim) const {
    for (const auto& [name, code] : attributes)
      if (name == dim) return &code;
    return nullptr;
  }
};

/// Exposure denominator row; member_months is 1 for a fully enrolled month.
struct EnrollmentRecord {
  std::string enrollee_id;
  int period = 0;
  double member_months = 1.0;
};

}  // namespace surveil
