#ifndef RECURLAB_RADIUS_H_
#define RECURLAB_RADIUS_H_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recurlab/numeric.h"

namespace recurlab {

// r_n = kappa * n^(-gamma)
struct PowerLaw {
  Rational kappa;
  Rational gamma;
};

// r_n = kappa / (n * L(n)^theta), L(n) = log n when log n > 1, else 1.
struct PowerLog {
  Rational kappa;
  Rational theta;
};

// Eventually-always radii r_m = delta(m) * h(delta(m)) / m, clamped at 0.
struct EarRule {
  enum class Delta { kNaturalLog, kLog2Scaled, kConstant };
  enum class H { kConstant, kLog, kLogLog, kIdentity };
  Delta delta = Delta::kLog2Scaled;
  Rational delta_param = 1;  // sigma for kLog2Scaled, value for kConstant
  H h = H::kConstant;
  Rational h_param = 1;      // value for H::kConstant

  Real DeltaAt(long m) const;
  Real HAt(const Real& x) const;
};

struct ExplicitTable {
  std::vector<Rational> values;  // values[0] is r_1
};

struct RadiusValue {
  std::optional<Rational> exact;
  Real value;
};

class RadiusSequence {
 public:
  using Variant = std::variant<PowerLaw, PowerLog, EarRule, ExplicitTable>;

  RadiusSequence() : variant_(PowerLaw{1, 1}) {}
  explicit RadiusSequence(Variant variant);  // validates parameters

  static RadiusSequence Parse(std::string_view text);
  std::string ToString() const;

  const Variant& variant() const { return variant_; }

  RadiusValue Evaluate(long n) const;
  double Approx(long n) const;
  // Exact value where one exists, otherwise the largest dyadic rational
  // with `bits` fractional bits below the high-precision value.
  Rational AsRational(long n, unsigned bits = 64) const;

 private:
  Variant variant_;
};

}  // namespace recurlab

#endif  // RECURLAB_RADIUS_H_
