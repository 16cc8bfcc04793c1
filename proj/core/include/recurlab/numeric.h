#ifndef RECURLAB_NUMERIC_H_
#define RECURLAB_NUMERIC_H_

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>
#include <cstdint>
#include <string>
#include <string_view>

namespace recurlab {

using Integer = mpz_class;
using Rational = mpq_class;
// ~333 bits of mantissa; fixed so values are thread-safe and reproducible.
using Real = boost::multiprecision::mpfr_float_100;

Integer Pow(const Integer& base, unsigned long exponent);
Integer Pow(long base, unsigned long exponent);

// Accepts "p/q", "-p/q", integers and finite decimals ("0.125", "-3.5e-2").
Rational ParseRational(std::string_view text);
std::string ToString(const Rational& value);
std::string ToString(const Integer& value);

double ToDouble(const Rational& value);
Real ToReal(const Rational& value);
Real ToReal(const Integer& value);
std::string ToDecimal(const Real& value, int digits = 30);

// Largest dyadic rational k / 2^bits not exceeding value (value >= 0).
Rational FloorDyadic(const Real& value, unsigned bits);

Integer FloorDiv(const Integer& a, const Integer& b);
// Least non-negative residue of a mod m (m > 0).
Integer Mod(const Integer& a, const Integer& m);

Rational Floor(const Rational& value);
Rational Frac(const Rational& value);  // value - floor(value), in [0, 1)
Rational Abs(const Rational& value);

// Real number of the form (a + b*sqrt(d)) / c with integer a, b, c, d and
// c > 0, d >= 0. Covers rationals, the golden ratio and other quadratic
// surds; every fixed-point truncation is computed exactly.
class QuadraticSurd {
 public:
  QuadraticSurd() = default;
  QuadraticSurd(Integer a, Integer b, Integer c, Integer d);
  static QuadraticSurd FromRational(const Rational& value);
  static QuadraticSurd GoldenRatio();

  // "golden", "golden-conjugate", "sqrt:2", "surd:a,b,c,d" or a rational.
  static QuadraticSurd Parse(std::string_view text);

  // floor(value * 2^bits), exact.
  Integer FloorScaled(unsigned bits) const;
  Real ToReal() const;
  double ToDouble() const;
  bool IsRational() const;
  Rational AsRational() const;  // requires IsRational()
  std::string ToString() const;

  bool operator==(const QuadraticSurd&) const = default;

 private:
  Integer a_ = 0, b_ = 0, c_ = 1, d_ = 0;
};

}  // namespace recurlab

#endif  // RECURLAB_NUMERIC_H_
