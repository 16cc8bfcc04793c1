#include "recurlab/numeric.h"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "recurlab/error.h"

namespace recurlab {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kBudgetExceeded: return "budget_exceeded";
    case ErrorCode::kPrecisionExhausted: return "precision_exhausted";
    case ErrorCode::kNonExpanding: return "non_expanding";
    case ErrorCode::kRootOfUnity: return "root_of_unity";
    case ErrorCode::kNotConverged: return "not_converged";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Integer Pow(const Integer& base, unsigned long exponent) {
  Integer result;
  mpz_pow_ui(result.get_mpz_t(), base.get_mpz_t(), exponent);
  return result;
}

Integer Pow(long base, unsigned long exponent) { return Pow(Integer(base), exponent); }

namespace {

std::string Trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

Integer ParseInteger(const std::string& text, std::string_view whole) {
  Integer value;
  std::string digits = text;
  if (!digits.empty() && digits[0] == '+') digits.erase(0, 1);
  if (digits.empty() || value.set_str(digits, 10) != 0) {
    Fail(ErrorCode::kInvalidArgument, "not a number: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational ParseRational(std::string_view text) {
  const std::string s = Trim(text);
  if (s.empty()) Fail(ErrorCode::kInvalidArgument, "empty number");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Integer num = ParseInteger(Trim(s.substr(0, slash)), text);
    Integer den = ParseInteger(Trim(s.substr(slash + 1)), text);
    if (den == 0) Fail(ErrorCode::kInvalidArgument, "zero denominator: '" + s + "'");
    Rational value(num, den);
    value.canonicalize();
    return value;
  }
  // Decimal with optional exponent, converted exactly.
  std::string mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    mantissa = s.substr(0, e);
    try {
      std::size_t used = 0;
      exponent = std::stol(s.substr(e + 1), &used);
      if (used != s.size() - e - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidArgument, "bad exponent in '" + s + "'");
    }
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa.erase(0, 1);
  }
  std::string digits;
  if (auto dot = mantissa.find('.'); dot != std::string::npos) {
    digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
    exponent -= static_cast<long>(mantissa.size() - dot - 1);
  } else {
    digits = mantissa;
  }
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
    Fail(ErrorCode::kInvalidArgument, "not a number: '" + s + "'");
  }
  Rational value(Integer(digits, 10));
  if (exponent >= 0) {
    value *= Rational(Pow(10L, static_cast<unsigned long>(exponent)));
  } else {
    value /= Rational(Pow(10L, static_cast<unsigned long>(-exponent)));
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

std::string ToString(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string ToString(const Integer& value) { return value.get_str(); }

double ToDouble(const Rational& value) { return value.get_d(); }

Real ToReal(const Integer& value) { return Real(value.get_mpz_t()); }

Real ToReal(const Rational& value) {
  return Real(value.get_num_mpz_t()) / Real(value.get_den_mpz_t());
}

std::string ToDecimal(const Real& value, int digits) {
  std::ostringstream out;
  out.precision(digits);
  out << value;
  return out.str();
}

Rational FloorDyadic(const Real& value, unsigned bits) {
  Require(value >= 0, "FloorDyadic expects a non-negative value");
  Real scaled = boost::multiprecision::floor(boost::multiprecision::ldexp(value, static_cast<int>(bits)));
  Integer numerator;
  mpfr_get_z(numerator.get_mpz_t(), scaled.backend().data(), MPFR_RNDD);
  Rational result(numerator, Pow(2L, bits));
  result.canonicalize();
  return result;
}

Integer FloorDiv(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Integer Mod(const Integer& a, const Integer& m) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  if (r < 0) r += abs(m);
  return r;
}

Rational Floor(const Rational& value) { return Rational(FloorDiv(value.get_num(), value.get_den())); }

Rational Frac(const Rational& value) { return value - Floor(value); }

Rational Abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

// ---------------------------------------------------------------------------

QuadraticSurd::QuadraticSurd(Integer a, Integer b, Integer c, Integer d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  Require(c_ != 0, "quadratic surd with zero denominator");
  Require(d_ >= 0, "quadratic surd with negative radicand");
  if (c_ < 0) {
    a_ = -a_;
    b_ = -b_;
    c_ = -c_;
  }
  if (mpz_perfect_square_p(d_.get_mpz_t())) {
    Integer root = sqrt(d_);
    a_ += b_ * root;
    b_ = 0;
    d_ = 0;
  }
  if (b_ == 0) d_ = 0;
  Integer g = gcd(gcd(a_, b_), c_);
  if (g > 1) {
    a_ /= g;
    b_ /= g;
    c_ /= g;
  }
}

QuadraticSurd QuadraticSurd::FromRational(const Rational& value) {
  return QuadraticSurd(value.get_num(), 0, value.get_den(), 0);
}

QuadraticSurd QuadraticSurd::GoldenRatio() { return QuadraticSurd(1, 1, 2, 5); }

QuadraticSurd QuadraticSurd::Parse(std::string_view text) {
  const std::string s = Trim(text);
  if (s == "golden" || s == "phi") return GoldenRatio();
  if (s == "golden-conjugate") return QuadraticSurd(-1, 1, 2, 5);  // 1/phi
  if (s.rfind("sqrt:", 0) == 0) {
    Rational d = ParseRational(s.substr(5));
    // sqrt(p/q) = sqrt(p*q)/q
    return QuadraticSurd(0, 1, d.get_den(), d.get_num() * d.get_den());
  }
  if (s.rfind("surd:", 0) == 0) {
    std::stringstream parts(s.substr(5));
    std::string field;
    Integer v[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(parts, field, ',')) {
        Fail(ErrorCode::kInvalidArgument, "surd needs a,b,c,d: '" + s + "'");
      }
      v[i] = ParseInteger(Trim(field), text);
    }
    return QuadraticSurd(v[0], v[1], v[2], v[3]);
  }
  return FromRational(ParseRational(s));
}

Integer QuadraticSurd::FloorScaled(unsigned bits) const {
  Integer scale = Pow(2L, bits);
  Integer whole = a_ * scale;
  if (b_ != 0) {
    Integer radicand = b_ * b_ * d_ * scale * scale;
    Integer root = sqrt(radicand);  // floor; radicand is never a square here
    whole += b_ > 0 ? root : Integer(-root - 1);
  }
  return FloorDiv(whole, c_);
}

Real QuadraticSurd::ToReal() const {
  Real value = recurlab::ToReal(a_);
  if (b_ != 0) value += recurlab::ToReal(b_) * boost::multiprecision::sqrt(recurlab::ToReal(d_));
  return value / recurlab::ToReal(c_);
}

double QuadraticSurd::ToDouble() const { return static_cast<double>(ToReal()); }

bool QuadraticSurd::IsRational() const { return b_ == 0; }

Rational QuadraticSurd::AsRational() const {
  Require(IsRational(), "quadratic surd is irrational");
  Rational value(a_, c_);
  value.canonicalize();
  return value;
}

std::string QuadraticSurd::ToString() const {
  if (IsRational()) return recurlab::ToString(AsRational());
  return "surd:" + a_.get_str() + "," + b_.get_str() + "," + c_.get_str() + "," + d_.get_str();
}

}  // namespace recurlab
