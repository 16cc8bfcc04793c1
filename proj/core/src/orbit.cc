#include "recurlab/orbit.h"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "recurlab/circle.h"
#include "recurlab/error.h"
#include "recurlab/random.h"

namespace recurlab {

namespace mp = boost::multiprecision;

namespace {

double FixedToDouble(const Integer& value, unsigned precision) {
  if (value == 0) return 0.0;
  long exponent = 0;
  double mantissa = mpz_get_d_2exp(&exponent, value.get_mpz_t());
  return std::ldexp(mantissa, static_cast<int>(exponent - static_cast<long>(precision)));
}

Integer TwoPow(unsigned bits) {
  Integer value;
  mpz_ui_pow_ui(value.get_mpz_t(), 2, bits);
  return value;
}

// log2(2^a + 2^b), stable for large arguments.
double Log2Add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

// Error after one affine step, in ulps: |slope| * e + rounding.
double StepError(double error_log2, double slope_log2, double rounding_ulps) {
  return Log2Add(error_log2 + slope_log2, std::log2(rounding_ulps));
}

Real FixedToReal(const Integer& value, unsigned precision) {
  return ToReal(value) / mp::pow(Real(2), precision);
}

Rational StepExactCoordinate(const SystemSpec& system, const Rational& x) {
  return std::visit(
      [&x](const auto& v) -> Rational {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IntegerCircleMap>) {
          return Frac(Rational(v.a) * x);
        } else if constexpr (std::is_same_v<T, BetaMap>) {
          return Frac(v.beta.AsRational() * x);
        } else if constexpr (std::is_same_v<T, Rotation>) {
          return Frac(x + v.alpha.AsRational());
        } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
          const auto& branches = v.branches;
          const ExactBranch* chosen = &branches.back();
          for (const auto& b : branches) {
            if (x >= b.left && x < b.right) {
              chosen = &b;
              break;
            }
          }
          Rational y = chosen->slope * x + chosen->intercept;
          y.canonicalize();
          return y;
        } else {
          Fail(ErrorCode::kInvalidArgument, "toral maps step all coordinates together");
        }
      },
      system.variant());
}

bool SupportsExact(const SystemSpec& system) {
  if (auto* beta = std::get_if<BetaMap>(&system.variant())) return beta->beta.IsRational();
  if (auto* rot = std::get_if<Rotation>(&system.variant())) return rot->alpha.IsRational();
  return true;
}

std::vector<Rational> StepExact(const SystemSpec& system, const std::vector<Rational>& x) {
  if (auto* toral = std::get_if<ToralLinear>(&system.variant())) {
    const int d = toral->dimension;
    std::vector<Rational> y(d);
    for (int r = 0; r < d; ++r) {
      Rational sum = 0;
      for (int c = 0; c < d; ++c) sum += Rational(toral->at(r, c)) * x[c];
      y[r] = Frac(sum);
    }
    return y;
  }
  return {StepExactCoordinate(system, x[0])};
}

// --------------------------------------------------------------------------
// Exact rational orbits.

class ExactCursor final : public OrbitCursor {
 public:
  ExactCursor(SystemSpec system, std::vector<Rational> start)
      : system_(std::move(system)), start_(std::move(start)), current_(start_) {}

  double Next() override {
    current_ = StepExact(system_, current_);
    ++step_;
    const OrbitPoint a = OrbitPoint::Exact(current_), b = OrbitPoint::Exact(start_);
    last_ = ExactDistance(system_, a, b);
    if (last_) return last_->get_d();
    return static_cast<double>(Distance(system_, a, b));
  }

  std::optional<Rational> LastExactDistance() const override { return last_; }
  double Coordinate() const override { return current_[0].get_d(); }
  OrbitPoint Current() const override { return OrbitPoint::Exact(current_); }

 private:
  SystemSpec system_;
  std::vector<Rational> start_;
  std::vector<Rational> current_;
  std::optional<Rational> last_;
};

// --------------------------------------------------------------------------
// T x = 2^s x mod 1 as a shift of the binary expansion. Bits come either
// from a fixed dyadic point (zeros beyond its precision) or lazily from a
// random stream, which makes the orbit of a random real exact to 2^-64 at
// any horizon.

class ShiftCursor final : public OrbitCursor {
 public:
  ShiftCursor(int shift, const Integer& bits, unsigned precision)
      : shift_(shift), bits_(bits), precision_(precision) {
    const unsigned words = (precision + 63) / 64;
    Integer padded = bits << (words * 64 - precision);
    words_.assign(words, 0);
    for (unsigned i = 0; i < words; ++i) {
      Integer word = padded >> (64 * (words - 1 - i));
      mpz_class low;
      mpz_fdiv_r_2exp(low.get_mpz_t(), word.get_mpz_t(), 64);
      words_[i] = LowWord(low);
    }
    start_window_ = Window(0);
  }

  ShiftCursor(int shift, RandomStream stream) : shift_(shift), stream_(std::move(stream)) {
    start_window_ = Window(0);
  }

  double Next() override {
    ++step_;
    current_window_ = Window(static_cast<std::uint64_t>(step_) * shift_);
    std::uint64_t delta = current_window_ - start_window_;
    std::uint64_t dist = std::min<std::uint64_t>(delta, 0 - delta);
    return std::ldexp(static_cast<double>(dist), -64);
  }

  double Coordinate() const override {
    return std::ldexp(static_cast<double>(step_ == 0 ? start_window_ : current_window_), -64);
  }

  OrbitPoint Current() const override {
    const std::uint64_t offset = static_cast<std::uint64_t>(step_) * shift_;
    if (!stream_) {
      Integer shifted = bits_ << offset;
      mpz_fdiv_r_2exp(shifted.get_mpz_t(), shifted.get_mpz_t(), precision_);
      return OrbitPoint::Fixed(shifted, precision_);
    }
    Integer hi(static_cast<unsigned long>(Window(offset)));
    Integer lo(static_cast<unsigned long>(Window(offset + 64)));
    OrbitPoint point = OrbitPoint::Fixed((hi << 64) + lo, 128);
    point.error_ulps_log2 = 0.0;  // truncated random tail
    return point;
  }

 private:
  static std::uint64_t LowWord(const mpz_class& value) {
    std::uint64_t word = 0;
    std::size_t count = 0;
    mpz_export(&word, &count, -1, sizeof(word), 0, 0, value.get_mpz_t());
    return word;
  }

  std::uint64_t Word(std::size_t index) const {
    if (stream_) {
      while (words_.size() <= index) words_.push_back(stream_->NextU64());
      return words_[index];
    }
    return index < words_.size() ? words_[index] : 0;
  }

  std::uint64_t Window(std::uint64_t bit_offset) const {
    const std::size_t index = bit_offset / 64;
    const unsigned within = bit_offset % 64;
    if (within == 0) return Word(index);
    return (Word(index) << within) | (Word(index + 1) >> (64 - within));
  }

  int shift_;
  Integer bits_;
  unsigned precision_ = 0;
  mutable std::optional<RandomStream> stream_;
  mutable std::vector<std::uint64_t> words_;
  std::uint64_t start_window_ = 0;
  std::uint64_t current_window_ = 0;
};

// --------------------------------------------------------------------------
// Integer matrix maps (circle maps are the 1x1 case) on fixed-point
// coordinates: X <- A X mod 2^P, error-free.

class ModularCursor final : public OrbitCursor {
 public:
  ModularCursor(int dimension, std::vector<long> matrix, std::vector<Integer> start, unsigned precision)
      : dimension_(dimension),
        matrix_(std::move(matrix)),
        start_(std::move(start)),
        current_(start_),
        scratch_(dimension),
        precision_(precision),
        modulus_(TwoPow(precision)) {}

  double Next() override {
    ++step_;
    for (int r = 0; r < dimension_; ++r) {
      scratch_[r] = 0;
      for (int c = 0; c < dimension_; ++c) {
        const long coefficient = matrix_[r * dimension_ + c];
        if (coefficient >= 0) {
          mpz_addmul_ui(scratch_[r].get_mpz_t(), current_[c].get_mpz_t(), coefficient);
        } else {
          mpz_submul_ui(scratch_[r].get_mpz_t(), current_[c].get_mpz_t(), -coefficient);
        }
      }
    }
    double squared = 0;
    for (int r = 0; r < dimension_; ++r) {
      mpz_fdiv_r_2exp(current_[r].get_mpz_t(), scratch_[r].get_mpz_t(), precision_);
      mpz_sub(diff_.get_mpz_t(), current_[r].get_mpz_t(), start_[r].get_mpz_t());
      mpz_fdiv_r_2exp(diff_.get_mpz_t(), diff_.get_mpz_t(), precision_);
      if (diff_ * 2 > modulus_) diff_ = modulus_ - diff_;
      double d = FixedToDouble(diff_, precision_);
      squared += d * d;
    }
    return std::sqrt(squared);
  }

  double Coordinate() const override { return FixedToDouble(current_[0], precision_); }
  OrbitPoint Current() const override { return OrbitPoint::Fixed(current_, precision_); }

 private:
  int dimension_;
  std::vector<long> matrix_;
  std::vector<Integer> start_;
  std::vector<Integer> current_;
  std::vector<Integer> scratch_;
  Integer diff_;
  unsigned precision_;
  Integer modulus_;
};

// --------------------------------------------------------------------------
// Rotation by a fixed-point approximation of alpha; one ulp of error per step.

class RotationCursor final : public OrbitCursor {
 public:
  RotationCursor(const QuadraticSurd& alpha, Integer start, unsigned precision, double error_log2)
      : start_(start), current_(std::move(start)), precision_(precision), modulus_(TwoPow(precision)),
        error_log2_(error_log2) {
    mpz_fdiv_r_2exp(step_bits_.get_mpz_t(), alpha.FloorScaled(precision).get_mpz_t(), precision);
  }

  double Next() override {
    ++step_;
    current_ += step_bits_;
    if (current_ >= modulus_) current_ -= modulus_;
    error_log2_ = Log2Add(error_log2_, 0.0);
    Integer diff = current_ - start_;
    if (diff < 0) diff += modulus_;
    if (diff * 2 > modulus_) diff = modulus_ - diff;
    return FixedToDouble(diff, precision_);
  }

  double Coordinate() const override { return FixedToDouble(current_, precision_); }
  OrbitPoint Current() const override {
    OrbitPoint point = OrbitPoint::Fixed(current_, precision_);
    point.error_ulps_log2 = error_log2_;
    return point;
  }

 private:
  Integer start_;
  Integer current_;
  Integer step_bits_;
  unsigned precision_;
  Integer modulus_;
  double error_log2_;
};

[[noreturn]] void AmbiguousBranch(long step, unsigned precision) {
  Fail(ErrorCode::kPrecisionExhausted,
       "orbit came within its error bound of a discontinuity at step " + std::to_string(step) +
           " (precision " + std::to_string(precision) + " bits); rerun with more precision bits");
}

// Ulps are compared through bit lengths so that error bounds beyond double
// range still work.
bool WithinUlps(const Integer& distance, double error_log2) {
  if (error_log2 == -INFINITY) return false;
  const double bits = std::ceil(std::max(error_log2, 0.0)) + 1;
  return static_cast<double>(mpz_sizeinbase(distance.get_mpz_t(), 2)) <= bits;
}

// T x = beta x mod 1 for irrational beta: Y = B X with B = floor(beta 2^P).

class BetaCursor final : public OrbitCursor {
 public:
  BetaCursor(const QuadraticSurd& beta, Integer start, unsigned precision, double error_log2)
      : beta_bits_(beta.FloorScaled(precision)),
        beta_log2_(std::log2(beta.ToDouble())),
        start_(start),
        current_(std::move(start)),
        precision_(precision),
        modulus_(TwoPow(precision)),
        error_log2_(error_log2) {}

  double Next() override {
    ++step_;
    mpz_mul(product_.get_mpz_t(), beta_bits_.get_mpz_t(), current_.get_mpz_t());
    mpz_fdiv_q_2exp(product_.get_mpz_t(), product_.get_mpz_t(), precision_);
    mpz_fdiv_r_2exp(current_.get_mpz_t(), product_.get_mpz_t(), precision_);
    // beta truncation (< x ulp) plus the floor above.
    error_log2_ = StepError(error_log2_, beta_log2_, 2.0);
    if (WithinUlps(current_, error_log2_) || WithinUlps(modulus_ - current_, error_log2_)) {
      AmbiguousBranch(step_, precision_);
    }
    Integer diff = abs(current_ - start_);
    return FixedToDouble(diff, precision_);
  }

  double Coordinate() const override { return FixedToDouble(current_, precision_); }
  OrbitPoint Current() const override {
    OrbitPoint point = OrbitPoint::Fixed(current_, precision_);
    point.error_ulps_log2 = error_log2_;
    return point;
  }

 private:
  Integer beta_bits_;
  double beta_log2_;
  Integer start_;
  Integer current_;
  Integer product_;
  unsigned precision_;
  Integer modulus_;
  double error_log2_;
};

// Rational affine branches on fixed-point values.

class AffineCursor final : public OrbitCursor {
 public:
  AffineCursor(const std::vector<ExactBranch>& branches, Integer start, unsigned precision,
               double error_log2)
      : start_(start), current_(std::move(start)), precision_(precision), modulus_(TwoPow(precision)),
        error_log2_(error_log2) {
    const Rational scale(modulus_);
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const ExactBranch& b = branches[i];
      Fixed f;
      Rational left = b.left * scale;
      f.left_ceil = left.get_num() / left.get_den();
      if (f.left_ceil * left.get_den() != left.get_num()) f.left_ceil += 1;
      f.slope_num = b.slope.get_num();
      f.slope_den = b.slope.get_den();
      Rational intercept = b.intercept * scale;
      f.intercept_floor = FloorDiv(intercept.get_num(), intercept.get_den());
      f.slope_log2 = std::log2(std::abs(b.slope.get_d()));
      f.rounding = intercept.get_den() == 1 ? 2.0 : 3.0;
      if (i > 0) {
        const ExactBranch& prev = branches[i - 1];
        f.discontinuous_left = prev.slope * prev.right + prev.intercept != b.slope * b.left + b.intercept;
      }
      fixed_.push_back(std::move(f));
    }
  }

  double Next() override {
    ++step_;
    // Branch index: last branch whose ceil(left * 2^P) <= X.
    std::size_t index = 0;
    for (std::size_t i = 1; i < fixed_.size(); ++i) {
      if (current_ >= fixed_[i].left_ceil) index = i;
    }
    const Fixed& f = fixed_[index];
    if (error_log2_ != -INFINITY) {
      if (f.discontinuous_left && WithinUlps(current_ - f.left_ceil, error_log2_)) {
        AmbiguousBranch(step_, precision_);
      }
      if (index + 1 < fixed_.size() && fixed_[index + 1].discontinuous_left &&
          WithinUlps(fixed_[index + 1].left_ceil - current_, error_log2_)) {
        AmbiguousBranch(step_, precision_);
      }
    }
    mpz_mul(product_.get_mpz_t(), f.slope_num.get_mpz_t(), current_.get_mpz_t());
    mpz_fdiv_q(product_.get_mpz_t(), product_.get_mpz_t(), f.slope_den.get_mpz_t());
    current_ = product_ + f.intercept_floor;
    double rounding = f.rounding;
    if (current_ >= modulus_) {
      current_ = modulus_ - 1;
      rounding += 1;
    } else if (current_ < 0) {
      current_ = 0;
      rounding += 1;
    }
    const bool exact_step = f.slope_den == 1 && rounding == 2.0 && error_log2_ == -INFINITY;
    if (!exact_step) error_log2_ = StepError(error_log2_, f.slope_log2, rounding);
    Integer diff = abs(current_ - start_);
    return FixedToDouble(diff, precision_);
  }

  double Coordinate() const override { return FixedToDouble(current_, precision_); }
  OrbitPoint Current() const override {
    OrbitPoint point = OrbitPoint::Fixed(current_, precision_);
    point.error_ulps_log2 = error_log2_;
    return point;
  }

 private:
  struct Fixed {
    Integer left_ceil;
    Integer slope_num;
    Integer slope_den;
    Integer intercept_floor;
    double slope_log2 = 0;
    double rounding = 2;
    bool discontinuous_left = false;
  };

  std::vector<Fixed> fixed_;
  Integer start_;
  Integer current_;
  Integer product_;
  unsigned precision_;
  Integer modulus_;
  double error_log2_;
};

int PowerOfTwoShift(long a) {
  if (a < 2 || (a & (a - 1)) != 0) return 0;
  int s = 0;
  while ((1L << s) < a) ++s;
  return s;
}

// Integer-map and toral coefficients as a row-major matrix.
std::vector<long> IntegerMatrix(const SystemSpec& system) {
  if (auto* circle = std::get_if<IntegerCircleMap>(&system.variant())) return {circle->a};
  return system.As<ToralLinear>().matrix;
}

bool IsErrorFree(const SystemSpec& system) {
  return system.Is<IntegerCircleMap>() || system.Is<ToralLinear>();
}

// Bound on accumulated ulps after `steps` affine steps from zero error.
double AffineErrorLog2(const SystemSpec& system, long steps) {
  if (steps <= 0) return -INFINITY;
  const double lambda = system.MaxExpansion();
  const double per_step = std::log2(3.0);
  if (system.Is<Rotation>()) return std::log2(static_cast<double>(steps));
  if (lambda <= 1.0 + 1e-12) return per_step + std::log2(static_cast<double>(steps));
  // 3 (Lambda^n - 1) / (Lambda - 1) <= 3 Lambda^n / (Lambda - 1)
  return per_step + steps * std::log2(lambda) - std::log2(lambda - 1.0);
}

std::unique_ptr<OrbitCursor> MakeFixedCursor(const SystemSpec& system, const OrbitPoint& start) {
  const unsigned precision = start.precision;
  if (IsErrorFree(system)) {
    if (auto* circle = std::get_if<IntegerCircleMap>(&system.variant())) {
      if (int shift = PowerOfTwoShift(circle->a); shift > 0 && start.error_ulps_log2 == -INFINITY) {
        return std::make_unique<ShiftCursor>(shift, start.fixed[0], precision);
      }
    }
    return std::make_unique<ModularCursor>(system.dimension(), IntegerMatrix(system), start.fixed, precision);
  }
  if (auto* rotation = std::get_if<Rotation>(&system.variant())) {
    return std::make_unique<RotationCursor>(rotation->alpha, start.fixed[0], precision, start.error_ulps_log2);
  }
  if (auto* beta = std::get_if<BetaMap>(&system.variant()); beta && !beta->beta.IsRational()) {
    return std::make_unique<BetaCursor>(beta->beta, start.fixed[0], precision, start.error_ulps_log2);
  }
  return std::make_unique<AffineCursor>(system.ExactBranches(), start.fixed[0], precision,
                                        start.error_ulps_log2);
}

OrbitPoint ToFixed(const OrbitPoint& point, unsigned precision) {
  if (!point.is_exact()) {
    if (point.precision == precision) return point;
    OrbitPoint out;
    out.precision = precision;
    out.error_ulps_log2 = point.error_ulps_log2;
    for (const Integer& f : point.fixed) {
      if (precision >= point.precision) {
        out.fixed.push_back(f << (precision - point.precision));
        if (out.error_ulps_log2 != -INFINITY) out.error_ulps_log2 += precision - point.precision;
      } else {
        out.fixed.push_back(f >> (point.precision - precision));
        out.error_ulps_log2 = Log2Add(out.error_ulps_log2 - (point.precision - precision), 0.0);
      }
    }
    return out;
  }
  OrbitPoint out;
  out.precision = precision;
  const Integer scale = TwoPow(precision);
  bool rounded = false;
  for (const Rational& x : point.exact) {
    Rational scaled = x * Rational(scale);
    Integer floor = FloorDiv(scaled.get_num(), scaled.get_den());
    rounded = rounded || floor * scaled.get_den() != scaled.get_num();
    out.fixed.push_back(floor);
  }
  out.error_ulps_log2 = rounded ? 0.0 : -INFINITY;
  return out;
}

}  // namespace

// --------------------------------------------------------------------------

OrbitPoint OrbitPoint::Exact(std::vector<Rational> coords) {
  Require(!coords.empty(), "orbit point needs at least one coordinate");
  OrbitPoint point;
  for (Rational& c : coords) {
    c.canonicalize();
    point.exact.push_back(Frac(c));
  }
  return point;
}

OrbitPoint OrbitPoint::Fixed(Integer bits, unsigned precision) {
  return Fixed(std::vector<Integer>{std::move(bits)}, precision);
}

OrbitPoint OrbitPoint::Fixed(std::vector<Integer> bits, unsigned precision) {
  Require(!bits.empty(), "orbit point needs at least one coordinate");
  OrbitPoint point;
  point.precision = precision;
  const Integer modulus = TwoPow(precision);
  for (Integer& b : bits) {
    Require(b >= 0 && b < modulus, "fixed-point coordinate outside [0, 1)");
    point.fixed.push_back(std::move(b));
  }
  return point;
}

double OrbitPoint::Coordinate(int i) const {
  if (is_exact()) return exact[i].get_d();
  return FixedToDouble(fixed[i], precision);
}

double OrbitPoint::ErrorLog2() const {
  if (is_exact() || error_ulps_log2 == -INFINITY) return -INFINITY;
  return error_ulps_log2 - precision;
}

unsigned RequiredPrecision(const SystemSpec& system, long steps, unsigned guard_bits) {
  if (IsErrorFree(system)) {
    return static_cast<unsigned>(std::ceil(std::max<long>(steps, 0) * std::log2(system.MaxExpansion()))) +
           guard_bits;
  }
  const double error_log2 = AffineErrorLog2(system, steps);
  const double bits = error_log2 == -INFINITY ? 0.0 : std::ceil(std::max(error_log2, 0.0));
  return static_cast<unsigned>(bits) + guard_bits + 1;
}

OrbitPoint Iterate(const SystemSpec& system, const OrbitPoint& x, long n, unsigned guard_bits) {
  Require(n >= 0, "iterate needs n >= 0");
  Require(x.dimension() == system.dimension(), "point dimension does not match the system");
  if (x.is_exact() && SupportsExact(system)) {
    ExactCursor cursor(system, x.exact);
    for (long k = 0; k < n; ++k) cursor.Next();
    return cursor.Current();
  }
  OrbitPoint start = x.is_exact() ? ToFixed(x, RequiredPrecision(system, n, guard_bits)) : x;
  if (!IsErrorFree(system)) {
    const double produced = AffineErrorLog2(system, n);
    // Existing error grows by at most Lambda^n.
    double carried = start.error_ulps_log2 == -INFINITY
                         ? -INFINITY
                         : start.error_ulps_log2 + n * std::log2(std::max(system.MaxExpansion(), 1.0));
    const double total = Log2Add(produced, carried);
    if (total > static_cast<double>(start.precision) - guard_bits) {
      const unsigned needed = static_cast<unsigned>(std::ceil(std::max(total, 0.0))) + guard_bits + 1;
      Fail(ErrorCode::kPrecisionExhausted,
           "iterating " + std::to_string(n) + " steps needs precision P >= " + std::to_string(needed) +
               " bits, have " + std::to_string(start.precision));
    }
  }
  auto cursor = MakeFixedCursor(system, start);
  for (long k = 0; k < n; ++k) cursor->Next();
  return cursor->Current();
}

std::optional<Rational> ExactDistance(const SystemSpec& system, const OrbitPoint& a, const OrbitPoint& b) {
  if (!a.is_exact() || !b.is_exact() || system.metric() == Metric::kTorus) return std::nullopt;
  if (system.metric() == Metric::kInterval) return Abs(a.exact[0] - b.exact[0]);
  return CircleDist(CirclePoint(a.exact[0]), CirclePoint(b.exact[0]));
}

Real Distance(const SystemSpec& system, const OrbitPoint& a, const OrbitPoint& b) {
  if (auto exact = ExactDistance(system, a, b)) return ToReal(*exact);
  auto coordinate = [](const OrbitPoint& p, int i) {
    return p.is_exact() ? ToReal(p.exact[i]) : FixedToReal(p.fixed[i], p.precision);
  };
  if (system.metric() == Metric::kInterval) return mp::abs(coordinate(a, 0) - coordinate(b, 0));
  Real squared = 0;
  for (int i = 0; i < a.dimension(); ++i) {
    Real diff = mp::abs(coordinate(a, i) - coordinate(b, i));
    diff -= mp::floor(diff);
    if (diff > Real(0.5)) diff = 1 - diff;
    squared += diff * diff;
  }
  return mp::sqrt(squared);
}

std::unique_ptr<OrbitCursor> MakeCursor(const SystemSpec& system, const OrbitPoint& start, long horizon,
                                        unsigned guard_bits) {
  Require(start.dimension() == system.dimension(), "point dimension does not match the system");
  if (start.is_exact() && SupportsExact(system)) {
    return std::make_unique<ExactCursor>(system, start.exact);
  }
  OrbitPoint fixed = start.is_exact() ? ToFixed(start, RequiredPrecision(system, horizon, guard_bits)) : start;
  if (!IsErrorFree(system) && fixed.precision < RequiredPrecision(system, horizon, guard_bits)) {
    Fail(ErrorCode::kPrecisionExhausted,
         "horizon " + std::to_string(horizon) + " needs precision P >= " +
             std::to_string(RequiredPrecision(system, horizon, guard_bits)) + " bits, have " +
             std::to_string(fixed.precision));
  }
  return MakeFixedCursor(system, fixed);
}

OrbitPoint SamplePoint(const SystemSpec& system, const SampleMeasure& measure, std::uint64_t seed,
                       std::uint64_t index, unsigned precision) {
  RandomStream stream(seed, index);
  std::vector<Integer> coords;
  for (int i = 0; i < system.dimension(); ++i) {
    if (measure.bin_weights.empty()) {
      coords.push_back(stream.NextBits(precision));
      continue;
    }
    const auto& w = measure.bin_weights;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double u = stream.NextUnit() * total;
    std::size_t bin = 0;
    while (bin + 1 < w.size() && (u >= w[bin] || w[bin] == 0.0)) {
      u -= w[bin];
      ++bin;
    }
    Integer within = stream.NextBits(precision);
    Integer scaled = (Integer(static_cast<unsigned long>(bin)) << precision) + within;
    coords.push_back(scaled / static_cast<unsigned long>(w.size()));
  }
  return OrbitPoint::Fixed(std::move(coords), precision);
}

std::unique_ptr<OrbitCursor> MakeSampledCursor(const SystemSpec& system, const SampleMeasure& measure,
                                               std::uint64_t seed, std::uint64_t index, long horizon,
                                               unsigned guard_bits) {
  if (auto* circle = std::get_if<IntegerCircleMap>(&system.variant()); circle && measure.bin_weights.empty()) {
    if (int shift = PowerOfTwoShift(circle->a); shift > 0) {
      return std::make_unique<ShiftCursor>(shift, RandomStream(seed, index));
    }
  }
  const unsigned precision = RequiredPrecision(system, horizon, guard_bits);
  return MakeFixedCursor(system, SamplePoint(system, measure, seed, index, precision));
}

MinReturn MinReturnDistance(const SystemSpec& system, const OrbitPoint& x, long m) {
  Require(m >= 1, "min return distance needs m >= 1");
  auto cursor = MakeCursor(system, x, m);
  MinReturn best;
  for (long k = 1; k <= m; ++k) {
    double d = cursor->Next();
    auto exact = cursor->LastExactDistance();
    bool better = exact && best.exact ? *exact < *best.exact : d < best.distance;
    if (best.argmin == 0 || better) {
      best.distance = d;
      best.exact = exact;
      best.argmin = k;
    }
  }
  return best;
}

std::optional<long> ReturnTime(const SystemSpec& system, const OrbitPoint& x, const Rational& r, long horizon) {
  Require(horizon >= 1, "return time needs a positive horizon");
  auto cursor = MakeCursor(system, x, horizon);
  const double r_double = r.get_d();
  for (long n = 1; n <= horizon; ++n) {
    double d = cursor->Next();
    auto exact = cursor->LastExactDistance();
    if (exact ? *exact < r : d < r_double) return n;
  }
  return std::nullopt;
}

std::vector<std::optional<long>> ReturnTimes(OrbitCursor& cursor, std::span<const double> radii, long horizon) {
  std::vector<std::optional<long>> times(radii.size());
  std::size_t remaining = radii.size();
  while (remaining > 0 && cursor.step() < horizon) {
    double d = cursor.Next();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!times[i] && d < radii[i]) {
        times[i] = cursor.step();
        --remaining;
      }
    }
  }
  return times;
}

ReturnExponentEstimate EstimateReturnExponents(OrbitCursor& cursor, std::span<const double> radii, long horizon) {
  Require(radii.size() >= 2, "return exponent estimate needs at least two radii");
  auto times = ReturnTimes(cursor, radii, horizon);
  ReturnExponentEstimate estimate;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!times[i]) {
      estimate.excluded_radii.push_back(radii[i]);
      continue;
    }
    xs.push_back(-std::log(radii[i]));
    ys.push_back(std::log(static_cast<double>(*times[i])));
  }
  estimate.points_used = static_cast<int>(xs.size());
  if (xs.size() < 2) return estimate;
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  estimate.slope = sxx > 0 ? sxy / sxx : 0.0;
  estimate.intercept = my - estimate.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (estimate.intercept + estimate.slope * xs[i]);
    rss += r * r;
  }
  estimate.residual_rms = std::sqrt(rss / n);
  // Finer half of the grid: the largest -log r values.
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] > xs[b]; });
  const std::size_t half = std::max<std::size_t>(1, order.size() / 2);
  estimate.lower = INFINITY;
  estimate.upper = -INFINITY;
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i = order[k];
    double exponent = (ys[i] - estimate.intercept) / xs[i];
    estimate.lower = std::min(estimate.lower, exponent);
    estimate.upper = std::max(estimate.upper, exponent);
  }
  return estimate;
}

ReturnExponentEstimate EstimateReturnExponents(const SystemSpec& system, const OrbitPoint& x,
                                               std::span<const double> radii, long horizon) {
  Require(radii.size() >= 8, "return exponent grid needs at least 8 radii");
  const double ratio = radii[1] / radii[0];
  for (std::size_t i = 1; i < radii.size(); ++i) {
    Require(std::abs(radii[i] / radii[i - 1] - ratio) <= 1e-9 * std::abs(ratio),
            "return exponent grid must be geometric");
  }
  auto cursor = MakeCursor(system, x, horizon);
  return EstimateReturnExponents(*cursor, radii, horizon);
}

double BoshernitzanStatistic(const SystemSpec& system, const OrbitPoint& x, double alpha, long N) {
  Require(alpha > 0, "Boshernitzan statistic needs alpha > 0");
  Require(N >= 1, "Boshernitzan statistic needs N >= 1");
  auto cursor = MakeCursor(system, x, N);
  const long checkpoint[] = {N};
  return BoshernitzanProfile(*cursor, alpha, checkpoint).front();
}

std::vector<double> BoshernitzanProfile(OrbitCursor& cursor, double alpha, std::span<const long> checkpoints) {
  Require(alpha > 0, "Boshernitzan statistic needs alpha > 0");
  std::vector<double> values;
  values.reserve(checkpoints.size());
  double best = INFINITY;
  const double exponent = 1.0 / alpha;
  for (long checkpoint : checkpoints) {
    while (cursor.step() < checkpoint) {
      double d = cursor.Next();
      double n = static_cast<double>(cursor.step());
      best = std::min(best, std::pow(n, exponent) * d);
    }
    values.push_back(best);
  }
  return values;
}

std::string OrbitTraceCsv(const SystemSpec& system, const OrbitPoint& x, long steps) {
  auto cursor = MakeCursor(system, x, steps);
  std::string csv = "step,point,distance\n";
  char line[128];
  std::snprintf(line, sizeof(line), "0,%.17g,0\n", x.Coordinate(0));
  csv += line;
  for (long k = 1; k <= steps; ++k) {
    double d = cursor->Next();
    std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g\n", k, cursor->Coordinate(), d);
    csv += line;
  }
  return csv;
}

}  // namespace recurlab
