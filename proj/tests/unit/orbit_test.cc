#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracle.h"
#include "recurlab/error.h"
#include "recurlab/orbit.h"
#include "recurlab/stats.h"

namespace recurlab {
namespace {

namespace mp = boost::multiprecision;

Rational Q(long p, long q) {
  Rational x(p, q);
  x.canonicalize();
  return x;
}

const SystemSpec kDoubling = SystemSpec::Doubling();

Real TwoToMinus(int bits) { return mp::ldexp(Real(1), -bits); }

Real Scaled(const Integer& bits, unsigned precision) {
  return mp::ldexp(ToReal(bits), -static_cast<int>(precision));
}

TEST(Iterate, PeriodTwoPoint) {
  const OrbitPoint y = Iterate(kDoubling, OrbitPoint::Exact(Q(1, 3)), 2);
  ASSERT_TRUE(y.is_exact());
  EXPECT_EQ(y.exact[0], Q(1, 3));
  EXPECT_EQ(Iterate(kDoubling, OrbitPoint::Exact(Q(1, 3)), 1).exact[0], Q(2, 3));
}

TEST(Iterate, RationalRotationIsExact) {
  const SystemSpec rotation = SystemSpec::Parse("rotation:3/7");
  oracle::Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Rational x = rng.Fraction(50);
    const long n = rng.Between(0, 40);
    EXPECT_EQ(Iterate(rotation, OrbitPoint::Exact(x), n).exact[0], oracle::FracPart(x + n * Q(3, 7)));
  }
}

TEST(Iterate, GoldenRotationFixedPoint) {
  const SystemSpec rotation = SystemSpec::Parse("rotation:golden-conjugate");
  const unsigned P = 128;
  const Integer start = Integer(1) << (P - 2);  // x = 1/4
  const OrbitPoint y = Iterate(rotation, OrbitPoint::Fixed(start, P), 1000);
  const Real alpha = (mp::sqrt(Real(5)) - 1) / 2;
  Real expected = Real(1) / 4 + 1000 * alpha;
  expected -= mp::floor(expected);
  EXPECT_LT(mp::abs(Real(y.Coordinate()) - expected), 1e-15);
  const Real fixed = Scaled(y.fixed[0], P);
  EXPECT_LT(mp::abs(fixed - expected), 1001 * TwoToMinus(P));
}

// T x = beta x mod 1 evaluated directly in 333-bit arithmetic.
Real GoldenBetaOracle(Real x, int n) {
  const Real beta = (1 + mp::sqrt(Real(5))) / 2;
  for (int i = 0; i < n; ++i) {
    x *= beta;
    x -= mp::floor(x);
  }
  return x;
}

TEST(Iterate, GoldenBetaAgreesAcrossPrecisions) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  const OrbitPoint low = Iterate(beta, OrbitPoint::Fixed(Integer(1) << 255, 256), 3);
  const OrbitPoint high = Iterate(beta, OrbitPoint::Fixed(Integer(1) << 1023, 1024), 3);
  const Real a = Scaled(low.fixed[0], 256);
  const Real b = Scaled(high.fixed[0], 1024);
  EXPECT_LT(mp::abs(a - b), TwoToMinus(64));
  EXPECT_LT(mp::abs(a - GoldenBetaOracle(Real(1) / 2, 3)), TwoToMinus(64));
  EXPECT_LE(low.ErrorLog2(), -64);
}

TEST(Iterate, GoldenBetaLongOrbitAgainstOracle) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  const long n = 200;
  const OrbitPoint y = Iterate(beta, OrbitPoint::Exact(Q(1, 3)), n);
  EXPECT_LT(mp::abs(Real(y.Coordinate()) - GoldenBetaOracle(Real(1) / 3, n)), 1e-15);
}

TEST(Iterate, PrecisionExhaustedIsReported) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  try {
    Iterate(beta, OrbitPoint::Fixed(Integer(1) << 99, 100), 200);
    FAIL() << "expected precision error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecisionExhausted);
    EXPECT_NE(std::string(e.what()).find("needs precision P >="), std::string::npos);
  }
}

TEST(Iterate, IntegerMapsMatchShiftArithmetic) {
  oracle::Rng rng(2);
  for (long a : {2L, 3L, 4L, -3L}) {
    for (int trial = 0; trial < 20; ++trial) {
      const unsigned P = 200;
      Integer bits = 0;
      for (int w = 0; w < 4; ++w) bits = (bits << 50) + Integer(static_cast<unsigned long>(rng.Next() >> 14));
      bits %= Integer(1) << P;
      const long n = rng.Between(0, 60);
      const OrbitPoint y = Iterate(SystemSpec(IntegerCircleMap{a}), OrbitPoint::Fixed(bits, P), n);
      // a^n x mod 2^P, by big integer multiplication.
      Integer expected = bits * Pow(Integer(a), n);
      expected = Mod(expected, Integer(1) << P);
      EXPECT_EQ(y.fixed[0], expected) << a << " " << n;
      // Same value via exact rational iteration.
      Rational x(bits, Integer(1) << P), got(y.fixed[0], Integer(1) << P);
      x.canonicalize();
      got.canonicalize();
      EXPECT_EQ(got, oracle::TimesPower(a, x, n));
    }
  }
}

TEST(Iterate, CatMapExactOrbit) {
  const SystemSpec cat = SystemSpec::Parse("toral:2,1;1,1");
  const OrbitPoint y = Iterate(cat, OrbitPoint::Exact({Q(1, 7), Q(2, 7)}), 3);
  // A^3 = [[13, 8], [8, 5]].
  EXPECT_EQ(y.exact[0], oracle::FracPart(Q(13 + 16, 7)));
  EXPECT_EQ(y.exact[1], oracle::FracPart(Q(8 + 10, 7)));
}

TEST(MinReturnDistance, PeriodicPoints) {
  MinReturn m = MinReturnDistance(kDoubling, OrbitPoint::Exact(Q(1, 3)), 5);
  EXPECT_EQ(m.distance, 0);
  EXPECT_EQ(m.argmin, 2);
  m = MinReturnDistance(kDoubling, OrbitPoint::Exact(0), 5);
  EXPECT_EQ(m.distance, 0);
  EXPECT_EQ(m.argmin, 1);
  m = MinReturnDistance(kDoubling, OrbitPoint::Exact(Q(1, 5)), 4);
  EXPECT_EQ(m.distance, 0);
  EXPECT_EQ(m.argmin, 4);
  m = MinReturnDistance(kDoubling, OrbitPoint::Exact(Q(1, 5)), 3);
  ASSERT_TRUE(m.exact.has_value());
  EXPECT_EQ(*m.exact, Q(1, 5));  // orbit 2/5, 4/5, 3/5
  EXPECT_EQ(m.argmin, 1);
}

TEST(ReturnTime, Examples) {
  EXPECT_EQ(ReturnTime(kDoubling, OrbitPoint::Exact(Q(1, 3)), Q(1, 10), 100), 2);
  EXPECT_EQ(ReturnTime(kDoubling, OrbitPoint::Exact(0), Q(1, 1000), 100), 1);
  EXPECT_EQ(ReturnTime(kDoubling, OrbitPoint::Exact(Q(1, 5)), Q(1, 100), 100), 4);
  EXPECT_FALSE(ReturnTime(kDoubling, OrbitPoint::Exact(Q(1, 5)), Q(1, 100), 3).has_value());
}

TEST(ReturnTime, MonotoneProperties) {
  oracle::Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Rational x = rng.Fraction(10007);
    const OrbitPoint p = OrbitPoint::Exact(x);
    double previous = INFINITY;
    for (long m = 1; m <= 30; ++m) {
      const double rho = MinReturnDistance(kDoubling, p, m).distance;
      EXPECT_LE(rho, previous);
      previous = rho;
    }
    std::optional<long> last;
    for (long denom = 3; denom <= 200; denom += 7) {
      const auto t = ReturnTime(kDoubling, p, Q(1, denom), 20000);
      if (last && t) EXPECT_GE(*t, *last);
      if (t) last = t;
    }
  }
}

TEST(ReturnTimes, OnePassMatchesSinglePasses) {
  const std::vector<double> radii = {0.25, 0.1, 0.03, 0.01};
  oracle::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Rational x = rng.Fraction(999983);
    auto cursor = MakeCursor(kDoubling, OrbitPoint::Exact(x), 5000);
    const auto times = ReturnTimes(*cursor, radii, 5000);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      EXPECT_EQ(times[i], ReturnTime(kDoubling, OrbitPoint::Exact(x), Rational(radii[i]), 5000));
    }
  }
}

TEST(ReturnExponents, PeriodicPointHasZeroSlope) {
  std::vector<double> radii;
  for (int k = 4; k <= 12; ++k) radii.push_back(std::ldexp(1.0, -k));
  const ReturnExponentEstimate e = EstimateReturnExponents(kDoubling, OrbitPoint::Exact(Q(1, 3)), radii, 100);
  EXPECT_NEAR(e.slope, 0, 1e-12);
  EXPECT_NEAR(e.lower, 0, 1e-12);
  EXPECT_NEAR(e.upper, 0, 1e-12);
}

TEST(ReturnExponents, DoublingTypicalPointsNearOne) {
  std::vector<double> radii;
  for (int k = 4; k <= 16; ++k) radii.push_back(std::ldexp(1.0, -k));
  std::vector<double> slopes;
  for (std::uint64_t i = 0; i < 300; ++i) {
    auto cursor = MakeSampledCursor(kDoubling, SampleMeasure::Lebesgue(), 17, i, 1 << 21);
    const ReturnExponentEstimate e = EstimateReturnExponents(*cursor, radii, 1 << 21);
    if (e.points_used >= 8) slopes.push_back(e.slope);
  }
  ASSERT_GE(slopes.size(), 290u);
  const double median = Median(slopes);
  EXPECT_GE(median, 0.8);
  EXPECT_LE(median, 1.2);
}

TEST(Boshernitzan, PeriodicPointIsZero) {
  EXPECT_EQ(BoshernitzanStatistic(kDoubling, OrbitPoint::Exact(Q(1, 7)), 1.0, 3), 0.0);
  // 2/7 and 4/7 sit at distances 1/7 and 3/7.
  EXPECT_NEAR(BoshernitzanStatistic(kDoubling, OrbitPoint::Exact(Q(1, 7)), 1.0, 2), 1.0 / 7, 1e-15);
}

TEST(Boshernitzan, StatisticMatchesDefinition) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Rational x = rng.Fraction(100003);
    const double alpha = 0.5 + rng.Unit() * 2;
    double expected = INFINITY;
    for (long n = 1; n <= 40; ++n) {
      const double d = oracle::CircleDistance(oracle::TimesPower(2, x, n), x).get_d();
      expected = std::min(expected, std::pow(static_cast<double>(n), 1 / alpha) * d);
    }
    EXPECT_NEAR(BoshernitzanStatistic(kDoubling, OrbitPoint::Exact(x), alpha, 40), expected, 1e-12);
  }
}

TEST(Boshernitzan, AlphaTwoMedianDecreases) {
  const std::vector<long> checkpoints = {100, 10000};
  std::vector<double> early, late;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto cursor = MakeSampledCursor(kDoubling, SampleMeasure::Lebesgue(), 3, i, checkpoints.back());
    const std::vector<double> profile = BoshernitzanProfile(*cursor, 2.0, checkpoints);
    EXPECT_LE(profile[1], profile[0]);
    early.push_back(profile[0]);
    late.push_back(profile[1]);
  }
  EXPECT_LT(Median(late), Median(early));
}

TEST(Precision, DoublingTheBitsChangesNothing) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  const long steps = 300;
  const unsigned P = RequiredPrecision(beta, steps);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const OrbitPoint low = SamplePoint(beta, SampleMeasure::Lebesgue(), 8, i, P);
    OrbitPoint high = low;
    high.fixed[0] <<= P;
    high.precision = 2 * P;
    const double a = BoshernitzanStatistic(beta, low, 1.0, steps);
    const double b = BoshernitzanStatistic(beta, high, 1.0, steps);
    EXPECT_LE(std::fabs(a - b), std::ldexp(1.0, -64) * steps) << i;
    for (long n : {1L, 50L, 299L}) {
      const Real da = Distance(beta, Iterate(beta, low, n), low);
      const Real db = Distance(beta, Iterate(beta, high, n), high);
      EXPECT_LT(mp::abs(da - db), TwoToMinus(64));
    }
  }
}

TEST(Rotation, ReturnDistanceIndependentOfStart) {
  const SystemSpec rotation = SystemSpec::Parse("rotation:golden-conjugate");
  auto a = MakeCursor(rotation, OrbitPoint::Fixed(Integer(1) << 100, 160), 500);
  auto b = MakeCursor(rotation, OrbitPoint::Fixed(Integer(3) << 150, 160), 500);
  const double alpha = (std::sqrt(5.0) - 1) / 2;
  for (long n = 1; n <= 500; ++n) {
    const double da = a->Next(), db = b->Next();
    EXPECT_NEAR(da, db, 1e-12);
    const double frac = n * alpha - std::floor(n * alpha);
    EXPECT_NEAR(da, std::min(frac, 1 - frac), 1e-9);
  }
}

TEST(SamplePoint, DeterministicPerIndex) {
  const SystemSpec beta = SystemSpec::GoldenBeta();
  const OrbitPoint a = SamplePoint(beta, SampleMeasure::Lebesgue(), 5, 11, 300);
  const OrbitPoint b = SamplePoint(beta, SampleMeasure::Lebesgue(), 5, 11, 300);
  const OrbitPoint c = SamplePoint(beta, SampleMeasure::Lebesgue(), 5, 12, 300);
  EXPECT_EQ(a.fixed, b.fixed);
  EXPECT_NE(a.fixed, c.fixed);
  SampleMeasure left_half;
  left_half.bin_weights = {1, 0};
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_LT(SamplePoint(beta, left_half, 5, i, 64).Coordinate(), 0.5);
}

TEST(OrbitTrace, CsvShape) {
  const std::string csv = OrbitTraceCsv(kDoubling, OrbitPoint::Exact(Q(1, 5)), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,point,distance");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

}  // namespace
}  // namespace recurlab
