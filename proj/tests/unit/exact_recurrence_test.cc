#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oracle.h"
#include "recurlab/error.h"
#include "recurlab/exact_recurrence.h"

namespace recurlab {
namespace {

Rational Q(long p, long q) {
  Rational x(p, q);
  x.canonicalize();
  return x;
}

bool InEn(long a, long n, const Rational& r, const Rational& x) {
  return oracle::CircleDistance(oracle::TimesPower(a, x, n), x) < r;
}

// Membership can only change where (a^n - 1) x = j +- r; measure the set by
// testing the midpoint of every gap between consecutive breakpoints.
Rational MeasureByBreakpoints(const std::vector<std::pair<long, Rational>>& sets, long a, long& evaluations) {
  std::vector<Rational> points;
  for (const auto& [n, r] : sets) {
    const long d = std::abs(static_cast<long>(std::pow(a, n)) - 1);
    for (long j = -1; j <= d + 1; ++j) {
      points.push_back(Rational(Rational(j) - r) / d);
      points.push_back(Rational(Rational(j) + r) / d);
    }
  }
  std::vector<Rational> inside;
  for (auto& p : points) {
    p.canonicalize();
    if (p > 0 && p < 1) inside.push_back(p);
  }
  const std::vector<Rational> cuts = oracle::Breakpoints(inside);
  Rational total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Rational mid = (cuts[i] + cuts[i + 1]) / 2;
    bool all = true;
    for (const auto& [n, r] : sets) all = all && InEn(a, n, r, mid);
    ++evaluations;
    if (all) total += cuts[i + 1] - cuts[i];
  }
  return total;
}

std::string ReadGolden(const std::string& name) {
  std::ifstream in(std::string(RECURLAB_GOLDEN_DIR) + "/" + name);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

TEST(BuildRecurrenceSet, SingleFixedPoint) {
  const RecurrenceSetResult e = BuildRecurrenceSet(2, 1, Q(1, 10));
  ASSERT_EQ(e.set.pieces().size(), 2u);
  EXPECT_EQ(e.set.pieces()[0], (Arc{0, Q(1, 10)}));
  EXPECT_EQ(e.set.pieces()[1], (Arc{Q(9, 10), 1}));
  EXPECT_EQ(e.measure, Q(1, 5));
  EXPECT_EQ(e.arc_count, 1u);
}

TEST(BuildRecurrenceSet, PeriodTwoMatchesGolden) {
  const RecurrenceSetResult e = BuildRecurrenceSet(2, 2, Q(1, 10));
  EXPECT_EQ(e.set, IntervalSet::FromText(ReadGolden("recurrence_d3_r1_10.txt")));
  EXPECT_EQ(e.set.ToText(), ReadGolden("recurrence_d3_r1_10.txt"));
  EXPECT_EQ(e.arc_count, 3u);
  EXPECT_EQ(e.measure, Q(1, 5));
  for (const Rational center : {Q(1, 3), Q(2, 3)}) {
    EXPECT_TRUE(e.set.Contains(center));
    EXPECT_TRUE(e.set.Contains(center - Q(1, 30)));
    EXPECT_FALSE(e.set.Contains(center + Q(1, 30)));
  }
}

TEST(BuildRecurrenceSet, NegativeMultiplierSharesFixedPoints) {
  // -2 x - x = -3 x, the same fixed points as T^2 of the doubling map.
  EXPECT_EQ(BuildRecurrenceSet(-2, 1, Q(1, 10)).set.ToText(), ReadGolden("recurrence_d3_r1_10.txt"));
  EXPECT_EQ(BuildRecurrenceSet(3, 2, Q(1, 4)).set.ToText(), ReadGolden("recurrence_a3_n2_r1_4.txt"));
}

TEST(BuildRecurrenceSet, HalfMeasureAtFive) { EXPECT_EQ(BuildRecurrenceSet(2, 5, Q(1, 4)).measure, Q(1, 2)); }

TEST(BuildRecurrenceSet, MeasureIsTwiceTheRadius) {
  for (long a : {2L, 3L, 4L, -2L, -3L}) {
    for (long n = 1; n <= 8; ++n) {
      if (std::pow(std::abs(a), n) > 70000) break;
      for (const Rational r : {Q(1, 4 * n), Q(1, 4), Q(3, 13), Q(1, 1000)}) {
        EXPECT_EQ(BuildRecurrenceSet(a, n, r).measure, 2 * r) << a << " " << n << " " << r;
        EXPECT_EQ(RecurrenceSetMeasure(a, n, r), 2 * r);
      }
    }
  }
}

TEST(BuildRecurrenceSet, DegenerateRadii) {
  EXPECT_TRUE(BuildRecurrenceSet(2, 3, 0).set.empty());
  EXPECT_EQ(BuildRecurrenceSet(2, 3, 0).measure, 0);
  EXPECT_TRUE(BuildRecurrenceSet(2, 3, Q(1, 2)).set.IsFull());
  EXPECT_EQ(RecurrenceSetMeasure(5, 30, Q(3, 5)), 1);
  EXPECT_THROW(BuildRecurrenceSet(1, 3, Q(1, 4)), Error);
  EXPECT_THROW(BuildRecurrenceSet(2, 3, Q(-1, 4)), Error);
}

TEST(BuildRecurrenceSet, BudgetIsAHardError) {
  try {
    BuildRecurrenceSet(2, 30, Q(1, 10), 1 << 20);
    FAIL() << "expected budget error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
  }
}

TEST(BuildRecurrenceSet, StreamedMeasureOfLargeSets) {
  EXPECT_EQ(RecurrenceSetMeasure(4, 12, Q(1, 48), 1ULL << 25), Q(1, 24));
  EXPECT_EQ(RecurrenceSetMeasure(3, 14, Q(1, 56), 1ULL << 25), Q(1, 28));
}

TEST(BuildRecurrenceSet, MembershipMatchesIteration) {
  oracle::Rng rng(21);
  for (long a : {2L, 3L, -2L}) {
    for (long n = 1; n <= 6; ++n) {
      const Rational r = Q(1, rng.Between(3, 40));
      const RecurrenceSetResult e = BuildRecurrenceSet(a, n, r);
      for (int probe = 0; probe < 80; ++probe) {
        const Rational x = rng.Fraction(5000);
        EXPECT_EQ(e.set.Contains(x), InEn(a, n, r, x)) << a << " " << n << " x=" << x;
      }
    }
  }
}

TEST(BuildRecurrenceSet, MeasureMatchesBreakpointOracle) {
  for (long a : {2L, 3L, -3L}) {
    for (long n = 1; n <= 5; ++n) {
      const Rational r = Q(2, 7 + n);
      long evaluations = 0;
      EXPECT_EQ(BuildRecurrenceSet(a, n, r).measure, MeasureByBreakpoints({{n, r}}, a, evaluations));
    }
  }
}

TEST(BuildRecurrenceSet, MonotoneInRadius) {
  oracle::Rng rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const long n = rng.Between(1, 7);
    Rational r1 = Q(rng.Between(0, 50), 101), r2 = Q(rng.Between(0, 50), 101);
    if (r1 > r2) std::swap(r1, r2);
    EXPECT_TRUE(BuildRecurrenceSet(2, n, r1).set.IsSubsetOf(BuildRecurrenceSet(2, n, r2).set));
  }
}

SystemSpec DoublingBranches() { return SystemSpec::Parse("piecewise:0,1/2,2,0;1/2,1,2,-1"); }

TEST(BuildRecurrenceSetPiecewise, DoublingBranchesAgreeWithArcs) {
  for (long n = 1; n <= 10; ++n) {
    for (const Rational r : {Q(1, 10), Q(1, 4 * n), Q(1, 3)}) {
      EXPECT_EQ(
          BuildRecurrenceSetPiecewise(DoublingBranches(), n, r, kDefaultArcBudget, Metric::kCircle).set.ToText(),
          BuildRecurrenceSet(2, n, r).set.ToText())
          << n << " " << r;
    }
  }
}

TEST(BuildRecurrenceSetPiecewise, IntervalMetricDropsWrapAround) {
  // x = 0.24: T^2 x = 0.96 is within 1/3 of x mod 1 but not on the line.
  const IntervalSet line = BuildRecurrenceSetPiecewise(DoublingBranches(), 2, Q(1, 3)).set;
  const IntervalSet circle = BuildRecurrenceSet(2, 2, Q(1, 3)).set;
  EXPECT_TRUE(line.IsSubsetOf(circle));
  EXPECT_FALSE(line.Contains(Q(6, 25)));
  EXPECT_TRUE(circle.Contains(Q(6, 25)));
}

TEST(BuildRecurrenceSetPiecewise, TentWithZeroRadiusIsEmpty) {
  const RecurrenceSetResult e = BuildRecurrenceSetPiecewise(SystemSpec::Parse("tent"), 1, 0);
  EXPECT_TRUE(e.set.empty());
  EXPECT_EQ(e.measure, 0);
}

TEST(BuildRecurrenceSetPiecewise, ThreeBranchesSlopeThree) {
  const SystemSpec tripling = SystemSpec::Parse("piecewise:0,1/3,3,0;1/3,2/3,3,-1;2/3,1,3,-2");
  const RecurrenceSetResult e = BuildRecurrenceSetPiecewise(tripling, 1, Q(1, 12));
  // |2x - j| < 1/12 around the fixed points 0, 1/2 and the boundary point 1.
  const IntervalSet expected =
      IntervalSet::FromSortedPieces({{0, Q(1, 24)}, {Q(11, 24), Q(13, 24)}, {Q(23, 24), 1}});
  EXPECT_EQ(e.set, expected);
  EXPECT_EQ(e.measure, Q(1, 6));
  EXPECT_EQ(e.set.ArcCount(), 2u);
}

TEST(BuildRecurrenceSetPiecewise, BranchWithoutFixedPointContributesNothing) {
  const SystemSpec map = SystemSpec::Parse("piecewise:0,1/2,2,0;1/2,3/4,2,-1;3/4,1,2,-3/2");
  const RecurrenceSetResult e = BuildRecurrenceSetPiecewise(map, 1, Q(1, 100));
  EXPECT_EQ(e.set, IntervalSet::FromArc(0, Q(1, 100)));
}

TEST(BuildRecurrenceSetPiecewise, TentMembershipMatchesIteration) {
  const SystemSpec tent = SystemSpec::Parse("tent");
  auto step = [](const Rational& x) { return x < Q(1, 2) ? Rational(2 * x) : Rational(2 - 2 * x); };
  oracle::Rng rng(23);
  for (long n = 1; n <= 7; ++n) {
    const Rational r = Q(1, rng.Between(5, 30));
    const RecurrenceSetResult e = BuildRecurrenceSetPiecewise(tent, n, r);
    for (int probe = 0; probe < 100; ++probe) {
      const Rational x = rng.Fraction(3000);
      Rational y = x;
      for (long i = 0; i < n; ++i) y = step(y);
      EXPECT_EQ(e.set.Contains(x), Abs(y - x) < r) << n << " " << x;
    }
  }
}

TEST(ComposeBranches, RejectsNonExpanding) {
  EXPECT_THROW(ComposeBranches(SystemSpec::Parse("rotation:1/3"), 2), Error);
  EXPECT_EQ(ComposeBranches(DoublingBranches(), 5).size(), 32u);
}

Rational DoublingRatio(long n) {
  if (n == 1) return 2;
  const Rational power = Pow(2, n);
  return Rational(2 * power / (power - 1));
}

TEST(BranchRatioCheck, DoublingExactValues) {
  for (long n = 1; n <= 8; ++n) {
    const BranchRatio ratio = BranchRatioCheck(DoublingBranches(), n, Q(1, 100));
    EXPECT_EQ(ratio.max_ratio, DoublingRatio(n)) << n;
    EXPECT_LE(ratio.max_ratio, ratio.claim_bound);
    EXPECT_LE(ratio.max_ratio, 4);
    EXPECT_EQ(ratio.pieces, static_cast<std::size_t>(1) << n);
  }
  EXPECT_LE(BranchRatioCheck(DoublingBranches(), 6, Q(1, 100)).max_ratio,
            BranchRatioCheck(DoublingBranches(), 3, Q(1, 100)).max_ratio);
}

TEST(PairCorrelation, FirstAndSecond) {
  const PairCorrelation p = ComputePairCorrelation(2, 1, 2, Q(1, 10), Q(1, 10));
  EXPECT_EQ(p.intersection, Q(1, 15));
  EXPECT_EQ(p.excess, Q(2, 75));
  EXPECT_EQ(p.bound, 1);
  EXPECT_TRUE(p.bound_ok);
  EXPECT_THROW(ComputePairCorrelation(2, 3, 3, Q(1, 10), Q(1, 10)), Error);
}

TEST(PairCorrelation, IntersectionMatchesSetsAndOracle) {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const long a = std::vector<long>{2, 3, -2}[rng.Below(3)];
    const long i = rng.Between(1, 4), j = rng.Between(i + 1, 5);
    const Rational ri = Q(1, rng.Between(3, 30)), rj = Q(1, rng.Between(3, 30));
    const Rational fast = RecurrenceIntersectionMeasure(a, i, ri, j, rj);
    EXPECT_EQ(fast, IntersectionMeasure(BuildRecurrenceSet(a, i, ri).set, BuildRecurrenceSet(a, j, rj).set));
    if (std::pow(std::abs(a), j) < 300) {
      long evaluations = 0;
      EXPECT_EQ(fast, MeasureByBreakpoints({{i, ri}, {j, rj}}, a, evaluations));
    }
  }
}

TEST(PairCorrelation, SweepBoundHoldsEverywhere) {
  const std::vector<PairCorrelation> pairs = PairCorrelationSweep(2, RadiusSequence::Parse("powerlaw:1/4,1"), 14);
  ASSERT_EQ(pairs.size(), 14u * 13u / 2u);
  for (const PairCorrelation& p : pairs) {
    EXPECT_TRUE(p.bound_ok) << p.i << "," << p.j;
    const long g = oracle::Gcd(p.i, p.j);
    EXPECT_EQ(p.bound, Rational(2) / Rational(Pow(2, p.i + p.j - 2 * g)));
  }
  EXPECT_EQ(pairs.front().i, 1);
  EXPECT_EQ(pairs.front().j, 2);
}

TEST(PetrovRatio, EmptySumAtOne) {
  const PetrovSummary s = PetrovRatio(2, RadiusSequence::Parse("powerlaw:1/4,1"), 1, 1);
  EXPECT_EQ(s.S_N, 0);
  EXPECT_TRUE(s.pairs.empty());
}

TEST(PetrovRatio, BoundedByClosedSumWhichVanishesRelatively) {
  const RadiusSequence seq = RadiusSequence::Parse("powerlaw:1/4,1");
  Rational previous = -1;
  for (long N : {8L, 12L, 16L, 20L}) {
    const PetrovSummary s = PetrovRatio(2, seq, N, 1);
    EXPECT_LE(s.S_N, s.bound_sum);
    Rational sum = 0;
    for (long i = 1; i <= N; ++i) sum += Q(1, 2 * i);
    EXPECT_EQ(s.R_N, sum * sum);
    // S_N stays below a convergent sum while R_N grows like log^2 N.
    const Rational relative = s.bound_sum / s.R_N;
    EXPECT_LE(s.ratio.convert_to<double>(), relative.get_d() + 1e-12) << N;
    if (previous >= 0) EXPECT_LT(relative, previous) << N;
    previous = relative;
  }
}

TEST(EarSets, BoundsForEveryM) {
  for (const char* text : {"powerlaw:1/4,1", "powerlaw:1/3,1", "table:1/40,1/9,1/20,1/30"}) {
    const RadiusSequence seq = RadiusSequence::Parse(text);
    for (long m = 1; m <= 12; ++m) {
      if (std::string(text).rfind("table", 0) == 0 && m > 4) break;
      const EarSet c = BuildEarSet(2, m, seq);
      EXPECT_LE(c.measure, 2 * m * c.r_m) << text << " m=" << m;
      EXPECT_GE(1 - c.measure, 1 - 2 * c.r_m * m);
      EXPECT_EQ(c.measure, c.set.Measure());
    }
  }
}

TEST(EarSets, MembershipMatchesMinimumReturn) {
  const RadiusSequence seq = RadiusSequence::Parse("powerlaw:1/2,1");
  oracle::Rng rng(41);
  for (long m = 1; m <= 8; ++m) {
    const EarSet c = BuildEarSet(2, m, seq);
    for (int probe = 0; probe < 60; ++probe) {
      const Rational x = rng.Fraction(4000);
      bool hit = false, boundary = false;
      for (long k = 1; k <= m; ++k) {
        hit = hit || InEn(2, k, c.r_m, x);
        boundary = boundary || oracle::CircleDistance(oracle::TimesPower(2, x, k), x) == c.r_m;
      }
      // Arc endpoints are a null set; the union does not track them.
      if (boundary) continue;
      EXPECT_EQ(c.set.Contains(x), hit) << m << " x=" << x;
    }
  }
}

TEST(EarSets, ZeroRadiiGiveEmptySets) {
  const RadiusSequence zero = RadiusSequence::Parse("table:0,0,0,0,0,0");
  EXPECT_TRUE(BuildEarSet(2, 5, zero).set.empty());
  const EarTruncation a = EarTruncatedA(2, 1, 5, zero);
  EXPECT_TRUE(a.set.empty());
  EXPECT_EQ(a.measure, 0);
}

TEST(EarSets, TruncationsShrink) {
  const RadiusSequence seq = RadiusSequence::Parse("powerlaw:2,1");
  const EarTruncation a = EarTruncatedA(2, 3, 12, seq);
  ASSERT_EQ(a.measures_by_horizon.size(), 10u);
  for (std::size_t i = 1; i < a.measures_by_horizon.size(); ++i) {
    EXPECT_LE(a.measures_by_horizon[i], a.measures_by_horizon[i - 1]);
  }
  EXPECT_TRUE(EarTruncatedA(2, 3, 12, seq).set.IsSubsetOf(EarTruncatedA(2, 3, 11, seq).set));
}

double Simpson(double r, long l) {
  const int steps = 20000;
  const double h = 2 * r / steps;
  double sum = 0;
  for (int i = 0; i <= steps; ++i) {
    const double x = -r + i * h;
    const double w = (i == 0 || i == steps) ? 1 : (i % 2 ? 4 : 2);
    sum += w * std::cos(2 * std::numbers::pi * l * x);
  }
  return sum * h / 3;
}

TEST(FourierIndicatorCoeff, Examples) {
  EXPECT_NEAR(FourierIndicatorCoeff(Q(1, 4), 1).convert_to<double>(), 1 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(FourierIndicatorCoeff(Q(1, 4), 1).convert_to<double>(), Simpson(0.25, 1), 1e-12);
  EXPECT_LT(abs(FourierIndicatorCoeff(Q(1, 2), 1)), Real(1e-60));
  EXPECT_EQ(FourierIndicatorCoeff(Q(1, 7), 0), ToReal(Q(2, 7)));
  for (long l : {2L, 3L, -5L, 17L}) {
    EXPECT_NEAR(FourierIndicatorCoeff(Q(1, 7), l).convert_to<double>(), Simpson(1.0 / 7, l), 1e-9) << l;
  }
}

TEST(FourierIndicatorCoeff, DecayBound) {
  for (const Rational r : {Q(1, 10), Q(1, 7), Q(1, 3)}) {
    for (long l = -1000; l <= 1000; ++l) {
      if (l == 0) continue;
      const Real bound = 1 / (boost::math::constants::pi<Real>() * std::abs(l));
      EXPECT_LE(abs(FourierIndicatorCoeff(r, l)), bound) << r << " " << l;
    }
  }
}

}  // namespace
}  // namespace recurlab
