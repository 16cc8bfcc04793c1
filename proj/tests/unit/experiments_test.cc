#include <gtest/gtest.h>

#include <cmath>

#include "recurlab/error.h"
#include "recurlab/experiments.h"
#include "recurlab/stats.h"

namespace recurlab {
namespace {

const SystemSpec kDoubling = SystemSpec::Doubling();

RadiusSequence Seq(const char* text) { return RadiusSequence::Parse(text); }

ExperimentOptions Seeded(std::uint64_t seed) {
  ExperimentOptions options;
  options.seed = seed;
  return options;
}

// Wilson interval at 99%.
bool Within99(const Estimate& e, const Rational& exact) {
  const ConfidenceInterval ci = WilsonInterval(e.successes, e.samples, 2.5758293035489);
  return ci.low <= exact.get_d() && exact.get_d() <= ci.high;
}

TEST(RioTruncated, ConstantHalfRadiusCoversEverything) {
  const Estimate e = RioTruncatedMeasure(kDoubling, Seq("powerlaw:1/2,0"), 1, 1, 500);
  EXPECT_EQ(e.successes, 500);
  EXPECT_EQ(e.value, 1.0);
  EXPECT_LE(e.ci.high, 1.0);
}

TEST(RioTruncated, AgreesWithExactUnion) {
  struct Case {
    long a;
    const char* seq;
    long k, N;
  };
  for (const Case& c : {Case{2, "powerlaw:1/4,1", 3, 12}, Case{2, "powerlaw:1/2,1", 1, 10},
                        Case{3, "powerlaw:1/8,1", 2, 8}, Case{4, "powerlaw:1/16,1/2", 1, 6}}) {
    const SystemSpec system(IntegerCircleMap{c.a});
    const Rational exact = RioExactMeasure(c.a, Seq(c.seq), c.k, c.N);
    for (std::uint64_t seed : {1, 2, 3}) {
      const Estimate e = RioTruncatedMeasure(system, Seq(c.seq), c.k, c.N, 4000, Seeded(seed));
      EXPECT_TRUE(Within99(e, exact)) << c.a << " " << c.seq << " seed " << seed << ": " << e.value
                                      << " vs " << exact.get_d();
    }
  }
}

TEST(RioTruncated, EasyDirectionBound) {
  const RadiusSequence seq = Seq("powerlaw:1,2");
  const Estimate e = RioTruncatedMeasure(kDoubling, seq, 50, 2000, 2000, Seeded(4));
  const double tail = RioTailBound(kDoubling, seq, 50, 2000);
  EXPECT_NEAR(tail, 0.04, 0.001);
  EXPECT_LE(e.value, tail + 3 * e.ci_width());
}

TEST(RioTruncated, DivergentSequenceIsHigh) {
  const Estimate e = RioTruncatedMeasure(kDoubling, Seq("powerlaw:1/2,1"), 50, 5000, 2000, Seeded(7));
  EXPECT_GE(e.value, 0.9);
}

TEST(RioTruncated, MonotoneInWindow) {
  const RadiusSequence seq = Seq("powerlaw:1/4,1");
  long previous = -1;
  for (long N : {20, 40, 80, 160, 320}) {
    const Estimate e = RioTruncatedMeasure(kDoubling, seq, 10, N, 500, Seeded(5));
    EXPECT_GE(e.successes, previous) << N;
    previous = e.successes;
  }
  previous = 501;
  for (long k : {1, 2, 5, 10, 40}) {
    const Estimate e = RioTruncatedMeasure(kDoubling, seq, k, 320, 500, Seeded(5));
    EXPECT_LE(e.successes, previous) << k;
    previous = e.successes;
  }
}

TEST(RioTruncated, RejectsTooFewSamples) {
  EXPECT_THROW(RioTruncatedMeasure(kDoubling, Seq("powerlaw:1,1"), 1, 10, 99), Error);
}

TEST(Dichotomy, DoublingSeparates) {
  const DichotomyResult d =
      RioDichotomy(kDoubling, Seq("powerlog:1,2"), Seq("powerlaw:1/2,1"), 50, 5000, 2000, Seeded(11));
  EXPECT_GE(d.separation, 0.5);
  EXPECT_TRUE(d.convergent_within_tail);
  EXPECT_TRUE(d.divergent_asserted);
}

TEST(Dichotomy, ToralEigenvalueInsideCircleIsNotAsserted) {
  const DichotomyResult cat = RioDichotomy(SystemSpec::Parse("toral:2,1;1,1"), Seq("powerlaw:1/2,1"),
                                           Seq("powerlaw:1/2,1/2"), 5, 200, 200, Seeded(1));
  EXPECT_FALSE(cat.divergent_asserted);
  const DichotomyResult doubled = RioDichotomy(SystemSpec::Parse("toral:2,0;0,2"), Seq("powerlaw:1/2,1"),
                                               Seq("powerlaw:1/2,1/2"), 5, 200, 200, Seeded(1));
  EXPECT_TRUE(doubled.divergent_asserted);
  EXPECT_GT(doubled.divergent.value, doubled.convergent.value);
}

TEST(RateScan, VerdictsByRegime) {
  const RateScan scan = RecurrenceRateScan(kDoubling, {0.4, 0.75, 1.5}, 1, 50, 3000, 500, Seeded(3));
  ASSERT_TRUE(scan.hypotheses_ok);
  ASSERT_EQ(scan.rows.size(), 3u);
  EXPECT_EQ(scan.rows[0].verdict, "consistent");
  EXPECT_GE(scan.rows[0].estimate.value, kHighEstimate);
  EXPECT_EQ(scan.rows[1].verdict, "open");
  EXPECT_EQ(scan.rows[2].verdict, "consistent");
  EXPECT_LE(scan.rows[2].estimate.value, scan.rows[2].tail_bound + 3 * scan.rows[2].estimate.ci_width());
}

TEST(RateScan, StructuralCheckFlagsRotation) {
  const RateScan scan =
      RecurrenceRateScan(SystemSpec::Parse("rotation:golden-conjugate"), {1.5}, 1, 5, 50, 100, Seeded(3));
  EXPECT_FALSE(scan.hypotheses_ok);
  EXPECT_NE(scan.warning.find("structural"), std::string::npos);
  EXPECT_EQ(scan.rows.size(), 1u);
}

TEST(Ear, SquareRadiiVanish) {
  const RadiusSequence seq = Seq("powerlaw:1,2");
  std::vector<double> values;
  for (long n0 : {4, 16, 64}) {
    const Estimate e = EarTruncatedMeasure(kDoubling, seq, n0, 4 * n0, 1000, Seeded(2));
    values.push_back(e.value);
  }
  EXPECT_TRUE(Within99(EarTruncatedMeasure(kDoubling, seq, 4, 16, 1000, Seeded(2)), EarExact(2, seq, 4, 16).measure));
  EXPECT_LE(values.front(), 0.05);
  EXPECT_LE(values.back(), 0.01);
}

TEST(Ear, MatchesExactIntersection) {
  for (const char* text : {"ear:log;loglog", "powerlaw:1/3,1", "ear:log2s(1);const(1)"}) {
    const RadiusSequence seq = Seq(text);
    const EarTruncation exact = EarExact(2, seq, 4, 14);
    for (std::uint64_t seed : {1, 2}) {
      const Estimate e = EarTruncatedMeasure(kDoubling, seq, 4, 14, 4000, Seeded(seed));
      EXPECT_TRUE(Within99(e, exact.measure)) << text << ": " << e.value << " vs " << exact.measure.get_d();
    }
  }
}

TEST(Ear, MonotoneInHorizon) {
  const RadiusSequence seq = Seq("ear:log;loglog");
  long previous = 1001;
  for (long horizon : {10, 40, 160, 640}) {
    const Estimate e = EarTruncatedMeasure(kDoubling, seq, 10, horizon, 1000, Seeded(9));
    EXPECT_LE(e.successes, previous) << horizon;
    previous = e.successes;
  }
  const EarTruncation exact = EarExact(2, seq, 4, 16);
  for (std::size_t i = 1; i < exact.measures_by_horizon.size(); ++i) {
    EXPECT_LE(exact.measures_by_horizon[i], exact.measures_by_horizon[i - 1]);
  }
}

TEST(Ear, SlowlyShrinkingRadiiStayHigh) {
  const RadiusSequence slow = Seq("ear:log;loglog");
  const RadiusSequence fast = Seq("powerlaw:1,2");
  for (long n0 : {50, 200}) {
    const Estimate high = EarTruncatedMeasure(kDoubling, slow, n0, 2 * n0, 1000, Seeded(6));
    const Estimate low = EarTruncatedMeasure(kDoubling, fast, n0, 2 * n0, 1000, Seeded(6));
    EXPECT_GT(high.value, 0.5) << n0;
    EXPECT_GT(high.value, low.value + 0.4) << n0;
  }
}

TEST(Ear, ConstantOverMCannotBeFull) {
  for (const Rational c : {Rational(1, 4), Rational(2, 5), Rational(49, 100)}) {
    const RadiusSequence seq(PowerLaw{c, 1});
    for (long m = 2; m <= 12; ++m) {
      const EarTruncation single = EarExact(2, seq, m, m);
      EXPECT_LE(single.measure, 2 * c) << m;
    }
  }
}

TEST(EarBound, HypothesisAndOnset) {
  const EarBoundCheck check = CheckEarBound(Seq("ear:log2s(1);const(1)"), 1.0, {4, 8, 12, 16, 20}, 16);
  for (const EarBoundRow& row : check.rows) {
    EXPECT_TRUE(row.hypothesis_ok) << row.m;
    EXPECT_DOUBLE_EQ(row.delta, 3 * std::log2(static_cast<double>(row.m)));
    EXPECT_GE(row.complement_measure, 0);
    EXPECT_EQ(row.verdict_required, row.m >= 16);
  }
  bool required_hold = true;
  for (const EarBoundRow& row : check.rows) {
    if (row.verdict_required) required_hold = required_hold && row.bound_holds;
  }
  EXPECT_EQ(check.pass, required_hold);
}

TEST(EarBound, DegenerateRadiiHaveEmptyComplement) {
  const EarBoundCheck check = CheckEarBound(Seq("ear:const(64);const(1)"), 1.0, {2, 4, 8, 16}, 2);
  for (const EarBoundRow& row : check.rows) {
    EXPECT_GE(row.r_m, Rational(1, 2));
    EXPECT_EQ(row.complement_measure, 0);
    EXPECT_TRUE(row.bound_holds);
  }
  EXPECT_TRUE(check.pass);
}

TEST(Boshernitzan, ScanTrends) {
  const BoshernitzanRow two = BoshernitzanScan(kDoubling, 2.0, {100, 1000, 10000}, 1000, Seeded(1));
  EXPECT_TRUE(two.pass);
  EXPECT_EQ(two.verdict, "decreasing");
  EXPECT_LT(two.medians[2], two.medians[1]);
  EXPECT_LT(two.medians[1], two.medians[0]);
  const BoshernitzanRow one = BoshernitzanScan(kDoubling, 1.0, {100, 1000, 10000}, 1000, Seeded(1));
  EXPECT_TRUE(one.pass);
  EXPECT_EQ(one.verdict, "bounded");
}

TEST(Boshernitzan, PeriodicSamplesAreExcluded) {
  // Every point is fixed.
  EXPECT_THROW(BoshernitzanScan(SystemSpec::Parse("rotation:0"), 2.0, {10, 100}, 50), Error);
}

TEST(Sandwich, GoldenBetaMostlyInside) {
  const Sandwich s = MeasureSandwich(SystemSpec::GoldenBeta(), Seq("powerlaw:1/4,1"), 30, 2000, Seeded(1));
  EXPECT_GE(s.fraction_inside, 0.9);
  EXPECT_GT(s.c, 1.3);
  EXPECT_LT(s.c, 1.45);
  for (const SandwichRow& row : s.rows) EXPECT_LE(row.lower, row.upper);
}

TEST(Determinism, ThreadCountDoesNotChangeResults) {
  const RadiusSequence seq = Seq("powerlog:1,1/2");
  SetThreadCount(1);
  const Estimate a = RioTruncatedMeasure(SystemSpec::GoldenBeta(), seq, 5, 200, 300, Seeded(8));
  const BoshernitzanRow ba = BoshernitzanScan(kDoubling, 2.0, {10, 100}, 200, Seeded(8));
  SetThreadCount(4);
  const Estimate b = RioTruncatedMeasure(SystemSpec::GoldenBeta(), seq, 5, 200, 300, Seeded(8));
  const BoshernitzanRow bb = BoshernitzanScan(kDoubling, 2.0, {10, 100}, 200, Seeded(8));
  SetThreadCount(1);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(ba.medians, bb.medians);
}

TEST(SampleMeasure, LebesgueOnlyWhereInvariant) {
  EXPECT_TRUE(InvariantSampleMeasure(kDoubling, 256).bin_weights.empty());
  EXPECT_TRUE(InvariantSampleMeasure(SystemSpec::Parse("toral:2,1;1,1"), 256).bin_weights.empty());
  EXPECT_EQ(InvariantSampleMeasure(SystemSpec::GoldenBeta(), 256).bin_weights.size(), 256u);
}

TEST(LebesgueBall, Volumes) {
  EXPECT_DOUBLE_EQ(LebesgueBallMeasure(1, 0.1), 0.2);
  EXPECT_NEAR(LebesgueBallMeasure(2, 0.1), M_PI * 0.01, 1e-15);
  EXPECT_EQ(LebesgueBallMeasure(1, 0.7), 1.0);
}

}  // namespace
}  // namespace recurlab
