#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "oracle.h"
#include "recurlab/circle.h"
#include "recurlab/error.h"
#include "recurlab/radius.h"

namespace recurlab {
namespace {

Rational Q(long p, long q) {
  Rational x(p, q);
  x.canonicalize();
  return x;
}

TEST(CircleDist, Examples) {
  EXPECT_EQ(CircleDist(CirclePoint(0), CirclePoint(0)), 0);
  EXPECT_EQ(CircleDist(CirclePoint(Q(1, 10)), CirclePoint(Q(9, 10))), Q(1, 5));
  EXPECT_EQ(CircleDist(CirclePoint(Q(1, 3)), CirclePoint(Q(2, 3))), Q(1, 3));
}

TEST(CircleDist, ReducesModOne) {
  EXPECT_EQ(CirclePoint(Q(7, 3)).value(), Q(1, 3));
  EXPECT_EQ(CirclePoint(Q(-1, 4)).value(), Q(3, 4));
  EXPECT_EQ(CircleDist(CirclePoint(Q(-1, 10)), CirclePoint(Q(11, 10))), Q(1, 5));
}

TEST(CircleDist, PropertiesOnRandomPairs) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const Rational x = rng.Fraction(97), y = rng.Fraction(97);
    const Rational d = CircleDist(CirclePoint(x), CirclePoint(y));
    EXPECT_EQ(d, oracle::CircleDistance(x, y));
    EXPECT_LE(d, Q(1, 2));
    EXPECT_GE(d, 0);
    EXPECT_EQ(d == 0, x == y);
    EXPECT_EQ(d, CircleDist(CirclePoint(y), CirclePoint(x)));
  }
}

TEST(IntervalSet, IntersectWrappedArc) {
  const IntervalSet a = IntervalSet::FromArc(Q(-1, 10), Q(1, 10));
  ASSERT_EQ(a.pieces().size(), 2u);
  EXPECT_EQ(a.ArcCount(), 1u);
  const IntervalSet b = IntervalSet::FromArc(0, Q(1, 30));
  const IntervalSet c = Intersect(a, b);
  EXPECT_EQ(c, b);
  EXPECT_EQ(c.Measure(), Q(1, 30));
}

TEST(IntervalSet, UnionWithComplementIsFull) {
  const IntervalSet a = IntervalSet::FromArcs({{Q(1, 7), Q(2, 7)}, {Q(5, 6), Q(7, 6)}});
  const IntervalSet full = Union(a, Complement(a));
  EXPECT_TRUE(full.IsFull());
  EXPECT_EQ(full.Measure(), 1);
  EXPECT_TRUE(Intersect(a, Complement(a)).empty());
}

TEST(IntervalSet, CanonicalForm) {
  const IntervalSet merged = IntervalSet::FromArcs({{Q(1, 4), Q(1, 2)}, {Q(1, 2), Q(3, 4)}, {Q(1, 8), Q(3, 8)}});
  ASSERT_EQ(merged.pieces().size(), 1u);
  EXPECT_EQ(merged.pieces()[0].left, Q(1, 8));
  EXPECT_EQ(merged.pieces()[0].right, Q(3, 4));
  EXPECT_TRUE(IntervalSet::FromArc(Q(1, 3), Q(1, 3)).empty());
  EXPECT_TRUE(IntervalSet::FromArc(Q(1, 3), Q(5, 3)).IsFull());
  EXPECT_THROW(IntervalSet::FromSortedPieces({{Q(1, 2), Q(3, 4)}, {Q(1, 4), Q(1, 3)}}), Error);
}

TEST(IntervalSet, ContainsIsHalfOpen) {
  const IntervalSet a = IntervalSet::FromArc(Q(1, 4), Q(1, 2));
  EXPECT_TRUE(a.Contains(Q(1, 4)));
  EXPECT_FALSE(a.Contains(Q(1, 2)));
  EXPECT_TRUE(a.Contains(Q(5, 4)));
  const IntervalSet wrapped = IntervalSet::FromArc(Q(3, 4), Q(5, 4));
  EXPECT_TRUE(wrapped.Contains(0));
  EXPECT_FALSE(wrapped.Contains(Q(1, 4)));
}

IntervalSet RandomSet(oracle::Rng& rng, std::vector<std::pair<Rational, Rational>>* arcs = nullptr) {
  std::vector<Arc> list;
  const long count = rng.Between(0, 6);
  for (long i = 0; i < count; ++i) {
    const Rational left = rng.Fraction(60);
    const Rational length = Q(rng.Between(0, 40), 60);
    list.push_back({left, left + length});
    if (arcs) arcs->emplace_back(left, left + length);
  }
  return IntervalSet::FromArcs(list);
}

// Membership by checking each raw arc, independent of the canonical form.
bool InRawArcs(const std::vector<std::pair<Rational, Rational>>& arcs, const Rational& x) {
  for (const auto& [l, r] : arcs) {
    if (r - l >= 1) return true;
    const Rational offset = oracle::FracPart(x - l);
    if (offset < r - l) return true;
  }
  return false;
}

TEST(IntervalSet, InclusionExclusionOnRandomSets) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const IntervalSet a = RandomSet(rng), b = RandomSet(rng);
    EXPECT_EQ(Intersect(a, b).Measure() + Union(a, b).Measure(), a.Measure() + b.Measure());
    EXPECT_EQ(IntersectionMeasure(a, b), Intersect(a, b).Measure());
    EXPECT_EQ(Complement(a).Measure(), 1 - a.Measure());
    EXPECT_TRUE(Intersect(a, b).IsSubsetOf(a));
    EXPECT_TRUE(a.IsSubsetOf(Union(a, b)));
  }
}

TEST(IntervalSet, MeasureInvariantUnderRotation) {
  oracle::Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const IntervalSet a = RandomSet(rng);
    const Rational offset = rng.Fraction(120);
    const IntervalSet rotated = a.Rotate(offset);
    EXPECT_EQ(rotated.Measure(), a.Measure());
    EXPECT_EQ(rotated.Rotate(-offset), a);
  }
}

TEST(IntervalSet, MembershipMatchesRawArcs) {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<Rational, Rational>> arcs;
    const IntervalSet a = RandomSet(rng, &arcs);
    for (int probe = 0; probe < 20; ++probe) {
      const Rational x = rng.Fraction(240);
      EXPECT_EQ(a.Contains(x), InRawArcs(arcs, x));
    }
  }
}

TEST(IntervalSet, TextRoundTrip) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const IntervalSet a = RandomSet(rng);
    EXPECT_EQ(IntervalSet::FromText(a.ToText()), a);
  }
  EXPECT_THROW(IntervalSet::FromText("1/2 3/4\n"), Error);
}

TEST(RadiusSequence, Examples) {
  EXPECT_EQ(*RadiusSequence::Parse("powerlaw:1/2,1").Evaluate(10).exact, Q(1, 20));
  EXPECT_EQ(*RadiusSequence::Parse("table:1/2,1/4").Evaluate(2).exact, Q(1, 4));
  const RadiusValue v = RadiusSequence::Parse("powerlog:1,1/2").Evaluate(7);
  EXPECT_FALSE(v.exact.has_value());
  EXPECT_NEAR(v.value.convert_to<double>(), 1.0 / (7.0 * std::sqrt(std::log(7.0))), 1e-15);
}

TEST(RadiusSequence, PowerLogUsesOneForSmallN) {
  const RadiusSequence seq = RadiusSequence::Parse("powerlog:1,2");
  EXPECT_EQ(*seq.Evaluate(1).exact, 1);
  EXPECT_EQ(*seq.Evaluate(2).exact, Q(1, 2));
  EXPECT_FALSE(seq.Evaluate(3).exact.has_value());
}

TEST(RadiusSequence, DyadicRoundingIsBelow) {
  const RadiusSequence seq = RadiusSequence::Parse("powerlog:1,1/2");
  const Real ulp = boost::multiprecision::ldexp(Real(1), -64);
  for (long n = 3; n < 40; ++n) {
    const Rational r = seq.AsRational(n);
    EXPECT_EQ(mpz_class((mpz_class(1) << 64) % r.get_den()), 0);
    const Real exact = seq.Evaluate(n).value;
    EXPECT_LE(ToReal(r), exact);
    EXPECT_LT(exact - ToReal(r), ulp);
  }
}

TEST(RadiusSequence, RejectsBadParameters) {
  EXPECT_THROW(RadiusSequence::Parse("powerlog:1,-1"), Error);
  EXPECT_THROW(RadiusSequence::Parse("powerlaw:0,1"), Error);
  EXPECT_THROW(RadiusSequence::Parse("table:"), Error);
  EXPECT_THROW(RadiusSequence::Parse("spiral:1"), Error);
}

TEST(RadiusSequence, ToStringRoundTrips) {
  for (const char* text : {"powerlaw:1/2,1", "powerlog:1,2/5", "table:1/2,1/4", "ear:log2s(1);const(1)",
                           "ear:log;loglog"}) {
    const RadiusSequence seq = RadiusSequence::Parse(text);
    EXPECT_EQ(RadiusSequence::Parse(seq.ToString()).ToString(), seq.ToString()) << text;
  }
}

}  // namespace
}  // namespace recurlab
