#ifndef RECURLAB_CIRCLE_H_
#define RECURLAB_CIRCLE_H_

#include <string>
#include <string_view>
#include <vector>

#include "recurlab/numeric.h"

namespace recurlab {

// A point of the circle R/Z, stored exactly in lowest terms in [0, 1).
class CirclePoint {
 public:
  CirclePoint() = default;
  explicit CirclePoint(const Rational& value);  // reduced mod 1

  const Rational& value() const { return value_; }
  bool operator==(const CirclePoint&) const = default;

 private:
  Rational value_ = 0;
};

// min(|x - y|, 1 - |x - y|), in [0, 1/2].
Rational CircleDist(const CirclePoint& x, const CirclePoint& y);

// Half-open piece [left, right) with 0 <= left < right <= 1.
struct Arc {
  Rational left;
  Rational right;

  Rational length() const { return right - left; }
  bool operator==(const Arc&) const = default;
};

// Finite union of half-open arcs of the circle, kept in canonical form:
// pieces lie in [0, 1], are sorted, pairwise disjoint and never adjacent.
// An arc through 0 is stored as the two pieces [0, a) and [b, 1); equality
// of sets is equality of the piece lists.
class IntervalSet {
 public:
  IntervalSet() = default;

  static IntervalSet Empty() { return {}; }
  static IntervalSet Full();

  // Arcs [left, right) on the circle; endpoints may be any rationals and
  // wrap mod 1. Arcs of length >= 1 cover the circle; empty arcs are dropped.
  static IntervalSet FromArcs(const std::vector<Arc>& arcs);
  static IntervalSet FromArc(const Rational& left, const Rational& right);

  // Pieces already inside [0, 1] and sorted by left endpoint with no
  // overlaps; adjacent pieces are merged. Checked.
  static IntervalSet FromSortedPieces(std::vector<Arc> pieces);

  const std::vector<Arc>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  bool IsFull() const;

  // Number of maximal circle arcs (a piece pair joined through 0 counts once).
  std::size_t ArcCount() const;

  Rational Measure() const;
  bool Contains(const Rational& x) const;  // x reduced mod 1

  IntervalSet Union(const IntervalSet& other) const;
  IntervalSet Intersect(const IntervalSet& other) const;
  IntervalSet Complement() const;
  IntervalSet Rotate(const Rational& offset) const;
  bool IsSubsetOf(const IntervalSet& other) const;

  // Canonical text: one "num/den,num/den" piece per line, ascending.
  std::string ToText() const;
  static IntervalSet FromText(std::string_view text);

  bool operator==(const IntervalSet&) const = default;

 private:
  explicit IntervalSet(std::vector<Arc> pieces) : pieces_(std::move(pieces)) {}
  std::vector<Arc> pieces_;
};

IntervalSet Union(const IntervalSet& a, const IntervalSet& b);
IntervalSet Intersect(const IntervalSet& a, const IntervalSet& b);
IntervalSet Complement(const IntervalSet& a);

// measure(a ∩ b) without materialising the intersection.
Rational IntersectionMeasure(const IntervalSet& a, const IntervalSet& b);

}  // namespace recurlab

#endif  // RECURLAB_CIRCLE_H_
