#include "recurlab/circle.h"

#include <algorithm>
#include <sstream>

#include "recurlab/error.h"

namespace recurlab {

CirclePoint::CirclePoint(const Rational& value) : value_(Frac(value)) { value_.canonicalize(); }

Rational CircleDist(const CirclePoint& x, const CirclePoint& y) {
  Rational diff = Abs(x.value() - y.value());
  Rational wrapped = 1 - diff;
  return diff < wrapped ? diff : wrapped;
}

IntervalSet IntervalSet::Full() { return IntervalSet({Arc{0, 1}}); }

IntervalSet IntervalSet::FromArc(const Rational& left, const Rational& right) {
  return FromArcs({Arc{left, right}});
}

IntervalSet IntervalSet::FromArcs(const std::vector<Arc>& arcs) {
  std::vector<Arc> pieces;
  pieces.reserve(arcs.size() + 1);
  for (const Arc& arc : arcs) {
    Rational length = arc.right - arc.left;
    if (length <= 0) continue;
    if (length >= 1) return Full();
    Rational left = Frac(arc.left);
    Rational right = left + length;
    if (right <= 1) {
      pieces.push_back({left, right});
    } else {
      pieces.push_back({left, 1});
      pieces.push_back({0, right - 1});
    }
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Arc& a, const Arc& b) { return a.left < b.left; });
  std::vector<Arc> merged;
  merged.reserve(pieces.size());
  for (Arc& piece : pieces) {
    if (!merged.empty() && piece.left <= merged.back().right) {
      if (piece.right > merged.back().right) merged.back().right = std::move(piece.right);
    } else {
      merged.push_back(std::move(piece));
    }
  }
  return IntervalSet(std::move(merged));
}

IntervalSet IntervalSet::FromSortedPieces(std::vector<Arc> pieces) {
  std::vector<Arc> merged;
  merged.reserve(pieces.size());
  for (Arc& piece : pieces) {
    Require(piece.left >= 0 && piece.right <= 1, "piece outside [0,1]");
    if (piece.right <= piece.left) continue;
    if (!merged.empty()) {
      Require(piece.left >= merged.back().right, "pieces overlap or are unsorted");
      if (piece.left == merged.back().right) {
        merged.back().right = std::move(piece.right);
        continue;
      }
    }
    merged.push_back(std::move(piece));
  }
  return IntervalSet(std::move(merged));
}

bool IntervalSet::IsFull() const {
  return pieces_.size() == 1 && pieces_[0].left == 0 && pieces_[0].right == 1;
}

std::size_t IntervalSet::ArcCount() const {
  if (pieces_.size() >= 2 && pieces_.front().left == 0 && pieces_.back().right == 1) {
    return pieces_.size() - 1;
  }
  return pieces_.size();
}

Rational IntervalSet::Measure() const {
  mpq_t total, length;
  mpq_init(total);
  mpq_init(length);
  for (const Arc& piece : pieces_) {
    mpq_sub(length, piece.right.get_mpq_t(), piece.left.get_mpq_t());
    mpq_add(total, total, length);
  }
  Rational result(total);
  mpq_clear(total);
  mpq_clear(length);
  return result;
}

bool IntervalSet::Contains(const Rational& x) const {
  Rational point = Frac(x);
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), point,
                             [](const Rational& p, const Arc& arc) { return p < arc.left; });
  if (it == pieces_.begin()) return false;
  --it;
  return point < it->right;
}

IntervalSet IntervalSet::Union(const IntervalSet& other) const {
  std::vector<Arc> out;
  out.reserve(pieces_.size() + other.pieces_.size());
  std::size_t i = 0, j = 0;
  const auto& a = pieces_;
  const auto& b = other.pieces_;
  while (i < a.size() || j < b.size()) {
    const Arc* next;
    if (j >= b.size() || (i < a.size() && a[i].left <= b[j].left)) {
      next = &a[i++];
    } else {
      next = &b[j++];
    }
    if (!out.empty() && next->left <= out.back().right) {
      if (next->right > out.back().right) out.back().right = next->right;
    } else {
      out.push_back(*next);
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::Intersect(const IntervalSet& other) const {
  std::vector<Arc> out;
  std::size_t i = 0, j = 0;
  const auto& a = pieces_;
  const auto& b = other.pieces_;
  while (i < a.size() && j < b.size()) {
    const Rational& left = a[i].left < b[j].left ? b[j].left : a[i].left;
    const bool a_ends_first = a[i].right < b[j].right;
    const Rational& right = a_ends_first ? a[i].right : b[j].right;
    if (left < right) out.push_back({left, right});
    if (a_ends_first) {
      ++i;
    } else {
      ++j;
    }
  }
  // Pieces come from disjoint non-adjacent inputs, so two outputs can only
  // touch if both inputs touched; FromSortedPieces normalises anyway.
  return FromSortedPieces(std::move(out));
}

IntervalSet IntervalSet::Complement() const {
  std::vector<Arc> out;
  out.reserve(pieces_.size() + 1);
  Rational cursor = 0;
  for (const Arc& piece : pieces_) {
    if (cursor < piece.left) out.push_back({cursor, piece.left});
    cursor = piece.right;
  }
  if (cursor < 1) out.push_back({cursor, 1});
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::Rotate(const Rational& offset) const {
  std::vector<Arc> arcs;
  arcs.reserve(pieces_.size());
  for (const Arc& piece : pieces_) arcs.push_back({piece.left + offset, piece.right + offset});
  return FromArcs(arcs);
}

bool IntervalSet::IsSubsetOf(const IntervalSet& other) const {
  return Intersect(other) == *this;
}

std::string IntervalSet::ToText() const {
  std::string text;
  for (const Arc& piece : pieces_) {
    text += piece.left.get_num().get_str() + "/" + piece.left.get_den().get_str() + "," +
            piece.right.get_num().get_str() + "/" + piece.right.get_den().get_str() + "\n";
  }
  return text;
}

IntervalSet IntervalSet::FromText(std::string_view text) {
  std::vector<Arc> pieces;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) Fail(ErrorCode::kInvalidArgument, "bad arc line: '" + line + "'");
    pieces.push_back({ParseRational(line.substr(0, comma)), ParseRational(line.substr(comma + 1))});
  }
  return FromSortedPieces(std::move(pieces));
}

IntervalSet Union(const IntervalSet& a, const IntervalSet& b) { return a.Union(b); }
IntervalSet Intersect(const IntervalSet& a, const IntervalSet& b) { return a.Intersect(b); }
IntervalSet Complement(const IntervalSet& a) { return a.Complement(); }

Rational IntersectionMeasure(const IntervalSet& a_set, const IntervalSet& b_set) {
  const auto& a = a_set.pieces();
  const auto& b = b_set.pieces();
  mpq_t total, length;
  mpq_init(total);
  mpq_init(length);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const Rational& left = a[i].left < b[j].left ? b[j].left : a[i].left;
    const bool a_ends_first = a[i].right < b[j].right;
    const Rational& right = a_ends_first ? a[i].right : b[j].right;
    if (left < right) {
      mpq_sub(length, right.get_mpq_t(), left.get_mpq_t());
      mpq_add(total, total, length);
    }
    if (a_ends_first) {
      ++i;
    } else {
      ++j;
    }
  }
  Rational result(total);
  mpq_clear(total);
  mpq_clear(length);
  return result;
}

}  // namespace recurlab
