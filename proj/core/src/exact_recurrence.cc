#include "recurlab/exact_recurrence.h"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <numeric>

#include "recurlab/error.h"
#include "recurlab/stats.h"

namespace recurlab {

namespace mp = boost::multiprecision;

namespace {

using int128 = __int128;

Integer AbsMersenne(long a, long n) { return abs(Pow(a, static_cast<unsigned long>(n)) - 1); }

void CheckBudget(const Integer& count, std::uint64_t budget, const std::string& what) {
  if (count > Integer(static_cast<unsigned long>(budget))) {
    Fail(ErrorCode::kBudgetExceeded, what + " needs " + count.get_str() + " arcs, over the arc budget of " +
                                         std::to_string(budget) + " (raise --budget-arcs)");
  }
}

Rational SingleMeasure(const Rational& r) {
  const Rational twice = 2 * r;
  return twice >= 1 ? Rational(1) : twice;
}

bool FitsInt128(const Integer& value) { return mpz_sizeinbase(value.get_mpz_t(), 2) <= 120; }

int128 ToInt128(const Integer& value) {
  const Integer magnitude = abs(value);
  Integer high = magnitude >> 64;
  Integer low = magnitude - (high << 64);
  int128 out = (static_cast<int128>(high.get_ui()) << 64) | static_cast<int128>(low.get_ui());
  return value < 0 ? -out : out;
}

Integer FromInt128(int128 value) {
  const bool negative = value < 0;
  unsigned __int128 magnitude = negative ? -static_cast<unsigned __int128>(value) : value;
  Integer high(static_cast<unsigned long>(magnitude >> 64));
  Integer low(static_cast<unsigned long>(magnitude & 0xffffffffffffffffULL));
  Integer out = (high << 64) + low;
  return negative ? Integer(-out) : out;
}

Rational Length(const Rational& left, const Rational& right) { return right > left ? Rational(right - left) : Rational(0); }

void RequireRadius(const Rational& r) { Require(r >= 0, "radius must be non-negative"); }

}  // namespace

RecurrenceSetResult BuildRecurrenceSet(long a, long n, const Rational& r, std::uint64_t arc_budget) {
  if (std::abs(a) <= 1) Fail(ErrorCode::kNonExpanding, "circle map needs |a| >= 2 (got a = " + std::to_string(a) + ")");
  Require(n >= 1, "recurrence set needs n >= 1");
  RequireRadius(r);
  RecurrenceSetResult result;
  result.n = n;
  result.r = r;
  const Integer D = AbsMersenne(a, n);
  if (r == 0) {
    result.measure = 0;
    return result;
  }
  if (2 * r >= 1) {
    result.set = IntervalSet::Full();
    result.measure = 1;
    result.arc_count = 1;
    return result;
  }
  CheckBudget(D, arc_budget, "E_" + std::to_string(n));
  const unsigned long count = D.get_ui();
  const Rational half = r / Rational(D);
  std::vector<Arc> pieces;
  pieces.reserve(count + 1);
  pieces.push_back({0, half});
  for (unsigned long j = 1; j < count; ++j) {
    Rational center(Integer(j), D);
    center.canonicalize();
    pieces.push_back({center - half, center + half});
  }
  pieces.push_back({1 - half, 1});
  result.set = IntervalSet::FromSortedPieces(std::move(pieces));
  result.measure = result.set.Measure();
  result.arc_count = result.set.ArcCount();
  return result;
}

Rational RecurrenceSetMeasure(long a, long n, const Rational& r, std::uint64_t arc_budget) {
  if (std::abs(a) <= 1) Fail(ErrorCode::kNonExpanding, "circle map needs |a| >= 2 (got a = " + std::to_string(a) + ")");
  Require(n >= 1, "recurrence set needs n >= 1");
  RequireRadius(r);
  if (r == 0) return 0;
  if (2 * r >= 1) return 1;
  const Integer D = AbsMersenne(a, n);
  CheckBudget(D, arc_budget, "E_" + std::to_string(n));
  const Integer scale = D * r.get_den();
  if (!FitsInt128(scale * 4)) return BuildRecurrenceSet(a, n, r, arc_budget).measure;
  // Arc j is [j q - p, j q + p) in units of 1 / (D q); arc 0 wraps.
  const int128 q = ToInt128(r.get_den()), p = ToInt128(r.get_num()), period = ToInt128(scale);
  const long count = D.get_si();
  int128 total = 0, lo = 0, hi = p;
  auto flush = [&](int128 left, int128 right) {
    if (left <= hi) {
      hi = std::max(hi, right);
    } else {
      total += hi - lo;
      lo = left;
      hi = right;
    }
  };
  for (long j = 1; j < count; ++j) flush(j * q - p, j * q + p);
  flush(period - p, period);
  total += hi - lo;
  Rational measure(FromInt128(total), scale);
  measure.canonicalize();
  return measure;
}

std::vector<AffinePiece> ComposeBranches(const SystemSpec& system, long n, std::uint64_t piece_budget) {
  Require(n >= 1, "branch composition needs n >= 1");
  Require(system.HasExactBranches(), "exact branch composition needs rational branch data");
  const std::vector<ExactBranch> branches = system.ExactBranches();
  for (const ExactBranch& b : branches) {
    if (Abs(b.slope) <= 1) {
      Fail(ErrorCode::kNonExpanding, "branch [" + ToString(b.left) + ", " + ToString(b.right) + ") has slope " +
                                         ToString(b.slope) + " with modulus <= 1");
    }
  }
  std::vector<AffinePiece> pieces = branches;
  for (long step = 2; step <= n; ++step) {
    std::vector<AffinePiece> next;
    for (const AffinePiece& piece : pieces) {
      std::vector<AffinePiece> local;
      const Rational y0 = piece.slope * piece.left + piece.intercept;
      const Rational y1 = piece.slope * piece.right + piece.intercept;
      const Rational lo = std::min(y0, y1), hi = std::max(y0, y1);
      for (const ExactBranch& b : branches) {
        if (b.right <= lo || b.left >= hi) continue;
        // Preimage of [b.left, b.right) under the piece, clipped to its domain.
        Rational x0 = (b.left - piece.intercept) / piece.slope;
        Rational x1 = (b.right - piece.intercept) / piece.slope;
        if (x0 > x1) std::swap(x0, x1);
        x0 = std::max(x0, piece.left);
        x1 = std::min(x1, piece.right);
        if (x0 >= x1) continue;
        local.push_back({x0, x1, b.slope * piece.slope, b.slope * piece.intercept + b.intercept});
      }
      std::sort(local.begin(), local.end(), [](const AffinePiece& p, const AffinePiece& q) { return p.left < q.left; });
      for (AffinePiece& p : local) next.push_back(std::move(p));
      if (next.size() > piece_budget) {
        Fail(ErrorCode::kBudgetExceeded, "T^" + std::to_string(step) + " has more than " +
                                             std::to_string(piece_budget) + " branches (branch-count limit)");
      }
    }
    pieces = std::move(next);
  }
  return pieces;
}

namespace {

// Solution interval of |s x + b - x - k| < r inside the piece.
Arc SolvePiece(const AffinePiece& piece, const Rational& r, const Integer& k = 0) {
  const Rational drift = piece.slope - 1;
  Rational x0 = (k - r - piece.intercept) / drift;
  Rational x1 = (k + r - piece.intercept) / drift;
  if (x0 > x1) std::swap(x0, x1);
  return {std::max(x0, piece.left), std::min(x1, piece.right)};
}

// Solutions of d(s x + b, x) < r for the circle metric, in increasing x.
void SolvePieceOnCircle(const AffinePiece& piece, const Rational& r, std::vector<Arc>& out) {
  const Rational drift = piece.slope - 1;
  const Rational at_left = drift * piece.left + piece.intercept;
  const Rational at_right = drift * piece.right + piece.intercept;
  const Rational low = std::min(at_left, at_right), high = std::max(at_left, at_right);
  const Integer first = Floor(low - r).get_num(), last = Floor(high + r).get_num() + 1;
  std::vector<Arc> found;
  for (Integer k = first; k <= last; ++k) {
    Arc solution = SolvePiece(piece, r, k);
    if (solution.left < solution.right) found.push_back(std::move(solution));
  }
  if (drift < 0) std::reverse(found.begin(), found.end());
  for (Arc& arc : found) out.push_back(std::move(arc));
}

}  // namespace

RecurrenceSetResult BuildRecurrenceSetPiecewise(const SystemSpec& system, long n, const Rational& r,
                                                std::uint64_t piece_budget, Metric metric) {
  Require(metric != Metric::kTorus, "piecewise recurrence sets live on [0, 1]");
  RequireRadius(r);
  RecurrenceSetResult result;
  result.n = n;
  result.r = r;
  std::vector<Arc> pieces;
  for (const AffinePiece& piece : ComposeBranches(system, n, piece_budget)) {
    if (metric == Metric::kCircle) {
      SolvePieceOnCircle(piece, r, pieces);
      continue;
    }
    Arc solution = SolvePiece(piece, r);
    if (solution.left < solution.right) pieces.push_back(std::move(solution));
  }
  result.set = IntervalSet::FromSortedPieces(std::move(pieces));
  result.measure = result.set.Measure();
  result.arc_count = result.set.ArcCount();
  return result;
}

BranchRatio BranchRatioCheck(const SystemSpec& system, long n, const Rational& r, std::uint64_t piece_budget) {
  Require(r > 0, "branch ratio needs r > 0");
  BranchRatio ratio;
  ratio.max_ratio = 0;
  ratio.claim_bound = 0;
  for (const AffinePiece& piece : ComposeBranches(system, n, piece_budget)) {
    ++ratio.pieces;
    const Rational width = piece.right - piece.left;
    const Arc solution = SolvePiece(piece, r);
    const Rational value = Length(solution.left, solution.right) / (width * r);
    ratio.max_ratio = std::max(ratio.max_ratio, value);
    const Rational s = Abs(piece.slope);
    const Rational bound = 2 * s / ((s - 1) * s * width);
    ratio.claim_bound = std::max(ratio.claim_bound, bound);
  }
  return ratio;
}

Rational RecurrenceIntersectionMeasure(long a, long i, const Rational& r_i, long j, const Rational& r_j,
                                       std::uint64_t arc_budget) {
  if (std::abs(a) <= 1) Fail(ErrorCode::kNonExpanding, "circle map needs |a| >= 2");
  RequireRadius(r_i);
  RequireRadius(r_j);
  if (r_i == 0 || r_j == 0) return 0;
  if (2 * r_i >= 1) return SingleMeasure(r_j);
  if (2 * r_j >= 1) return SingleMeasure(r_i);
  const Integer d1 = AbsMersenne(a, i), d2 = AbsMersenne(a, j);
  CheckBudget(d1, arc_budget, "E_" + std::to_string(i));
  CheckBudget(d2, arc_budget, "E_" + std::to_string(j));
  const Integer p1 = r_i.get_num(), q1 = r_i.get_den();
  const Integer p2 = r_j.get_num(), q2 = r_j.get_den();
  const Integer scale1 = d2 * q2, scale2 = d1 * q1;
  const Integer common = scale1 * scale2;  // d1 q1 d2 q2
  if (!FitsInt128(common * 4)) {
    return IntersectionMeasure(BuildRecurrenceSet(a, i, r_i, arc_budget).set,
                               BuildRecurrenceSet(a, j, r_j, arc_budget).set);
  }
  // Arcs unrolled on the line in units of 1/common. One period of E_i
  // against every E_j arc that can reach it; a wide E_i arc spans many.
  const int128 s1 = ToInt128(scale1), s2 = ToInt128(scale2);
  const int128 P1 = ToInt128(p1), Q1 = ToInt128(q1), P2 = ToInt128(p2), Q2 = ToInt128(q2);
  const long count1 = d1.get_si();
  int128 total = 0;
  long k = 0, m = Floor(-Rational(d2) * r_i / Rational(d1) - r_j).get_num().get_si();
  while (k < count1) {
    const int128 left1 = (k * Q1 - P1) * s1, right1 = (k * Q1 + P1) * s1;
    const int128 left2 = (m * Q2 - P2) * s2, right2 = (m * Q2 + P2) * s2;
    const int128 lo = std::max(left1, left2), hi = std::min(right1, right2);
    if (lo < hi) total += hi - lo;
    if (right1 < right2) {
      ++k;
    } else {
      ++m;
    }
  }
  Rational measure(FromInt128(total), common);
  measure.canonicalize();
  return measure;
}

PairCorrelation ComputePairCorrelation(long a, long i, long j, const Rational& r_i, const Rational& r_j,
                                       std::uint64_t arc_budget) {
  Require(i >= 1 && j >= 1, "pair indices must be positive");
  Require(i != j, "pair correlation needs i != j");
  PairCorrelation pair;
  pair.i = i;
  pair.j = j;
  pair.intersection = RecurrenceIntersectionMeasure(a, i, r_i, j, r_j, arc_budget);
  pair.excess = pair.intersection - SingleMeasure(r_i) * SingleMeasure(r_j);
  const long p = std::gcd(i, j);
  pair.bound = Rational(Integer(2), Pow(std::abs(a), static_cast<unsigned long>(i + j - 2 * p)));
  pair.bound.canonicalize();
  pair.bound_ok = pair.excess <= pair.bound;
  return pair;
}

std::vector<PairCorrelation> PairCorrelationSweep(long a, const RadiusSequence& seq, long N, std::uint64_t arc_budget) {
  Require(N >= 1, "pair sweep needs N >= 1");
  std::vector<Rational> radii(N + 1);
  for (long n = 1; n <= N; ++n) radii[n] = seq.AsRational(n);
  std::vector<std::pair<long, long>> index;
  for (long i = 1; i <= N; ++i) {
    for (long j = i + 1; j <= N; ++j) index.emplace_back(i, j);
  }
  std::vector<PairCorrelation> pairs(index.size());
  // Largest pairs first keeps workers balanced; slots keep the (i, j) order.
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return index[x].first + index[x].second > index[y].first + index[y].second;
  });
  ParallelFor(order.size(), [&](std::size_t t) {
    const auto [i, j] = index[order[t]];
    pairs[order[t]] = ComputePairCorrelation(a, i, j, radii[i], radii[j], arc_budget);
  });
  return pairs;
}

std::string PairCorrelationCsv(const std::vector<PairCorrelation>& pairs) {
  std::string csv =
      "i,j,intersection_num,intersection_den,excess_num,excess_den,bound_num,bound_den,"
      "intersection,excess,bound,bound_ok\n";
  auto exact = [](const Rational& q) { return q.get_num().get_str() + "," + q.get_den().get_str(); };
  auto decimal = [](const Rational& q) { return ToDecimal(ToReal(q), 17); };
  for (const PairCorrelation& p : pairs) {
    csv += std::to_string(p.i) + "," + std::to_string(p.j) + "," + exact(p.intersection) + "," + exact(p.excess) +
           "," + exact(p.bound) + "," + decimal(p.intersection) + "," + decimal(p.excess) + "," +
           decimal(p.bound) + "," + (p.bound_ok ? "true" : "false") + "\n";
  }
  return csv;
}

PetrovSummary PetrovRatio(long a, const RadiusSequence& seq, long N, const Rational& H, std::uint64_t arc_budget) {
  Require(N >= 1, "Petrov ratio needs N >= 1");
  Require(H > 0, "Petrov ratio needs H > 0");
  PetrovSummary summary;
  summary.N = N;
  summary.H = H;
  summary.pairs = PairCorrelationSweep(a, seq, N, arc_budget);
  std::vector<Rational> mu(N + 1);
  Rational total = 0;
  for (long n = 1; n <= N; ++n) {
    mu[n] = SingleMeasure(seq.AsRational(n));
    total += mu[n];
  }
  summary.S_N = 0;
  summary.bound_sum = 0;
  for (const PairCorrelation& p : summary.pairs) {
    summary.S_N += p.intersection - H * mu[p.i] * mu[p.j];
    summary.bound_sum += p.bound;
  }
  summary.R_N = total * total;
  summary.ratio = summary.R_N > 0 ? ToReal(summary.S_N / summary.R_N) : Real(0);
  return summary;
}

EarSet BuildEarSet(long a, long m, const RadiusSequence& seq, std::uint64_t arc_budget) {
  if (std::abs(a) <= 1) Fail(ErrorCode::kNonExpanding, "circle map needs |a| >= 2");
  Require(m >= 1, "EAR set needs m >= 1");
  EarSet ear;
  ear.m = m;
  ear.r_m = seq.AsRational(m);
  if (ear.r_m == 0) {
    ear.measure = 0;
    return ear;
  }
  if (2 * ear.r_m >= 1) {
    ear.set = IntervalSet::Full();
    ear.measure = 1;
    return ear;
  }
  Integer total = 0;
  for (long k = 1; k <= m; ++k) total += AbsMersenne(a, k);
  CheckBudget(total, arc_budget, "C_" + std::to_string(m));
  for (long k = m; k >= 1; --k) {
    ear.set = ear.set.Union(BuildRecurrenceSet(a, k, ear.r_m, arc_budget).set);
  }
  ear.measure = ear.set.Measure();
  return ear;
}

EarTruncation EarTruncatedA(long a, long n0, long M, const RadiusSequence& seq, std::uint64_t arc_budget) {
  Require(n0 >= 1 && M >= n0, "EAR truncation needs 1 <= n0 <= M");
  EarTruncation truncation;
  truncation.n0 = n0;
  truncation.M = M;
  for (long m = n0; m <= M; ++m) {
    EarSet c = BuildEarSet(a, m, seq, arc_budget);
    truncation.set = m == n0 ? std::move(c.set) : truncation.set.Intersect(c.set);
    truncation.measures_by_horizon.push_back(truncation.set.Measure());
    if (truncation.set.empty()) {
      for (long rest = m + 1; rest <= M; ++rest) truncation.measures_by_horizon.push_back(0);
      break;
    }
  }
  truncation.measure = truncation.measures_by_horizon.back();
  return truncation;
}

Real FourierIndicatorCoeff(const Rational& r, long l) {
  Require(r > 0 && r <= Rational(1, 2), "Fourier coefficient needs 0 < r <= 1/2");
  if (l == 0) return ToReal(2 * r);
  const Real pi = boost::math::constants::pi<Real>();
  return mp::sin(2 * pi * l * ToReal(r)) / (pi * l);
}

}  // namespace recurlab
