#ifndef RECURLAB_EXACT_RECURRENCE_H_
#define RECURLAB_EXACT_RECURRENCE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "recurlab/circle.h"
#include "recurlab/numeric.h"
#include "recurlab/radius.h"
#include "recurlab/system.h"

namespace recurlab {

inline constexpr std::uint64_t kDefaultArcBudget = std::uint64_t{1} << 22;

struct RecurrenceSetResult {
  long n = 1;
  Rational r;
  IntervalSet set;
  Rational measure;
  std::size_t arc_count = 0;
};

// E_n = {x : d(T^n x, x) < r} for T x = a x mod 1: arcs of radius r/|a^n - 1|
// around the |a^n - 1| fixed points of T^n. r >= 1/2 gives the full circle.
RecurrenceSetResult BuildRecurrenceSet(long a, long n, const Rational& r,
                                       std::uint64_t arc_budget = kDefaultArcBudget);

// mu(E_n) by the same arc construction, streamed in 128-bit integers so
// sets far larger than memory can be measured exactly.
Rational RecurrenceSetMeasure(long a, long n, const Rational& r, std::uint64_t arc_budget = kDefaultArcBudget);

// Maximal affine piece of T^n: T^n x = slope x + intercept on [left, right).
using AffinePiece = ExactBranch;

// Pieces of T^n obtained by composing branch words, in increasing order.
std::vector<AffinePiece> ComposeBranches(const SystemSpec& system, long n,
                                         std::uint64_t piece_budget = kDefaultArcBudget);

// E_n = {x : d(T^n x, x) < r} for a piecewise-linear expanding map, solved
// branch by branch of T^n. The interval metric is |y - x|; kCircle measures
// distance mod 1, which is what a circle map written in branches needs.
RecurrenceSetResult BuildRecurrenceSetPiecewise(const SystemSpec& system, long n, const Rational& r,
                                                std::uint64_t piece_budget = kDefaultArcBudget,
                                                Metric metric = Metric::kInterval);

struct BranchRatio {
  Rational max_ratio;    // max over pieces I of |E_n ∩ I| / (|I| r)
  Rational claim_bound;  // max over pieces of 2 |s| / ((|s| - 1) |T^n(I)|)
  std::size_t pieces = 0;
};

BranchRatio BranchRatioCheck(const SystemSpec& system, long n, const Rational& r,
                             std::uint64_t piece_budget = kDefaultArcBudget);

// mu(E_i ∩ E_j) for T x = a x mod 1, computed without materialising the sets
// whenever the common denominator fits in 128 bits.
Rational RecurrenceIntersectionMeasure(long a, long i, const Rational& r_i, long j, const Rational& r_j,
                                       std::uint64_t arc_budget = kDefaultArcBudget);

struct PairCorrelation {
  long i = 0, j = 0;
  Rational intersection;  // mu(E_i ∩ E_j)
  Rational excess;        // intersection - mu(E_i) mu(E_j)
  Rational bound;         // 2 |a|^(2p - (i + j)), p = gcd(i, j)
  bool bound_ok = false;
};

PairCorrelation ComputePairCorrelation(long a, long i, long j, const Rational& r_i, const Rational& r_j,
                                       std::uint64_t arc_budget = kDefaultArcBudget);

// Every pair 1 <= i < j <= N, ordered by (i, j); evaluated in parallel.
std::vector<PairCorrelation> PairCorrelationSweep(long a, const RadiusSequence& seq, long N,
                                                  std::uint64_t arc_budget = kDefaultArcBudget);

// Columns i,j then numerator/denominator and decimal of each quantity.
std::string PairCorrelationCsv(const std::vector<PairCorrelation>& pairs);

struct PetrovSummary {
  long N = 0;
  Rational H = 1;
  Rational S_N;          // sum_{i<j} (mu(E_i ∩ E_j) - H mu(E_i) mu(E_j))
  Rational R_N;          // (sum_{i<=N} mu(E_i))^2
  Rational bound_sum;    // sum_{i<j} 2 |a|^(2p - (i + j))
  Real ratio = 0;        // S_N / R_N, 0 when R_N = 0
  std::vector<PairCorrelation> pairs;
};

PetrovSummary PetrovRatio(long a, const RadiusSequence& seq, long N, const Rational& H,
                          std::uint64_t arc_budget = kDefaultArcBudget);

struct EarSet {
  long m = 1;
  Rational r_m;
  IntervalSet set;   // C_m = union_{k=1}^m E_{k,m}
  Rational measure;
};

EarSet BuildEarSet(long a, long m, const RadiusSequence& seq, std::uint64_t arc_budget = kDefaultArcBudget);

struct EarTruncation {
  long n0 = 1, M = 1;
  IntervalSet set;  // A_{n0,M} = intersection_{m=n0}^M C_m
  Rational measure;
  std::vector<Rational> measures_by_horizon;  // mu(A_{n0,m}) for m = n0..M
};

EarTruncation EarTruncatedA(long a, long n0, long M, const RadiusSequence& seq,
                            std::uint64_t arc_budget = kDefaultArcBudget);

// Fourier coefficient of the indicator of {|x| < r} on the circle:
// sin(2 pi l r) / (pi l), and 2r at l = 0.
Real FourierIndicatorCoeff(const Rational& r, long l);

}  // namespace recurlab

#endif  // RECURLAB_EXACT_RECURRENCE_H_
