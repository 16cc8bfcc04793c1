#ifndef RECURLAB_EXPERIMENTS_H_
#define RECURLAB_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recurlab/exact_recurrence.h"
#include "recurlab/orbit.h"
#include "recurlab/radius.h"
#include "recurlab/stats.h"
#include "recurlab/system.h"

namespace recurlab {

struct ExperimentOptions {
  std::uint64_t seed = 1;
  unsigned precision_cap = 0;  // 0: no cap on fixed-point bits
  std::uint64_t arc_budget = kDefaultArcBudget;
  int ulam_bins = 4096;        // density used to sample non-Lebesgue systems
};

struct Estimate {
  long successes = 0;
  long samples = 0;
  double value = 0;
  ConfidenceInterval ci;

  double ci_width() const { return ci.high - ci.low; }
};

Estimate MakeEstimate(long successes, long samples);

// Lebesgue for circle, toral and rotation systems, otherwise the Ulam
// density of the system (cached per system and bin count).
SampleMeasure InvariantSampleMeasure(const SystemSpec& system, int ulam_bins);

// mu(B(x, r)) for Lebesgue: 2r on the circle/interval, pi r^2 on T^2, ...
double LebesgueBallMeasure(int dimension, double r);

// Fraction of x with d(T^n x, x) < r_n for some n in [k, N].
Estimate RioTruncatedMeasure(const SystemSpec& system, const RadiusSequence& seq, long k, long N, long M,
                             const ExperimentOptions& options = {});

// Exact mu(union_{n=k}^N E_n) for T x = a x mod 1.
Rational RioExactMeasure(long a, const RadiusSequence& seq, long k, long N,
                         std::uint64_t arc_budget = kDefaultArcBudget);

// sum_{n=k}^N min(1, c mu_Leb(B(x, r_n))): the easy Borel-Cantelli bound.
double RioTailBound(const SystemSpec& system, const RadiusSequence& seq, long k, long N, double c = 1.0);

struct DichotomyResult {
  Estimate convergent;
  Estimate divergent;
  double separation = 0;
  double tail_bound = 0;          // for the convergent sequence
  bool convergent_within_tail = false;  // estimate <= tail + 3 CI widths
  bool divergent_asserted = true; // false when some eigenvalue lies inside the unit circle
};

DichotomyResult RioDichotomy(const SystemSpec& system, const RadiusSequence& convergent,
                             const RadiusSequence& divergent, long k, long N, long M,
                             const ExperimentOptions& options = {});

struct RateScanRow {
  double theta = 0;
  Estimate estimate;
  double tail_bound = 0;
  std::string verdict;  // consistent | inconsistent | open
};

struct RateScan {
  bool hypotheses_ok = true;
  std::string warning;
  std::vector<RateScanRow> rows;
};

inline constexpr double kHighEstimate = 0.9;

RateScan RecurrenceRateScan(const SystemSpec& system, const std::vector<double>& thetas, const Rational& kappa,
                            long k, long N, long M, const ExperimentOptions& options = {});

// Fraction of x with min_{1<=k<=m} d(T^k x, x) < r_m for every m in [n0, horizon].
Estimate EarTruncatedMeasure(const SystemSpec& system, const RadiusSequence& seq, long n0, long horizon, long M,
                             const ExperimentOptions& options = {});

EarTruncation EarExact(long a, const RadiusSequence& seq, long n0, long horizon,
                       std::uint64_t arc_budget = kDefaultArcBudget);

struct EarBoundRow {
  long m = 0;
  double delta = 0;
  bool hypothesis_ok = false;  // m^(2+sigma) / Delta_m * 2^(-Delta_m) <= 1
  Rational r_m;
  Rational complement_measure;  // mu of the complement of C_m
  double epsilon = 0;           // m^-(1+sigma)
  bool bound_holds = false;
  bool verdict_required = false;  // m >= onset
};

struct EarBoundCheck {
  std::vector<EarBoundRow> rows;
  std::optional<long> observed_onset;  // first m after which the bound holds throughout
  bool pass = true;                    // bound holds at every required m
};

EarBoundCheck CheckEarBound(const RadiusSequence& seq, double sigma, const std::vector<long>& m_grid,
                             long onset, std::uint64_t arc_budget = kDefaultArcBudget);

struct BoshernitzanRow {
  double alpha = 0;
  std::vector<long> checkpoints;
  std::vector<double> medians;
  long excluded = 0;  // samples with statistic 0 (periodic start)
  std::string verdict;
  bool pass = true;
};

BoshernitzanRow BoshernitzanScan(const SystemSpec& system, double alpha, const std::vector<long>& checkpoints,
                                 long M, const ExperimentOptions& options = {});

struct SandwichRow {
  long n = 0;
  Estimate estimate;
  double r = 0;
  double lower = 0;  // c^-1 r_n - C e^(-tau n)
  double upper = 0;  // 2 c r_n + C e^(-tau n)
  bool inside = false;
};

struct Sandwich {
  double c = 1, C = 0, tau = 0;
  std::vector<SandwichRow> rows;
  double fraction_inside = 0;
};

// Monte Carlo mu(E_n), n = 1..n_max, sampled from the Ulam density, against
// the measure lemma's bounds with Ulam c and fitted (C, tau).
Sandwich MeasureSandwich(const SystemSpec& system, const RadiusSequence& seq, long n_max, long M,
                         const ExperimentOptions& options = {});

}  // namespace recurlab

#endif  // RECURLAB_EXPERIMENTS_H_
