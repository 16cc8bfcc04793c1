#include "recurlab/experiments.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "recurlab/error.h"
#include "recurlab/transfer_operator.h"

namespace recurlab {

namespace {

bool LebesgueInvariant(const SystemSpec& system) {
  return system.Is<IntegerCircleMap>() || system.Is<ToralLinear>() || system.Is<Rotation>();
}

void CheckPrecision(const SystemSpec& system, long horizon, const ExperimentOptions& options) {
  if (options.precision_cap == 0) return;
  if (auto* circle = std::get_if<IntegerCircleMap>(&system.variant())) {
    const long a = circle->a;
    if (a >= 2 && (a & (a - 1)) == 0) return;  // bits drawn lazily
  }
  const unsigned needed = RequiredPrecision(system, horizon);
  if (needed > options.precision_cap) {
    Fail(ErrorCode::kPrecisionExhausted, "horizon " + std::to_string(horizon) + " needs " + std::to_string(needed) +
                                             " precision bits, over the cap of " +
                                             std::to_string(options.precision_cap) + " (raise --precision-bits)");
  }
}

double SmallestEigenvalueModulus(const ToralLinear& toral) {
  Eigen::MatrixXd dense(toral.dimension, toral.dimension);
  for (int r = 0; r < toral.dimension; ++r) {
    for (int c = 0; c < toral.dimension; ++c) dense(r, c) = static_cast<double>(toral.at(r, c));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
  double smallest = INFINITY;
  for (int i = 0; i < toral.dimension; ++i) smallest = std::min(smallest, std::abs(solver.eigenvalues()[i]));
  return smallest;
}

double DensityConstant(const SystemSpec& system, int bins) {
  if (LebesgueInvariant(system)) return 1.0;
  return ComputeDensityBounds(BuildUlam(system, bins)).c;
}

std::vector<double> RadiusTable(const RadiusSequence& seq, long N) {
  std::vector<double> radii(N + 1, 0.0);
  for (long n = 1; n <= N; ++n) radii[n] = seq.Approx(n);
  return radii;
}

}  // namespace

Estimate MakeEstimate(long successes, long samples) {
  Estimate e;
  e.successes = successes;
  e.samples = samples;
  e.value = static_cast<double>(successes) / samples;
  e.ci = WilsonInterval(successes, samples);
  return e;
}

SampleMeasure InvariantSampleMeasure(const SystemSpec& system, int ulam_bins) {
  if (LebesgueInvariant(system)) return SampleMeasure::Lebesgue();
  static std::mutex mutex;
  static std::map<std::pair<std::string, int>, SampleMeasure> cache;
  const auto key = std::make_pair(system.ToString(), ulam_bins);
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const UlamOperator op = BuildUlam(system, ulam_bins);
  SampleMeasure measure;
  measure.bin_weights = op.density;
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, measure);
  return measure;
}

double LebesgueBallMeasure(int dimension, double r) {
  const double volume = std::pow(M_PI, dimension / 2.0) / std::tgamma(dimension / 2.0 + 1.0) * std::pow(r, dimension);
  return std::min(1.0, volume);
}

Estimate RioTruncatedMeasure(const SystemSpec& system, const RadiusSequence& seq, long k, long N, long M,
                             const ExperimentOptions& options) {
  Require(k >= 1 && N >= k, "truncated R_io needs 1 <= k <= N");
  Require(M >= 100, "truncated R_io needs M >= 100 samples");
  CheckPrecision(system, N, options);
  const std::vector<double> radii = RadiusTable(seq, N);
  const SampleMeasure measure = InvariantSampleMeasure(system, options.ulam_bins);
  std::vector<char> hit(M, 0);
  ParallelFor(M, [&](std::size_t s) {
    auto cursor = MakeSampledCursor(system, measure, options.seed, s, N);
    for (long n = 1; n <= N; ++n) {
      const double d = cursor->Next();
      if (n >= k && d < radii[n]) {
        hit[s] = 1;
        return;
      }
    }
  });
  return MakeEstimate(std::count(hit.begin(), hit.end(), 1), M);
}

Rational RioExactMeasure(long a, const RadiusSequence& seq, long k, long N, std::uint64_t arc_budget) {
  Require(k >= 1 && N >= k, "exact R_io truncation needs 1 <= k <= N");
  IntervalSet set;
  for (long n = k; n <= N; ++n) set = set.Union(BuildRecurrenceSet(a, n, seq.AsRational(n), arc_budget).set);
  return set.Measure();
}

double RioTailBound(const SystemSpec& system, const RadiusSequence& seq, long k, long N, double c) {
  double total = 0;
  for (long n = k; n <= N; ++n) total += std::min(1.0, c * LebesgueBallMeasure(system.dimension(), seq.Approx(n)));
  return total;
}

DichotomyResult RioDichotomy(const SystemSpec& system, const RadiusSequence& convergent,
                             const RadiusSequence& divergent, long k, long N, long M,
                             const ExperimentOptions& options) {
  DichotomyResult result;
  result.convergent = RioTruncatedMeasure(system, convergent, k, N, M, options);
  result.divergent = RioTruncatedMeasure(system, divergent, k, N, M, options);
  result.separation = result.divergent.value - result.convergent.value;
  result.tail_bound = RioTailBound(system, convergent, k, N, DensityConstant(system, options.ulam_bins));
  result.convergent_within_tail =
      result.convergent.value <= result.tail_bound + 3 * result.convergent.ci_width();
  if (auto* toral = std::get_if<ToralLinear>(&system.variant())) {
    result.divergent_asserted = SmallestEigenvalueModulus(*toral) > 1.0 + 1e-12;
  }
  return result;
}

RateScan RecurrenceRateScan(const SystemSpec& system, const std::vector<double>& thetas, const Rational& kappa,
                            long k, long N, long M, const ExperimentOptions& options) {
  RateScan scan;
  if (!system.IsExpandingInterval() || !(system.MinExpansion() > 1.0) || !(system.BranchImageMin() > 0.0)) {
    scan.hypotheses_ok = false;
    scan.warning = "system " + system.ToString() +
                   " fails the structural check (expanding, large image); results are flagged";
  }
  const double c = scan.hypotheses_ok ? DensityConstant(system, options.ulam_bins) : 1.0;
  for (double theta : thetas) {
    RateScanRow row;
    row.theta = theta;
    const RadiusSequence seq(PowerLog{kappa, ParseRational(std::to_string(theta))});
    row.estimate = RioTruncatedMeasure(system, seq, k, N, M, options);
    row.tail_bound = RioTailBound(system, seq, k, N, c);
    if (theta < 0.5) {
      row.verdict = row.estimate.value >= kHighEstimate ? "consistent" : "inconsistent";
    } else if (theta > 1.0) {
      row.verdict = row.estimate.value <= row.tail_bound + 3 * row.estimate.ci_width() ? "consistent" : "inconsistent";
    } else {
      row.verdict = "open";
    }
    scan.rows.push_back(row);
  }
  return scan;
}

Estimate EarTruncatedMeasure(const SystemSpec& system, const RadiusSequence& seq, long n0, long horizon, long M,
                             const ExperimentOptions& options) {
  Require(n0 >= 1 && horizon >= n0, "truncated R_ea needs 1 <= n0 <= horizon");
  Require(M >= 1, "truncated R_ea needs samples");
  CheckPrecision(system, horizon, options);
  const std::vector<double> radii = RadiusTable(seq, horizon);
  const SampleMeasure measure = InvariantSampleMeasure(system, options.ulam_bins);
  std::vector<char> inside(M, 0);
  ParallelFor(M, [&](std::size_t s) {
    auto cursor = MakeSampledCursor(system, measure, options.seed, s, horizon);
    double rho = INFINITY;
    for (long m = 1; m <= horizon; ++m) {
      rho = std::min(rho, cursor->Next());
      if (m >= n0 && !(rho < radii[m])) return;
    }
    inside[s] = 1;
  });
  return MakeEstimate(std::count(inside.begin(), inside.end(), 1), M);
}

EarTruncation EarExact(long a, const RadiusSequence& seq, long n0, long horizon, std::uint64_t arc_budget) {
  return EarTruncatedA(a, n0, horizon, seq, arc_budget);
}

EarBoundCheck CheckEarBound(const RadiusSequence& seq, double sigma, const std::vector<long>& m_grid, long onset,
                             std::uint64_t arc_budget) {
  const auto* rule = std::get_if<EarRule>(&seq.variant());
  Require(rule != nullptr, "EAR bound check needs an ear: radius sequence");
  Require(sigma > 0, "EAR bound check needs sigma > 0");
  EarBoundCheck check;
  for (long m : m_grid) {
    Require(m >= 2, "EAR bound check needs m >= 2");
    EarBoundRow row;
    row.m = m;
    row.delta = static_cast<double>(rule->DeltaAt(m));
    const double log2_lhs = (2 + sigma) * std::log2(static_cast<double>(m)) - std::log2(row.delta) - row.delta;
    row.hypothesis_ok = row.delta > 0 && log2_lhs <= 0;
    const EarSet c = BuildEarSet(2, m, seq, arc_budget);
    row.r_m = c.r_m;
    row.complement_measure = 1 - c.measure;
    row.epsilon = std::pow(static_cast<double>(m), -(1 + sigma));
    row.bound_holds = row.complement_measure.get_d() < row.epsilon;
    row.verdict_required = m >= onset;
    if (row.verdict_required && !row.bound_holds) check.pass = false;
    check.rows.push_back(row);
  }
  for (std::size_t i = check.rows.size(); i-- > 0;) {
    if (!check.rows[i].bound_holds) break;
    check.observed_onset = check.rows[i].m;
  }
  return check;
}

BoshernitzanRow BoshernitzanScan(const SystemSpec& system, double alpha, const std::vector<long>& checkpoints, long M,
                                 const ExperimentOptions& options) {
  Require(alpha > 0, "Boshernitzan scan needs alpha > 0");
  Require(!checkpoints.empty() && std::is_sorted(checkpoints.begin(), checkpoints.end()),
          "Boshernitzan checkpoints must be ascending");
  Require(M >= 1, "Boshernitzan scan needs samples");
  const long horizon = checkpoints.back();
  CheckPrecision(system, horizon, options);
  const SampleMeasure measure = InvariantSampleMeasure(system, options.ulam_bins);
  std::vector<std::vector<double>> profiles(M);
  ParallelFor(M, [&](std::size_t s) {
    auto cursor = MakeSampledCursor(system, measure, options.seed, s, horizon);
    profiles[s] = BoshernitzanProfile(*cursor, alpha, checkpoints);
  });
  BoshernitzanRow row;
  row.alpha = alpha;
  row.checkpoints = checkpoints;
  std::vector<std::vector<double>> columns(checkpoints.size());
  for (const auto& profile : profiles) {
    if (profile.back() == 0.0) {
      ++row.excluded;
      continue;
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) columns[c].push_back(profile[c]);
  }
  Require(!columns[0].empty(), "every Boshernitzan sample was periodic");
  for (const auto& column : columns) row.medians.push_back(Median(column));
  if (alpha > 1) {
    row.pass = row.medians.back() < row.medians.front();
    row.verdict = row.pass ? "decreasing" : "not decreasing";
  } else {
    const double peak = *std::max_element(row.medians.begin(), row.medians.end());
    row.pass = peak <= 2 * row.medians.front();
    row.verdict = row.pass ? "bounded" : "growing";
  }
  return row;
}

Sandwich MeasureSandwich(const SystemSpec& system, const RadiusSequence& seq, long n_max, long M,
                         const ExperimentOptions& options) {
  Require(n_max >= 1 && M >= 1, "sandwich needs n_max >= 1 and samples");
  CheckPrecision(system, n_max, options);
  const UlamOperator op = BuildUlam(system, options.ulam_bins);
  const DensityBounds bounds = ComputeDensityBounds(op);
  const CorrelationFit fit = FitCorrelationDecay(op, system);
  Sandwich sandwich;
  sandwich.c = bounds.c;
  sandwich.C = fit.C;
  sandwich.tau = fit.tau;
  const std::vector<double> radii = RadiusTable(seq, n_max);
  SampleMeasure measure;
  measure.bin_weights = op.density;
  if (LebesgueInvariant(system)) measure = SampleMeasure::Lebesgue();
  std::vector<std::vector<char>> hits(M);
  ParallelFor(M, [&](std::size_t s) {
    auto cursor = MakeSampledCursor(system, measure, options.seed, s, n_max);
    hits[s].assign(n_max + 1, 0);
    for (long n = 1; n <= n_max; ++n) hits[s][n] = cursor->Next() < radii[n];
  });
  long inside = 0;
  for (long n = 1; n <= n_max; ++n) {
    long count = 0;
    for (const auto& h : hits) count += h[n];
    SandwichRow row;
    row.n = n;
    row.r = radii[n];
    row.estimate = MakeEstimate(count, M);
    const double correction = std::isfinite(fit.tau) ? fit.C * std::exp(-fit.tau * n) : 0.0;
    row.lower = radii[n] / bounds.c - correction;
    row.upper = 2 * bounds.c * radii[n] + correction;
    row.inside = row.estimate.value >= row.lower && row.estimate.value <= row.upper;
    inside += row.inside;
    sandwich.rows.push_back(row);
  }
  sandwich.fraction_inside = static_cast<double>(inside) / n_max;
  return sandwich;
}

}  // namespace recurlab
