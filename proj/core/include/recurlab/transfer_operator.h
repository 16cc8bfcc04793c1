#ifndef RECURLAB_TRANSFER_OPERATOR_H_
#define RECURLAB_TRANSFER_OPERATOR_H_

#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "recurlab/radius.h"
#include "recurlab/system.h"

namespace recurlab {

// Ulam discretization on N equal bins: P_ij = m(B_i ∩ T^-1 B_j) / m(B_i).
struct UlamOperator {
  int bins = 0;
  bool exact_geometry = false;  // entries from rational branch data
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  std::vector<double> density;  // per-bin value; sum(density) / bins = 1
  double density_residual = 0;  // L1 norm of (pi P - pi) at the end of power iteration
  int density_iterations = 0;
  double second_eigenvalue = 0;  // modulus estimate
  double gap = 1;
  double max_row_error = 0;      // max |row sum - 1|
};

struct UlamOptions {
  double tolerance = 1e-10;
  int max_iterations = 100000;
};

UlamOperator BuildUlam(const SystemSpec& system, int bins, const UlamOptions& options = {});

// Extremes of the density averaged over blocks of about sqrt(N) bins; single
// bins next to discontinuities of the true density carry O(1) errors.
struct DensityBounds {
  double lower = 1;
  double upper = 1;
  double c = 1;  // max(upper, 1 / lower)
  double bin_lower = 1;
  double bin_upper = 1;
};

DensityBounds ComputeDensityBounds(const UlamOperator& op, double tolerance = 1e-10);

struct CorrelationFit {
  std::vector<double> p;  // p(n), n = 0..n_max
  int n_min = 5;
  int n_max = 0;
  double C = 0;    // envelope: p(n) <= C e^(-tau n) for every tabulated n
  double tau = 0;  // fitted rate
  double residual_rms = 0;
  int points_used = 0;
  bool decaying = true;
};

// n_max <= 0 selects floor(log_Lambda N) - 3, beyond which bin resolution
// dominates. Test pairs are indicators of dyadic intervals aligned with bins.
CorrelationFit FitCorrelationDecay(const UlamOperator& op, const SystemSpec& system, int n_max = 0, int n_min = 5);

// Correlation |∫ f∘T^n g dmu - ∫f dmu ∫g dmu| of two bin-aligned indicators.
double IndicatorCorrelation(const UlamOperator& op, int f_first, int f_last, int g_first, int g_last, int n);

// ∬ 1{d(x, y) < t} rho(x) rho(y) dx dy for the Ulam density, exact for a
// piecewise-constant density. Circle metric wraps.
double BallIntegral(const UlamOperator& op, bool circle_metric, double t);

struct SeriesResult {
  std::vector<double> terms;         // terms[n-1] = ∫ mu(B(x, r_n)) dmu(x)
  std::vector<double> partial_sums;
  double raabe = 0;                  // median of n (t_n / t_(n+1) - 1) over the last quarter
  std::string verdict;               // convergent | divergent | inconclusive
};

SeriesResult MeasureSeries(const UlamOperator& op, const SystemSpec& system, const RadiusSequence& seq,
                           long n_terms);

std::string UlamDensityCsv(const UlamOperator& op);
std::string UlamMatrixCsv(const UlamOperator& op);

}  // namespace recurlab

#endif  // RECURLAB_TRANSFER_OPERATOR_H_
