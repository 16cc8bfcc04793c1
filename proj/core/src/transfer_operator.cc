#include "recurlab/transfer_operator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "recurlab/error.h"
#include "recurlab/random.h"
#include "recurlab/stats.h"

namespace recurlab {

namespace {

using Triplet = Eigen::Triplet<double>;
using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

long ToLong(const Rational& x) { return Floor(x).get_num().get_si(); }
long ToLong(long double x) { return static_cast<long>(std::floor(x)); }
double ToDoubleValue(const Rational& x) { return x.get_d(); }
double ToDoubleValue(long double x) { return static_cast<double>(x); }

template <typename Number>
Number AbsOf(const Number& x) {
  return x < 0 ? Number(-x) : x;
}

// Row i of the Ulam matrix from affine branch geometry.
template <typename Number>
std::vector<std::pair<int, double>> UlamRow(const std::vector<AffineBranch<Number>>& branches, int bins, int row) {
  const Number width = Number(1) / Number(bins);
  const Number bin_left = Number(row) / Number(bins);
  const Number bin_right = Number(row + 1) / Number(bins);
  std::vector<std::pair<int, Number>> entries;
  for (const auto& b : branches) {
    const Number x0 = std::max(b.left, bin_left);
    const Number x1 = std::min(b.right, bin_right);
    if (!(x0 < x1)) continue;
    Number y0 = b.slope * x0 + b.intercept;
    Number y1 = b.slope * x1 + b.intercept;
    if (y1 < y0) std::swap(y0, y1);
    const Number scale = AbsOf(b.slope) * width;
    long first = std::max(0L, ToLong(y0 * Number(bins)));
    long last = std::min<long>(bins - 1, ToLong(y1 * Number(bins)));
    for (long j = first; j <= last; ++j) {
      const Number lo = std::max<Number>(y0, Number(j) / Number(bins));
      const Number hi = std::min<Number>(y1, Number(j + 1) / Number(bins));
      if (!(lo < hi)) continue;
      entries.emplace_back(static_cast<int>(j), Number((hi - lo) / scale));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  std::vector<Number> sums;
  for (auto& [col, value] : entries) {
    if (!merged.empty() && merged.back().first == col) {
      sums.back() += value;
    } else {
      merged.emplace_back(col, 0.0);
      sums.push_back(value);
    }
  }
  for (std::size_t k = 0; k < merged.size(); ++k) merged[k].second = ToDoubleValue(sums[k]);
  return merged;
}

double L1(const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); }

void EstimateSecondEigenvalue(const RowMatrix& transpose, const Eigen::VectorXd& pi, const UlamOptions& options,
                              UlamOperator* op) {
  const int n = op->bins;
  RandomStream stream(0x5eed, 2);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = stream.NextUnit() - 0.5;
  auto deflate = [&](Eigen::VectorXd& v) { v -= v.sum() * pi; };
  deflate(w);
  double norm = L1(w);
  if (norm == 0) {
    op->second_eigenvalue = 0;
    op->gap = 1;
    return;
  }
  w /= norm;
  constexpr int kWindow = 50;
  std::vector<double> logs;
  double estimate = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd next = transpose * w;
    deflate(next);
    norm = L1(next);
    if (norm < 1e-280) {
      estimate = 0;
      logs.clear();
      break;
    }
    logs.push_back(std::log(norm));
    w = next / norm;
    if (static_cast<int>(logs.size()) >= 2 * kWindow) {
      double recent = 0, earlier = 0;
      for (int k = 0; k < kWindow; ++k) {
        recent += logs[logs.size() - 1 - k];
        earlier += logs[logs.size() - 1 - kWindow - k];
      }
      recent /= kWindow;
      earlier /= kWindow;
      estimate = std::exp(recent);
      if (std::abs(std::exp(recent) - std::exp(earlier)) < options.tolerance) break;
    }
  }
  if (!logs.empty() && static_cast<int>(logs.size()) < 2 * kWindow) {
    double sum = 0;
    for (double l : logs) sum += l;
    estimate = std::exp(sum / logs.size());
  }
  op->second_eigenvalue = estimate;
  op->gap = 1 - estimate;
}

}  // namespace

UlamOperator BuildUlam(const SystemSpec& system, int bins, const UlamOptions& options) {
  if (!system.IsExpandingInterval()) {
    Fail(ErrorCode::kNonExpanding, "Ulam operator needs an expanding interval system, got " + system.ToString());
  }
  Require(bins >= 2, "Ulam operator needs at least 2 bins");
  UlamOperator op;
  op.bins = bins;
  op.exact_geometry = system.HasExactBranches();
  std::vector<std::vector<std::pair<int, double>>> rows(bins);
  if (op.exact_geometry) {
    const auto branches = system.ExactBranches();
    ParallelFor(bins, [&](std::size_t i) { rows[i] = UlamRow(branches, bins, static_cast<int>(i)); });
  } else {
    const auto branches = system.ApproxBranches();
    ParallelFor(bins, [&](std::size_t i) { rows[i] = UlamRow(branches, bins, static_cast<int>(i)); });
  }
  std::vector<Triplet> triplets;
  for (int i = 0; i < bins; ++i) {
    double sum = 0;
    for (const auto& [j, value] : rows[i]) {
      triplets.emplace_back(i, j, value);
      sum += value;
    }
    op.max_row_error = std::max(op.max_row_error, std::abs(sum - 1.0));
  }
  op.matrix.resize(bins, bins);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();

  const RowMatrix transpose = op.matrix.transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(bins, 1.0 / bins);
  op.density_residual = INFINITY;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Eigen::VectorXd next = transpose * pi;
    next /= next.sum();
    op.density_residual = L1(next - pi);
    pi = std::move(next);
    op.density_iterations = it;
    if (op.density_residual <= options.tolerance) break;
  }
  op.density.resize(bins);
  for (int i = 0; i < bins; ++i) op.density[i] = pi[i] * bins;
  EstimateSecondEigenvalue(transpose, pi, options, &op);
  return op;
}

DensityBounds ComputeDensityBounds(const UlamOperator& op, double tolerance) {
  if (!(op.density_residual <= tolerance)) {
    Fail(ErrorCode::kNotConverged, "Ulam density not converged (power-iteration residual " +
                                       std::to_string(op.density_residual) + " > " + std::to_string(tolerance) + ")");
  }
  DensityBounds bounds;
  bounds.lower = bounds.bin_lower = INFINITY;
  bounds.upper = bounds.bin_upper = 0;
  for (double d : op.density) {
    if (d <= 1e-12) continue;  // outside the support
    bounds.bin_lower = std::min(bounds.bin_lower, d);
    bounds.bin_upper = std::max(bounds.bin_upper, d);
  }
  const int width = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(op.bins)))));
  for (int first = 0; first < op.bins; first += width) {
    const int last = std::min(op.bins, first + width);
    double sum = 0;
    for (int i = first; i < last; ++i) sum += op.density[i];
    const double mean = sum / (last - first);
    if (mean <= 1e-12) continue;
    bounds.lower = std::min(bounds.lower, mean);
    bounds.upper = std::max(bounds.upper, mean);
  }
  bounds.c = std::max({1.0, bounds.upper, 1.0 / bounds.lower});
  return bounds;
}

namespace {

// Mass of each bin under mu.
std::vector<double> BinMass(const UlamOperator& op) {
  std::vector<double> mass(op.bins);
  for (int i = 0; i < op.bins; ++i) mass[i] = op.density[i] / op.bins;
  return mass;
}

struct DyadicInterval {
  int first, last;  // bins [first, last)
};

std::vector<DyadicInterval> DyadicFamily(int bins, int max_per_scale) {
  std::vector<DyadicInterval> family;
  for (long parts = 2; parts <= bins; parts *= 2) {
    const long stride = std::max<long>(1, parts / max_per_scale);
    for (long p = 0; p < parts; p += stride) {
      const int first = static_cast<int>(p * bins / parts);
      const int last = static_cast<int>((p + 1) * bins / parts);
      if (first < last) family.push_back({first, last});
    }
  }
  return family;
}

}  // namespace

double IndicatorCorrelation(const UlamOperator& op, int f_first, int f_last, int g_first, int g_last, int n) {
  Require(0 <= f_first && f_first < f_last && f_last <= op.bins, "indicator f outside the bins");
  Require(0 <= g_first && g_first < g_last && g_last <= op.bins, "indicator g outside the bins");
  Require(n >= 0, "correlation lag must be non-negative");
  const std::vector<double> mass = BinMass(op);
  const RowMatrix transpose = op.matrix.transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(op.bins);
  double mu_f = 0, mu_g = 0;
  for (int i = g_first; i < g_last; ++i) v[i] = mass[i], mu_g += mass[i];
  for (int i = f_first; i < f_last; ++i) mu_f += mass[i];
  for (int k = 0; k < n; ++k) v = transpose * v;
  double joint = 0;
  for (int i = f_first; i < f_last; ++i) joint += v[i];
  return std::abs(joint - mu_f * mu_g);
}

CorrelationFit FitCorrelationDecay(const UlamOperator& op, const SystemSpec& system, int n_max, int n_min) {
  CorrelationFit fit;
  const double lambda = std::max(system.MaxExpansion(), 1.0 + 1e-9);
  if (n_max <= 0) n_max = static_cast<int>(std::floor(std::log(op.bins) / std::log(lambda))) - 3;
  Require(n_max >= 1, "correlation fit needs n_max >= 1 (more bins)");
  fit.n_max = n_max;
  fit.n_min = std::min(n_min, n_max);
  fit.p.assign(n_max + 1, 0.0);

  const std::vector<double> mass = BinMass(op);
  const RowMatrix transpose = op.matrix.transpose();
  const std::vector<DyadicInterval> g_family = DyadicFamily(op.bins, 64);
  const std::vector<DyadicInterval> f_family = DyadicFamily(op.bins, op.bins);
  std::vector<double> prefix(op.bins + 1);
  prefix[0] = 0;
  for (int i = 0; i < op.bins; ++i) prefix[i + 1] = prefix[i] + mass[i];

  std::vector<std::vector<double>> per_g(g_family.size(), std::vector<double>(n_max + 1, 0.0));
  ParallelFor(g_family.size(), [&](std::size_t gi) {
    const DyadicInterval g = g_family[gi];
    const double mu_g = prefix[g.last] - prefix[g.first];
    if (mu_g <= 0) return;
    const int variation = (g.first > 0 ? 1 : 0) + (g.last < op.bins ? 1 : 0);
    const double bv = variation + mu_g;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(op.bins);
    for (int i = g.first; i < g.last; ++i) v[i] = mass[i];
    std::vector<double> pushed(op.bins + 1);
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) v = transpose * v;
      pushed[0] = 0;
      for (int i = 0; i < op.bins; ++i) pushed[i + 1] = pushed[i] + v[i];
      double best = 0;
      for (const DyadicInterval& f : f_family) {
        const double mu_f = prefix[f.last] - prefix[f.first];
        if (mu_f <= 0) continue;
        const double joint = pushed[f.last] - pushed[f.first];
        best = std::max(best, std::abs(joint - mu_f * mu_g) / mu_f);
      }
      per_g[gi][n] = best / bv;
    }
  });
  for (const auto& row : per_g) {
    for (int n = 0; n <= n_max; ++n) fit.p[n] = std::max(fit.p[n], row[n]);
  }

  std::vector<double> xs, ys;
  for (int n = fit.n_min; n <= n_max; ++n) {
    if (fit.p[n] > 0) {
      xs.push_back(n);
      ys.push_back(std::log(fit.p[n]));
    }
  }
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() >= 2) {
    const LinearFit line = FitLine(xs, ys);
    fit.tau = -line.slope;
    fit.residual_rms = line.residual_rms;
  } else if (xs.empty()) {
    // Correlations vanish identically inside the window.
    fit.tau = INFINITY;
  }
  fit.decaying = fit.tau > 1e-3 && op.gap > 1e-6;
  fit.C = 0;
  if (std::isfinite(fit.tau)) {
    for (int n = 0; n <= n_max; ++n) fit.C = std::max(fit.C, fit.p[n] * std::exp(fit.tau * n));
  } else {
    fit.C = *std::max_element(fit.p.begin(), fit.p.end());
  }
  return fit;
}

namespace {

// Area of {(u, v) in [0, h]^2 : |u - v + k h| < t}.
double BandArea(long k, double h, double t) {
  auto cumulative = [h](double z) {
    if (z <= -h) return 0.0;
    if (z >= h) return h * h;
    if (z <= 0) return 0.5 * (h + z) * (h + z);
    return h * h - 0.5 * (h - z) * (h - z);
  };
  const double lo = std::max(-h, -t - k * h);
  const double hi = std::min(h, t - k * h);
  if (hi <= lo) return 0.0;
  return cumulative(hi) - cumulative(lo);
}

class BallIntegrator {
 public:
  BallIntegrator(const UlamOperator& op, bool circle) : bins_(op.bins), circle_(circle), auto_(op.bins, 0.0) {
    const auto& rho = op.density;
    for (int k = 0; k < bins_; ++k) {
      double sum = 0;
      for (int i = 0; i < bins_; ++i) {
        int j = i + k;
        if (j >= bins_) {
          if (!circle_) break;
          j -= bins_;
        }
        sum += rho[i] * rho[j];
      }
      auto_[k] = sum;
    }
  }

  double operator()(double t) const {
    if (t <= 0) return 0;
    if (t >= (circle_ ? 0.5 : 1.0)) return 1;
    const double h = 1.0 / bins_;
    const long reach = static_cast<long>(std::ceil(t / h)) + 1;
    double total = 0;
    for (long o = -reach; o <= reach; ++o) {
      const double area = BandArea(o, h, t);
      if (area == 0) continue;
      long index;
      if (circle_) {
        index = ((o % bins_) + bins_) % bins_;
      } else {
        index = std::labs(o);
        if (index >= bins_) continue;
      }
      total += area * auto_[index];
    }
    return std::min(total, 1.0);
  }

 private:
  int bins_;
  bool circle_;
  std::vector<double> auto_;
};

}  // namespace

double BallIntegral(const UlamOperator& op, bool circle_metric, double t) {
  return BallIntegrator(op, circle_metric)(t);
}

SeriesResult MeasureSeries(const UlamOperator& op, const SystemSpec& system, const RadiusSequence& seq,
                           long n_terms) {
  Require(n_terms >= 4, "series evaluation needs at least 4 terms");
  const BallIntegrator integrate(op, system.metric() == Metric::kCircle);
  SeriesResult result;
  result.terms.reserve(n_terms);
  double sum = 0;
  for (long n = 1; n <= n_terms; ++n) {
    const double term = integrate(seq.Approx(n));
    result.terms.push_back(term);
    sum += term;
    result.partial_sums.push_back(sum);
  }
  std::vector<double> raabe;
  for (long n = 3 * n_terms / 4; n < n_terms; ++n) {
    const double a = result.terms[n - 1], b = result.terms[n];
    if (a > 0 && b > 0) raabe.push_back(n * (a / b - 1));
  }
  if (raabe.empty()) {
    result.raabe = INFINITY;  // terms vanish: finite sum
    result.verdict = "convergent";
    return result;
  }
  result.raabe = Median(raabe);
  if (result.raabe > 1.05) {
    result.verdict = "convergent";
  } else if (result.raabe < 1.02) {
    result.verdict = "divergent";
  } else {
    result.verdict = "inconclusive";
  }
  return result;
}

std::string UlamDensityCsv(const UlamOperator& op) {
  std::string csv = "bin,left,right,density\n";
  char line[160];
  for (int i = 0; i < op.bins; ++i) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", i, static_cast<double>(i) / op.bins,
                  static_cast<double>(i + 1) / op.bins, op.density[i]);
    csv += line;
  }
  return csv;
}

std::string UlamMatrixCsv(const UlamOperator& op) {
  std::string csv = "row,col,value\n";
  char line[96];
  for (int i = 0; i < op.matrix.outerSize(); ++i) {
    for (RowMatrix::InnerIterator it(op.matrix, i); it; ++it) {
      std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", i, static_cast<int>(it.col()), it.value());
      csv += line;
    }
  }
  return csv;
}

}  // namespace recurlab
