#ifndef RECURLAB_STATS_H_
#define RECURLAB_STATS_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace recurlab {

struct ConfidenceInterval {
  double low = 0;
  double high = 1;
};

// Wilson score interval for `successes` out of `trials`; z = 1.96 for 95%.
ConfidenceInterval WilsonInterval(long successes, long trials, double z = 1.959963984540054);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double residual_rms = 0;
};

LinearFit FitLine(std::span<const double> x, std::span<const double> y);

double Median(std::vector<double> values);

// Worker count used by parallel loops; results never depend on it.
void SetThreadCount(int threads);
int ThreadCount();

// Calls body(i) for i in [0, count) across ThreadCount() workers. Bodies
// write to disjoint slots; callers reduce in index order afterwards.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace recurlab

#endif  // RECURLAB_STATS_H_
