#ifndef RECURLAB_ORBIT_H_
#define RECURLAB_ORBIT_H_

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recurlab/numeric.h"
#include "recurlab/system.h"

namespace recurlab {

// A point of the phase space, either exact (rational coordinates) or a
// binary fixed-point value coordinate = fixed[i] / 2^precision carrying an
// accumulated forward-error bound.
struct OrbitPoint {
  std::vector<Rational> exact;
  std::vector<Integer> fixed;
  unsigned precision = 0;
  // log2 of the error bound in units of 2^-precision; -inf when error-free.
  double error_ulps_log2 = -INFINITY;

  static OrbitPoint Exact(Rational x) { return Exact(std::vector<Rational>{std::move(x)}); }
  static OrbitPoint Exact(std::vector<Rational> coords);
  static OrbitPoint Fixed(Integer bits, unsigned precision);
  static OrbitPoint Fixed(std::vector<Integer> bits, unsigned precision);

  bool is_exact() const { return !exact.empty(); }
  int dimension() const { return static_cast<int>(is_exact() ? exact.size() : fixed.size()); }
  double Coordinate(int i = 0) const;
  // log2 of the absolute error bound (-inf when exact).
  double ErrorLog2() const;
};

inline constexpr unsigned kGuardBits = 64;

// Fixed-point bits needed so that `steps` iterations keep the forward error
// below 2^-guard_bits. Integer circle and toral maps are error-free, so the
// figure is the bits needed for the sampled point to stay informative.
unsigned RequiredPrecision(const SystemSpec& system, long steps, unsigned guard_bits = kGuardBits);

// T^n x. Exact inputs stay exact whenever the system's data is rational;
// fixed-point inputs are checked against RequiredPrecision first.
OrbitPoint Iterate(const SystemSpec& system, const OrbitPoint& x, long n,
                   unsigned guard_bits = kGuardBits);

// Distance in the system's metric (circle, |.| on [0,1], or Euclidean torus).
Real Distance(const SystemSpec& system, const OrbitPoint& a, const OrbitPoint& b);
std::optional<Rational> ExactDistance(const SystemSpec& system, const OrbitPoint& a,
                                      const OrbitPoint& b);

// Streams d(T^k x, x) for k = 1, 2, ... along one orbit.
class OrbitCursor {
 public:
  virtual ~OrbitCursor() = default;
  virtual double Next() = 0;
  // Exact distance for the most recent step when the orbit is exact.
  virtual std::optional<Rational> LastExactDistance() const { return std::nullopt; }
  virtual double Coordinate() const = 0;
  virtual OrbitPoint Current() const = 0;
  long step() const { return step_; }

 protected:
  long step_ = 0;
};

// Measure from which Monte Carlo starting points are drawn.
struct SampleMeasure {
  // Empty: Lebesgue. Otherwise probability weights of equal-width bins.
  std::vector<double> bin_weights;

  static SampleMeasure Lebesgue() { return {}; }
};

std::unique_ptr<OrbitCursor> MakeCursor(const SystemSpec& system, const OrbitPoint& start,
                                        long horizon, unsigned guard_bits = kGuardBits);

// Starting point drawn from `measure` using stream (seed, index). Integer
// maps with a = 2^s draw bits lazily, so the horizon is only a hint there.
std::unique_ptr<OrbitCursor> MakeSampledCursor(const SystemSpec& system, const SampleMeasure& measure,
                                               std::uint64_t seed, std::uint64_t index, long horizon,
                                               unsigned guard_bits = kGuardBits);

// Fixed-point starting point with `precision` bits drawn from `measure`.
OrbitPoint SamplePoint(const SystemSpec& system, const SampleMeasure& measure, std::uint64_t seed,
                       std::uint64_t index, unsigned precision);

struct MinReturn {
  double distance = INFINITY;
  std::optional<Rational> exact;
  long argmin = 0;
};

// rho_m(x) = min_{1<=k<=m} d(T^k x, x), first minimising k.
MinReturn MinReturnDistance(const SystemSpec& system, const OrbitPoint& x, long m);

// First n <= horizon with d(T^n x, x) < r; nullopt marks horizon exceeded.
std::optional<long> ReturnTime(const SystemSpec& system, const OrbitPoint& x, const Rational& r,
                               long horizon);

// Return times for every radius of a grid in one pass over the orbit.
std::vector<std::optional<long>> ReturnTimes(OrbitCursor& cursor, std::span<const double> radii,
                                             long horizon);

struct ReturnExponentEstimate {
  double slope = 0;        // regression of log tau_r on -log r
  double intercept = 0;
  double residual_rms = 0;
  double lower = 0;        // min over the finer half of (log tau - intercept) / -log r
  double upper = 0;        // max over the same points
  int points_used = 0;
  std::vector<double> excluded_radii;  // horizon exceeded
};

ReturnExponentEstimate EstimateReturnExponents(OrbitCursor& cursor, std::span<const double> radii,
                                               long horizon);
ReturnExponentEstimate EstimateReturnExponents(const SystemSpec& system, const OrbitPoint& x,
                                               std::span<const double> radii, long horizon);

// min_{1<=n<=N} n^(1/alpha) d(T^n x, x).
double BoshernitzanStatistic(const SystemSpec& system, const OrbitPoint& x, double alpha, long N);
// Running statistic recorded at each checkpoint N (ascending), one pass.
std::vector<double> BoshernitzanProfile(OrbitCursor& cursor, double alpha,
                                        std::span<const long> checkpoints);

// CSV with header "step,point,distance"; step 0 is the start.
std::string OrbitTraceCsv(const SystemSpec& system, const OrbitPoint& x, long steps);

}  // namespace recurlab

#endif  // RECURLAB_ORBIT_H_
