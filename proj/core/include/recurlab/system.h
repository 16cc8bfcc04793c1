#ifndef RECURLAB_SYSTEM_H_
#define RECURLAB_SYSTEM_H_

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recurlab/numeric.h"

namespace recurlab {

// T x = slope * x + intercept on [left, right).
template <typename Number>
struct AffineBranch {
  Number left;
  Number right;
  Number slope;
  Number intercept;
};

using ExactBranch = AffineBranch<Rational>;
using ApproxBranch = AffineBranch<long double>;

// T x = a x mod 1, |a| >= 2.
struct IntegerCircleMap {
  long a = 2;
};

// T x = beta x mod 1 on [0, 1), beta > 1.
struct BetaMap {
  QuadraticSurd beta;
};

// Piecewise-linear map of [0, 1); branch domains partition [0, 1).
struct PiecewiseLinear {
  std::vector<ExactBranch> branches;
};

// T x = A x mod 1 on the d-torus; A is row-major d x d.
struct ToralLinear {
  int dimension = 2;
  std::vector<long> matrix;

  long at(int row, int col) const { return matrix[row * dimension + col]; }
};

// T x = x + alpha mod 1.
struct Rotation {
  QuadraticSurd alpha;
};

enum class Metric { kCircle, kInterval, kTorus };

class SystemSpec {
 public:
  using Variant = std::variant<IntegerCircleMap, BetaMap, PiecewiseLinear, ToralLinear, Rotation>;

  SystemSpec() : variant_(IntegerCircleMap{2}) {}
  explicit SystemSpec(Variant variant);  // validates; 1x1 toral maps become circle maps

  static SystemSpec Doubling() { return SystemSpec(IntegerCircleMap{2}); }
  static SystemSpec GoldenBeta() { return SystemSpec(BetaMap{QuadraticSurd::GoldenRatio()}); }

  // doubling | circle:<a> | tent | beta:<value> | rotation:<value> |
  // toral:<r1c1>,<r1c2>;<r2c1>,... | piecewise:<l>,<r>,<slope>,<intercept>;...
  static SystemSpec Parse(std::string_view text);
  std::string ToString() const;

  const Variant& variant() const { return variant_; }
  template <typename T>
  bool Is() const { return std::holds_alternative<T>(variant_); }
  template <typename T>
  const T& As() const { return std::get<T>(variant_); }

  int dimension() const;
  Metric metric() const;

  // Expanding maps of the interval/circle with affine branches.
  bool IsExpandingInterval() const;
  // All branch data rational, so exact geometry is available.
  bool HasExactBranches() const;

  std::vector<ExactBranch> ExactBranches() const;    // requires HasExactBranches()
  std::vector<ApproxBranch> ApproxBranches() const;  // any interval system

  // Smallest and largest |T'| (lambda, Lambda); for toral maps the extreme
  // singular-value-free bound max row sum is used for Lambda.
  double MinExpansion() const;
  double MaxExpansion() const;

  // Shortest image length over the branches of T (large-image constant of
  // the first iterate).
  double BranchImageMin() const;

 private:
  Variant variant_;
};

}  // namespace recurlab

#endif  // RECURLAB_SYSTEM_H_
