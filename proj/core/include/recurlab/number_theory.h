#ifndef RECURLAB_NUMBER_THEORY_H_
#define RECURLAB_NUMBER_THEORY_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "recurlab/numeric.h"

namespace recurlab {

struct GcdMersenneResult {
  Integer gcd;        // gcd(a^m - 1, a^n - 1) by big-integer gcd
  Integer predicted;  // a^gcd(m,n) - 1
  bool holds = false;
};

GcdMersenneResult GcdMersenne(long a, unsigned m, unsigned n);

// All integer solutions of k (a^m - 1) + l (a^n - 1) = 0 are j (k0, l0).
struct ScalarLattice {
  long a = 2;
  unsigned m = 1, n = 1, p = 1;
  Integer k0, l0;  // k0 > 0
};

ScalarLattice SolveScalarLattice(long a, unsigned m, unsigned n);
// Every (k, l) with |k|, |l| <= bound solving the equation, in lexicographic order.
std::vector<std::pair<long, long>> ScalarLatticeBruteForce(long a, unsigned m, unsigned n, long bound);
// Lattice points j (k0, l0) with |k|, |l| <= bound, same order.
std::vector<std::pair<long, long>> ScalarLatticeGenerated(const ScalarLattice& lattice, long bound);

// Dense integer polynomial, coefficient i multiplies x^i.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<Integer> coefficients);
  static IntPolynomial Constant(const Integer& c);
  static IntPolynomial Monomial(unsigned degree, const Integer& c = 1);
  // 1 + x + ... + x^(m-1)
  static IntPolynomial GeometricSum(unsigned m);

  const std::vector<Integer>& coefficients() const { return coefficients_; }
  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }  // -1 for zero
  bool IsZero() const { return coefficients_.empty(); }
  const Integer& operator[](std::size_t i) const { return coefficients_[i]; }

  IntPolynomial operator+(const IntPolynomial& other) const;
  IntPolynomial operator-(const IntPolynomial& other) const;
  IntPolynomial operator*(const IntPolynomial& other) const;
  bool operator==(const IntPolynomial& other) const = default;

  // Division by a monic divisor; returns (quotient, remainder).
  std::pair<IntPolynomial, IntPolynomial> DivideMonic(const IntPolynomial& divisor) const;

  std::string ToString() const;

 private:
  void Trim();
  std::vector<Integer> coefficients_;
};

struct BezoutPair {
  IntPolynomial u, v;
};

// u (1 + ... + x^(m-1)) + v (1 + ... + x^(n-1)) = 1 by Euclidean descent.
BezoutPair BezoutPolynomials(unsigned m, unsigned n);

// k-th cyclotomic polynomial.
IntPolynomial Cyclotomic(unsigned k);

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(int dimension, std::vector<Integer> entries);  // row-major
  static IntMatrix FromLongs(int dimension, const std::vector<long>& entries);
  static IntMatrix Identity(int dimension);
  static IntMatrix Zero(int dimension);

  int dimension() const { return dimension_; }
  const Integer& operator()(int row, int col) const { return entries_[row * dimension_ + col]; }
  Integer& operator()(int row, int col) { return entries_[row * dimension_ + col]; }

  IntMatrix operator+(const IntMatrix& other) const;
  IntMatrix operator-(const IntMatrix& other) const;
  IntMatrix operator*(const IntMatrix& other) const;
  std::vector<Integer> operator*(const std::vector<Integer>& v) const;
  bool operator==(const IntMatrix& other) const = default;

  IntMatrix Pow(unsigned exponent) const;
  Integer Determinant() const;  // fraction-free Bareiss
  IntMatrix Adjugate() const;
  // det(x I - B), monic, exact (Faddeev-LeVerrier).
  IntPolynomial CharacteristicPolynomial() const;

  std::string ToString() const;

 private:
  int dimension_ = 0;
  std::vector<Integer> entries_;
};

struct RootOfUnityScreen {
  bool found = false;
  std::string reason;  // e.g. "det(B^4 - I) = 0" or "Phi_6 divides det(xI - B)"
};

// det(B^q - I) for q <= 2 d^2, then cyclotomic divisors of degree <= d.
RootOfUnityScreen ScreenRootsOfUnity(const IntMatrix& b);

// Solutions of (B^m - I) k = (B^n - I) l are k = K j, l = L j.
struct MatrixLattice {
  IntMatrix b;
  unsigned m = 1, n = 1, p = 1;
  IntMatrix k_generator;  // I + B^p + ... + B^(n-p)
  IntMatrix l_generator;  // I + B^p + ... + B^(m-p)
};

// Throws kRootOfUnity when the screen finds a root-of-unity eigenvalue.
MatrixLattice SolveMatrixLattice(const IntMatrix& b, unsigned m, unsigned n);

using LatticeVector = std::vector<long>;
using LatticePair = std::pair<LatticeVector, LatticeVector>;

// All (k, l) with entries in [-box, box] solving (B^m - I) k = (B^n - I) l,
// sorted.
std::vector<LatticePair> MatrixLatticeBruteForce(const IntMatrix& b, unsigned m, unsigned n, long box);
// (K j, L j) with both inside the box, sorted.
std::vector<LatticePair> MatrixLatticeGenerated(const MatrixLattice& lattice, long box);

struct GeneratorGrowth {
  double min_ratio = 0;  // min ||K j|| / ||j|| over the sample
  double lambda = 0;     // smallest eigenvalue modulus of B
  double fitted_c = 0;   // min_ratio / lambda^(n-p)
  int samples = 0;
};

// K = I + B^p + ... + B^(n-p); j drawn uniformly from nonzero vectors with
// entries in [-10, 10]. Throws kNonExpanding for eigenvalues with |.| <= 1.
GeneratorGrowth MeasureGeneratorGrowth(const IntMatrix& b, unsigned n, unsigned p, int sample_count,
                                       std::uint64_t seed = 1);

}  // namespace recurlab

#endif  // RECURLAB_NUMBER_THEORY_H_
