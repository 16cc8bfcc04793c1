#include "recurlab/number_theory.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "recurlab/error.h"
#include "recurlab/random.h"

namespace recurlab {

namespace {

Integer MersenneLike(long a, unsigned exponent) { return Pow(a, exponent) - 1; }

void ForEachBoxVector(int dimension, long box, const std::function<void(const LatticeVector&)>& visit) {
  LatticeVector v(dimension, -box);
  while (true) {
    visit(v);
    int i = dimension - 1;
    while (i >= 0 && v[i] == box) {
      v[i] = -box;
      --i;
    }
    if (i < 0) return;
    ++v[i];
  }
}

std::vector<Integer> ToIntegers(const LatticeVector& v) {
  std::vector<Integer> out;
  out.reserve(v.size());
  for (long x : v) out.emplace_back(x);
  return out;
}

bool InBox(const std::vector<Integer>& v, long box, LatticeVector* out) {
  out->clear();
  for (const Integer& x : v) {
    if (abs(x) > box) return false;
    out->push_back(x.get_si());
  }
  return true;
}

IntMatrix GeometricMatrixSum(const IntMatrix& b, unsigned step, unsigned terms) {
  const IntMatrix power = b.Pow(step);
  IntMatrix sum = IntMatrix::Zero(b.dimension());
  IntMatrix term = IntMatrix::Identity(b.dimension());
  for (unsigned i = 0; i < terms; ++i) {
    sum = sum + term;
    term = term * power;
  }
  return sum;
}

}  // namespace

GcdMersenneResult GcdMersenne(long a, unsigned m, unsigned n) {
  Require(a >= 2, "gcd lemma needs a >= 2");
  Require(m >= 1 && n >= 1, "gcd lemma needs positive exponents");
  GcdMersenneResult result;
  const Integer x = MersenneLike(a, m), y = MersenneLike(a, n);
  mpz_gcd(result.gcd.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
  result.predicted = MersenneLike(a, std::gcd(m, n));
  result.holds = result.gcd == result.predicted;
  return result;
}

ScalarLattice SolveScalarLattice(long a, unsigned m, unsigned n) {
  Require(std::abs(a) >= 2, "scalar lattice needs |a| >= 2");
  Require(m >= 1 && n >= 1, "scalar lattice needs positive exponents");
  ScalarLattice lattice;
  lattice.a = a;
  lattice.m = m;
  lattice.n = n;
  const Integer am = MersenneLike(a, m), an = MersenneLike(a, n);
  Integer g;
  mpz_gcd(g.get_mpz_t(), am.get_mpz_t(), an.get_mpz_t());
  lattice.p = std::gcd(m, n);
  // k (a^m - 1) = -l (a^n - 1): k carries the n-factor.
  lattice.k0 = an / g;
  lattice.l0 = -(am / g);
  if (lattice.k0 < 0) {
    lattice.k0 = -lattice.k0;
    lattice.l0 = -lattice.l0;
  }
  return lattice;
}

std::vector<std::pair<long, long>> ScalarLatticeBruteForce(long a, unsigned m, unsigned n, long bound) {
  Require(bound >= 0, "brute-force bound must be non-negative");
  Require((2 * bound + 1) * (2 * bound + 1) <= 4'000'000, "brute-force box exceeds 10^6-scale limit");
  const Integer am = MersenneLike(a, m), an = MersenneLike(a, n);
  std::vector<std::pair<long, long>> solutions;
  for (long k = -bound; k <= bound; ++k) {
    for (long l = -bound; l <= bound; ++l) {
      if (am * k + an * l == 0) solutions.emplace_back(k, l);
    }
  }
  return solutions;
}

std::vector<std::pair<long, long>> ScalarLatticeGenerated(const ScalarLattice& lattice, long bound) {
  std::vector<std::pair<long, long>> points;
  const Integer reach = bound / lattice.k0 + 1;
  for (long j = -reach.get_si(); j <= reach.get_si(); ++j) {
    const Integer k = lattice.k0 * j, l = lattice.l0 * j;
    if (abs(k) <= bound && abs(l) <= bound) points.emplace_back(k.get_si(), l.get_si());
  }
  std::sort(points.begin(), points.end());
  return points;
}

// --------------------------------------------------------------------------

IntPolynomial::IntPolynomial(std::vector<Integer> coefficients) : coefficients_(std::move(coefficients)) {
  Trim();
}

IntPolynomial IntPolynomial::Constant(const Integer& c) { return IntPolynomial({c}); }

IntPolynomial IntPolynomial::Monomial(unsigned degree, const Integer& c) {
  std::vector<Integer> coefficients(degree + 1, 0);
  coefficients[degree] = c;
  return IntPolynomial(std::move(coefficients));
}

IntPolynomial IntPolynomial::GeometricSum(unsigned m) { return IntPolynomial(std::vector<Integer>(m, 1)); }

void IntPolynomial::Trim() {
  while (!coefficients_.empty() && coefficients_.back() == 0) coefficients_.pop_back();
}

IntPolynomial IntPolynomial::operator+(const IntPolynomial& other) const {
  std::vector<Integer> out(std::max(coefficients_.size(), other.coefficients_.size()), 0);
  for (std::size_t i = 0; i < coefficients_.size(); ++i) out[i] += coefficients_[i];
  for (std::size_t i = 0; i < other.coefficients_.size(); ++i) out[i] += other.coefficients_[i];
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator-(const IntPolynomial& other) const {
  std::vector<Integer> out(std::max(coefficients_.size(), other.coefficients_.size()), 0);
  for (std::size_t i = 0; i < coefficients_.size(); ++i) out[i] += coefficients_[i];
  for (std::size_t i = 0; i < other.coefficients_.size(); ++i) out[i] -= other.coefficients_[i];
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator*(const IntPolynomial& other) const {
  if (IsZero() || other.IsZero()) return {};
  std::vector<Integer> out(coefficients_.size() + other.coefficients_.size() - 1, 0);
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    for (std::size_t j = 0; j < other.coefficients_.size(); ++j) {
      out[i + j] += coefficients_[i] * other.coefficients_[j];
    }
  }
  return IntPolynomial(std::move(out));
}

std::pair<IntPolynomial, IntPolynomial> IntPolynomial::DivideMonic(const IntPolynomial& divisor) const {
  Require(!divisor.IsZero() && divisor.coefficients_.back() == 1, "polynomial division needs a monic divisor");
  std::vector<Integer> remainder = coefficients_;
  const int dd = divisor.degree();
  if (degree() < dd) return {IntPolynomial(), *this};
  std::vector<Integer> quotient(degree() - dd + 1, 0);
  for (int i = degree(); i >= dd; --i) {
    const Integer lead = remainder[i];
    if (lead == 0) continue;
    quotient[i - dd] = lead;
    for (int j = 0; j <= dd; ++j) remainder[i - dd + j] -= lead * divisor.coefficients_[j];
  }
  return {IntPolynomial(std::move(quotient)), IntPolynomial(std::move(remainder))};
}

std::string IntPolynomial::ToString() const {
  if (IsZero()) return "0";
  std::string out;
  for (int i = degree(); i >= 0; --i) {
    const Integer& c = coefficients_[i];
    if (c == 0) continue;
    const bool negative = c < 0;
    const Integer magnitude = abs(c);
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (magnitude != 1 || i == 0) out += magnitude.get_str();
    if (i >= 1) out += "x";
    if (i >= 2) out += "^" + std::to_string(i);
  }
  return out;
}

BezoutPair BezoutPolynomials(unsigned m, unsigned n) {
  Require(m >= 1 && n >= 1, "Bezout polynomials need positive m, n");
  if (std::gcd(m, n) != 1) {
    Fail(ErrorCode::kInvalidArgument,
         "Bezout polynomials need coprime m, n (got gcd " + std::to_string(std::gcd(m, n)) + ")");
  }
  if (n == 1) return {IntPolynomial(), IntPolynomial::Constant(1)};
  if (m == 1) return {IntPolynomial::Constant(1), IntPolynomial()};
  // G_m = G_(m-n) + x^(m-n) G_n.
  if (m > n) {
    BezoutPair inner = BezoutPolynomials(m - n, n);
    return {inner.u, inner.v - inner.u * IntPolynomial::Monomial(m - n)};
  }
  BezoutPair inner = BezoutPolynomials(m, n - m);
  return {inner.u - inner.v * IntPolynomial::Monomial(n - m), inner.v};
}

IntPolynomial Cyclotomic(unsigned k) {
  Require(k >= 1, "cyclotomic index must be positive");
  IntPolynomial value = IntPolynomial::Monomial(k) - IntPolynomial::Constant(1);
  for (unsigned d = 1; d < k; ++d) {
    if (k % d == 0) value = value.DivideMonic(Cyclotomic(d)).first;
  }
  return value;
}

// --------------------------------------------------------------------------

IntMatrix::IntMatrix(int dimension, std::vector<Integer> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
  Require(dimension >= 1, "matrix dimension must be positive");
  Require(entries_.size() == static_cast<std::size_t>(dimension) * dimension,
          "matrix needs dimension^2 entries");
}

IntMatrix IntMatrix::FromLongs(int dimension, const std::vector<long>& entries) {
  return IntMatrix(dimension, ToIntegers(entries));
}

IntMatrix IntMatrix::Identity(int dimension) {
  IntMatrix m = Zero(dimension);
  for (int i = 0; i < dimension; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::Zero(int dimension) {
  return IntMatrix(dimension, std::vector<Integer>(static_cast<std::size_t>(dimension) * dimension, 0));
}

IntMatrix IntMatrix::operator+(const IntMatrix& other) const {
  IntMatrix out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] += other.entries_[i];
  return out;
}

IntMatrix IntMatrix::operator-(const IntMatrix& other) const {
  IntMatrix out = *this;
  for (std::size_t i = 0; i < entries_.size(); ++i) out.entries_[i] -= other.entries_[i];
  return out;
}

IntMatrix IntMatrix::operator*(const IntMatrix& other) const {
  IntMatrix out = Zero(dimension_);
  for (int r = 0; r < dimension_; ++r) {
    for (int k = 0; k < dimension_; ++k) {
      if ((*this)(r, k) == 0) continue;
      for (int c = 0; c < dimension_; ++c) out(r, c) += (*this)(r, k) * other(k, c);
    }
  }
  return out;
}

std::vector<Integer> IntMatrix::operator*(const std::vector<Integer>& v) const {
  std::vector<Integer> out(dimension_, 0);
  for (int r = 0; r < dimension_; ++r) {
    for (int c = 0; c < dimension_; ++c) out[r] += (*this)(r, c) * v[c];
  }
  return out;
}

IntMatrix IntMatrix::Pow(unsigned exponent) const {
  IntMatrix result = Identity(dimension_), base = *this;
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    base = base * base;
    exponent >>= 1;
  }
  return result;
}

Integer IntMatrix::Determinant() const {
  const int d = dimension_;
  std::vector<Integer> a = entries_;
  auto at = [&](int r, int c) -> Integer& { return a[r * d + c]; };
  Integer sign = 1, previous = 1;
  for (int k = 0; k < d - 1; ++k) {
    if (at(k, k) == 0) {
      int swap = k + 1;
      while (swap < d && at(swap, k) == 0) ++swap;
      if (swap == d) return 0;
      for (int c = 0; c < d; ++c) std::swap(at(k, c), at(swap, c));
      sign = -sign;
    }
    for (int i = k + 1; i < d; ++i) {
      for (int j = k + 1; j < d; ++j) {
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / previous;
      }
    }
    previous = at(k, k);
  }
  return sign * at(d - 1, d - 1);
}

IntMatrix IntMatrix::Adjugate() const {
  const int d = dimension_;
  if (d == 1) return Identity(1);
  IntMatrix adj = Zero(d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      std::vector<Integer> minor;
      for (int i = 0; i < d; ++i) {
        if (i == r) continue;
        for (int j = 0; j < d; ++j) {
          if (j != c) minor.push_back((*this)(i, j));
        }
      }
      Integer cofactor = IntMatrix(d - 1, std::move(minor)).Determinant();
      adj(c, r) = (r + c) % 2 == 0 ? cofactor : Integer(-cofactor);
    }
  }
  return adj;
}

IntPolynomial IntMatrix::CharacteristicPolynomial() const {
  const int d = dimension_;
  // M_k = A M_(k-1) + c_(d-k+1) I, c_(d-k) = -tr(A M_k) / k.
  std::vector<Integer> c(d + 1, 0);
  c[d] = 1;
  IntMatrix m = Zero(d);
  for (int k = 1; k <= d; ++k) {
    m = *this * m;
    for (int i = 0; i < d; ++i) m(i, i) += c[d - k + 1];
    IntMatrix am = *this * m;
    Integer trace = 0;
    for (int i = 0; i < d; ++i) trace += am(i, i);
    c[d - k] = -trace / k;
  }
  return IntPolynomial(std::move(c));
}

std::string IntMatrix::ToString() const {
  std::ostringstream out;
  out << "[";
  for (int r = 0; r < dimension_; ++r) {
    if (r) out << ",";
    out << "[";
    for (int c = 0; c < dimension_; ++c) {
      if (c) out << ",";
      out << (*this)(r, c).get_str();
    }
    out << "]";
  }
  out << "]";
  return out.str();
}

RootOfUnityScreen ScreenRootsOfUnity(const IntMatrix& b) {
  const int d = b.dimension();
  const unsigned q_max = static_cast<unsigned>(2 * d * d);
  const IntMatrix identity = IntMatrix::Identity(d);
  IntMatrix power = identity;
  for (unsigned q = 1; q <= q_max; ++q) {
    power = power * b;
    if ((power - identity).Determinant() == 0) {
      return {true, "det(B^" + std::to_string(q) + " - I) = 0"};
    }
  }
  const IntPolynomial chi = b.CharacteristicPolynomial();
  for (unsigned k = 1; k <= std::max(q_max, 6u); ++k) {
    const IntPolynomial phi = Cyclotomic(k);
    if (phi.degree() > d) continue;
    if (chi.DivideMonic(phi).second.IsZero()) {
      return {true, "Phi_" + std::to_string(k) + " divides det(xI - B)"};
    }
  }
  return {};
}

MatrixLattice SolveMatrixLattice(const IntMatrix& b, unsigned m, unsigned n) {
  Require(m >= 1 && n >= 1, "matrix lattice needs positive exponents");
  RootOfUnityScreen screen = ScreenRootsOfUnity(b);
  if (screen.found) {
    Fail(ErrorCode::kRootOfUnity, "matrix " + b.ToString() + " has a root-of-unity eigenvalue: " + screen.reason);
  }
  MatrixLattice lattice;
  lattice.b = b;
  lattice.m = m;
  lattice.n = n;
  lattice.p = std::gcd(m, n);
  lattice.k_generator = GeometricMatrixSum(b, lattice.p, n / lattice.p);
  lattice.l_generator = GeometricMatrixSum(b, lattice.p, m / lattice.p);
  return lattice;
}

std::vector<LatticePair> MatrixLatticeBruteForce(const IntMatrix& b, unsigned m, unsigned n, long box) {
  const int d = b.dimension();
  Require(box >= 0, "brute-force box must be non-negative");
  Require(std::pow(2.0 * box + 1, d) <= 1e6, "brute-force box exceeds 10^6 vectors");
  const IntMatrix identity = IntMatrix::Identity(d);
  const IntMatrix left = b.Pow(m) - identity, right = b.Pow(n) - identity;
  std::map<std::vector<Integer>, std::vector<LatticeVector>> images;
  ForEachBoxVector(d, box, [&](const LatticeVector& l) { images[right * ToIntegers(l)].push_back(l); });
  std::vector<LatticePair> solutions;
  ForEachBoxVector(d, box, [&](const LatticeVector& k) {
    auto it = images.find(left * ToIntegers(k));
    if (it == images.end()) return;
    for (const LatticeVector& l : it->second) solutions.emplace_back(k, l);
  });
  std::sort(solutions.begin(), solutions.end());
  return solutions;
}

std::vector<LatticePair> MatrixLatticeGenerated(const MatrixLattice& lattice, long box) {
  const int d = lattice.b.dimension();
  const Integer det = lattice.k_generator.Determinant();
  Require(det != 0, "K-generator is singular");
  // |j| <= ||K^-1||_inf * box.
  const IntMatrix adj = lattice.k_generator.Adjugate();
  Integer row_max = 0;
  for (int r = 0; r < d; ++r) {
    Integer row = 0;
    for (int c = 0; c < d; ++c) row += abs(adj(r, c));
    row_max = std::max(row_max, row);
  }
  const Integer reach_big = (row_max * box) / abs(det) + 1;
  const long reach = reach_big.get_si();
  Require(std::pow(2.0 * reach + 1, d) <= 1e7, "generated-set enumeration too large");
  std::vector<LatticePair> points;
  LatticeVector k, l;
  ForEachBoxVector(d, reach, [&](const LatticeVector& j) {
    const std::vector<Integer> jj = ToIntegers(j);
    if (InBox(lattice.k_generator * jj, box, &k) && InBox(lattice.l_generator * jj, box, &l)) {
      points.emplace_back(k, l);
    }
  });
  std::sort(points.begin(), points.end());
  return points;
}

GeneratorGrowth MeasureGeneratorGrowth(const IntMatrix& b, unsigned n, unsigned p, int sample_count,
                                       std::uint64_t seed) {
  Require(n >= 1 && p >= 1 && n % p == 0, "generator growth needs p dividing n");
  Require(sample_count >= 1, "generator growth needs at least one sample");
  const int d = b.dimension();
  Eigen::MatrixXd dense(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) dense(r, c) = b(r, c).get_d();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
  double lambda = INFINITY;
  for (int i = 0; i < d; ++i) lambda = std::min(lambda, std::abs(solver.eigenvalues()[i]));
  if (lambda <= 1.0 + 1e-12) {
    Fail(ErrorCode::kNonExpanding, "generator growth needs every eigenvalue outside the unit circle (smallest |eigenvalue| = " +
                                       std::to_string(lambda) + ")");
  }
  const IntMatrix k_generator = GeometricMatrixSum(b, p, n / p);
  RandomStream stream(seed, 0);
  GeneratorGrowth growth;
  growth.lambda = lambda;
  growth.min_ratio = INFINITY;
  while (growth.samples < sample_count) {
    std::vector<Integer> j(d);
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      long entry = static_cast<long>(stream.NextU64() % 21) - 10;
      zero = zero && entry == 0;
      j[i] = entry;
    }
    if (zero) continue;
    ++growth.samples;
    const std::vector<Integer> image = k_generator * j;
    double num = 0, den = 0;
    for (int i = 0; i < d; ++i) {
      num += image[i].get_d() * image[i].get_d();
      den += j[i].get_d() * j[i].get_d();
    }
    growth.min_ratio = std::min(growth.min_ratio, std::sqrt(num / den));
  }
  growth.fitted_c = growth.min_ratio / std::pow(lambda, static_cast<double>(n - p));
  return growth;
}

}  // namespace recurlab
