#include "recurlab/system.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "recurlab/error.h"

namespace recurlab {

namespace {

std::vector<std::string> Split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

long ParseLong(const std::string& text) {
  Rational value = ParseRational(text);
  if (value.get_den() != 1 || !value.get_num().fits_slong_p()) {
    Fail(ErrorCode::kInvalidArgument, "expected an integer, got '" + text + "'");
  }
  return value.get_num().get_si();
}

void ValidatePiecewise(const PiecewiseLinear& map) {
  if (map.branches.empty()) Fail(ErrorCode::kInvalidArgument, "piecewise map has no branches");
  Rational cursor = 0;
  for (const ExactBranch& b : map.branches) {
    if (b.left != cursor) {
      Fail(ErrorCode::kInvalidArgument, "piecewise branch domains must partition [0,1) in order");
    }
    if (b.right <= b.left) Fail(ErrorCode::kInvalidArgument, "piecewise branch with empty domain");
    if (b.slope == 0) Fail(ErrorCode::kInvalidArgument, "piecewise branch with zero slope");
    Rational y0 = b.slope * b.left + b.intercept;
    Rational y1 = b.slope * b.right + b.intercept;
    Rational lo = y0 < y1 ? y0 : y1;
    Rational hi = y0 < y1 ? y1 : y0;
    if (lo < 0 || hi > 1) {
      Fail(ErrorCode::kInvalidArgument, "piecewise branch image leaves [0,1]");
    }
    cursor = b.right;
  }
  if (cursor != 1) Fail(ErrorCode::kInvalidArgument, "piecewise branch domains must cover [0,1)");
}

long Determinant(const ToralLinear& map) {
  // Integer Bareiss elimination; dimensions here are tiny.
  const int d = map.dimension;
  std::vector<Integer> m(map.matrix.begin(), map.matrix.end());
  Integer previous = 1;
  int sign = 1;
  for (int k = 0; k < d - 1; ++k) {
    if (m[k * d + k] == 0) {
      int swap = -1;
      for (int i = k + 1; i < d; ++i) {
        if (m[i * d + k] != 0) {
          swap = i;
          break;
        }
      }
      if (swap < 0) return 0;
      for (int j = 0; j < d; ++j) std::swap(m[k * d + j], m[swap * d + j]);
      sign = -sign;
    }
    for (int i = k + 1; i < d; ++i) {
      for (int j = k + 1; j < d; ++j) {
        m[i * d + j] = (m[i * d + j] * m[k * d + k] - m[i * d + k] * m[k * d + j]) / previous;
      }
    }
    previous = m[k * d + k];
  }
  Integer det = m[d * d - 1] * sign;
  return det.get_si();
}

}  // namespace

SystemSpec::SystemSpec(Variant variant) : variant_(std::move(variant)) {
  if (auto* toral = std::get_if<ToralLinear>(&variant_)) {
    Require(toral->dimension >= 1, "toral map dimension must be >= 1");
    Require(static_cast<int>(toral->matrix.size()) == toral->dimension * toral->dimension,
            "toral matrix size does not match dimension");
    if (Determinant(*toral) == 0) Fail(ErrorCode::kInvalidArgument, "toral matrix is singular");
    if (toral->dimension == 1) variant_ = IntegerCircleMap{toral->matrix[0]};
  }
  if (auto* circle = std::get_if<IntegerCircleMap>(&variant_)) {
    if (circle->a >= -1 && circle->a <= 1) {
      Fail(ErrorCode::kNonExpanding, "integer circle map needs |a| >= 2, got a=" + std::to_string(circle->a));
    }
  }
  if (auto* beta = std::get_if<BetaMap>(&variant_)) {
    if (beta->beta.ToReal() <= 1) Fail(ErrorCode::kNonExpanding, "beta map needs beta > 1");
  }
  if (auto* piecewise = std::get_if<PiecewiseLinear>(&variant_)) ValidatePiecewise(*piecewise);
}

SystemSpec SystemSpec::Parse(std::string_view text) {
  const std::string s(text);
  if (s == "doubling") return Doubling();
  if (s == "tent") {
    return SystemSpec(PiecewiseLinear{{{Rational(0), Rational(1, 2), Rational(2), Rational(0)},
                                       {Rational(1, 2), Rational(1), Rational(-2), Rational(2)}}});
  }
  auto colon = s.find(':');
  if (colon == std::string::npos) Fail(ErrorCode::kInvalidArgument, "unknown system '" + s + "'");
  const std::string kind = s.substr(0, colon);
  const std::string params = s.substr(colon + 1);
  if (kind == "circle") return SystemSpec(IntegerCircleMap{ParseLong(params)});
  if (kind == "beta") return SystemSpec(BetaMap{QuadraticSurd::Parse(params)});
  if (kind == "rotation") return SystemSpec(Rotation{QuadraticSurd::Parse(params)});
  if (kind == "toral") {
    ToralLinear map;
    auto rows = Split(params, ';');
    map.dimension = static_cast<int>(rows.size());
    for (const auto& row : rows) {
      auto cols = Split(row, ',');
      if (static_cast<int>(cols.size()) != map.dimension) {
        Fail(ErrorCode::kInvalidArgument, "toral matrix must be square: '" + params + "'");
      }
      for (const auto& c : cols) map.matrix.push_back(ParseLong(c));
    }
    return SystemSpec(map);
  }
  if (kind == "piecewise") {
    PiecewiseLinear map;
    for (const auto& branch : Split(params, ';')) {
      auto f = Split(branch, ',');
      if (f.size() != 4) {
        Fail(ErrorCode::kInvalidArgument, "piecewise branch needs left,right,slope,intercept: '" + branch + "'");
      }
      map.branches.push_back({ParseRational(f[0]), ParseRational(f[1]), ParseRational(f[2]), ParseRational(f[3])});
    }
    return SystemSpec(map);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown system kind '" + kind + "'");
}

std::string SystemSpec::ToString() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IntegerCircleMap>) {
          return v.a == 2 ? "doubling" : "circle:" + std::to_string(v.a);
        } else if constexpr (std::is_same_v<T, BetaMap>) {
          return "beta:" + v.beta.ToString();
        } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
          std::string out = "piecewise:";
          for (std::size_t i = 0; i < v.branches.size(); ++i) {
            const auto& b = v.branches[i];
            if (i) out += ";";
            out += recurlab::ToString(b.left) + "," + recurlab::ToString(b.right) + "," +
                   recurlab::ToString(b.slope) + "," + recurlab::ToString(b.intercept);
          }
          return out;
        } else if constexpr (std::is_same_v<T, ToralLinear>) {
          std::string out = "toral:";
          for (int r = 0; r < v.dimension; ++r) {
            if (r) out += ";";
            for (int c = 0; c < v.dimension; ++c) {
              if (c) out += ",";
              out += std::to_string(v.at(r, c));
            }
          }
          return out;
        } else {
          return "rotation:" + v.alpha.ToString();
        }
      },
      variant_);
}

int SystemSpec::dimension() const {
  if (auto* toral = std::get_if<ToralLinear>(&variant_)) return toral->dimension;
  return 1;
}

Metric SystemSpec::metric() const {
  if (Is<ToralLinear>()) return Metric::kTorus;
  if (Is<BetaMap>() || Is<PiecewiseLinear>()) return Metric::kInterval;
  return Metric::kCircle;
}

bool SystemSpec::IsExpandingInterval() const {
  if (Is<IntegerCircleMap>() || Is<BetaMap>()) return true;
  if (Is<PiecewiseLinear>()) return MinExpansion() > 1;
  return false;
}

bool SystemSpec::HasExactBranches() const {
  if (Is<IntegerCircleMap>() || Is<PiecewiseLinear>()) return true;
  if (auto* beta = std::get_if<BetaMap>(&variant_)) return beta->beta.IsRational();
  return false;
}

std::vector<ExactBranch> SystemSpec::ExactBranches() const {
  if (auto* circle = std::get_if<IntegerCircleMap>(&variant_)) {
    std::vector<ExactBranch> branches;
    const long a = circle->a;
    const long count = a > 0 ? a : -a;
    for (long k = 0; k < count; ++k) {
      // a > 0: a x - k.  a < 0: a x + k + 1 (value 1 at the left end, a null set).
      Rational intercept = a > 0 ? Rational(-k) : Rational(k + 1);
      branches.push_back({Rational(k, count), Rational(k + 1, count), Rational(a), intercept});
      branches.back().left.canonicalize();
      branches.back().right.canonicalize();
    }
    return branches;
  }
  if (auto* piecewise = std::get_if<PiecewiseLinear>(&variant_)) return piecewise->branches;
  if (auto* beta = std::get_if<BetaMap>(&variant_); beta && beta->beta.IsRational()) {
    Rational b = beta->beta.AsRational();
    std::vector<ExactBranch> branches;
    for (long k = 0;; ++k) {
      Rational left = Rational(k) / b;
      if (left >= 1) break;
      Rational right = Rational(k + 1) / b;
      if (right > 1) right = 1;
      branches.push_back({left, right, b, Rational(-k)});
    }
    return branches;
  }
  Fail(ErrorCode::kInvalidArgument, "system " + ToString() + " has no exact affine branches");
}

std::vector<ApproxBranch> SystemSpec::ApproxBranches() const {
  if (auto* beta = std::get_if<BetaMap>(&variant_); beta && !beta->beta.IsRational()) {
    const long double b = static_cast<long double>(beta->beta.ToReal());
    std::vector<ApproxBranch> branches;
    for (long k = 0;; ++k) {
      long double left = static_cast<long double>(static_cast<long double>(k) / b);
      if (left >= 1) break;
      long double right = std::min<long double>(static_cast<long double>(k + 1) / b, 1.0L);
      branches.push_back({left, right, b, static_cast<long double>(-k)});
    }
    return branches;
  }
  std::vector<ApproxBranch> branches;
  for (const ExactBranch& e : ExactBranches()) {
    auto cast = [](const Rational& q) {
      return static_cast<long double>(ToReal(q));
    };
    branches.push_back({cast(e.left), cast(e.right), cast(e.slope), cast(e.intercept)});
  }
  return branches;
}

double SystemSpec::MinExpansion() const {
  if (auto* circle = std::get_if<IntegerCircleMap>(&variant_)) return std::abs(static_cast<double>(circle->a));
  if (auto* beta = std::get_if<BetaMap>(&variant_)) return beta->beta.ToDouble();
  if (auto* piecewise = std::get_if<PiecewiseLinear>(&variant_)) {
    double lambda = INFINITY;
    for (const auto& b : piecewise->branches) lambda = std::min(lambda, std::abs(b.slope.get_d()));
    return lambda;
  }
  return 1.0;  // rotations and toral maps: no uniform interval expansion
}

double SystemSpec::MaxExpansion() const {
  if (auto* piecewise = std::get_if<PiecewiseLinear>(&variant_)) {
    double big = 0;
    for (const auto& b : piecewise->branches) big = std::max(big, std::abs(b.slope.get_d()));
    return big;
  }
  if (auto* toral = std::get_if<ToralLinear>(&variant_)) {
    double big = 0;
    for (int r = 0; r < toral->dimension; ++r) {
      double row = 0;
      for (int c = 0; c < toral->dimension; ++c) row += std::abs(static_cast<double>(toral->at(r, c)));
      big = std::max(big, row);
    }
    return big;
  }
  return MinExpansion();
}

double SystemSpec::BranchImageMin() const {
  double shortest = INFINITY;
  for (const ApproxBranch& b : ApproxBranches()) {
    shortest = std::min(shortest, static_cast<double>(std::fabs(b.slope) * (b.right - b.left)));
  }
  return shortest;
}

}  // namespace recurlab
