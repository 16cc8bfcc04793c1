#include "recurlab/radius.h"

#include <sstream>

#include "recurlab/error.h"

namespace recurlab {

namespace mp = boost::multiprecision;

namespace {

bool IsInteger(const Rational& value) { return value.get_den() == 1; }

std::vector<std::string> SplitTopLevel(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

// "name(arg)" -> arg, or nullopt when the text is exactly `name`.
std::optional<std::string> CallArgument(const std::string& text, const std::string& name) {
  if (text.rfind(name + "(", 0) != 0 || text.back() != ')') return std::nullopt;
  return text.substr(name.size() + 1, text.size() - name.size() - 2);
}

std::string RuleToString(const EarRule& rule) {
  std::string delta;
  switch (rule.delta) {
    case EarRule::Delta::kNaturalLog: delta = "log"; break;
    case EarRule::Delta::kLog2Scaled: delta = "log2s(" + ToString(rule.delta_param) + ")"; break;
    case EarRule::Delta::kConstant: delta = "const(" + ToString(rule.delta_param) + ")"; break;
  }
  std::string h;
  switch (rule.h) {
    case EarRule::H::kConstant: h = "const(" + ToString(rule.h_param) + ")"; break;
    case EarRule::H::kLog: h = "log"; break;
    case EarRule::H::kLogLog: h = "loglog"; break;
    case EarRule::H::kIdentity: h = "id"; break;
  }
  return delta + ";" + h;
}

}  // namespace

Real EarRule::DeltaAt(long m) const {
  switch (delta) {
    case Delta::kNaturalLog: return mp::log(Real(m));
    case Delta::kLog2Scaled: return (2 + ToReal(delta_param)) * mp::log2(Real(m));
    case Delta::kConstant: return ToReal(delta_param);
  }
  return 0;
}

Real EarRule::HAt(const Real& x) const {
  switch (h) {
    case H::kConstant: return ToReal(h_param);
    case H::kIdentity: return x;
    case H::kLog: return x > 0 ? Real(mp::log(x)) : Real(0);
    case H::kLogLog: {
      if (x <= 1) return 0;
      Real inner = mp::log(x);
      return inner > 0 ? Real(mp::log(inner)) : Real(0);
    }
  }
  return 0;
}

RadiusSequence::RadiusSequence(Variant variant) : variant_(std::move(variant)) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          if (v.kappa <= 0) Fail(ErrorCode::kInvalidArgument, "powerlaw kappa must be positive");
        } else if constexpr (std::is_same_v<T, PowerLog>) {
          if (v.kappa <= 0) Fail(ErrorCode::kInvalidArgument, "powerlog kappa must be positive");
          if (v.theta < 0) Fail(ErrorCode::kInvalidArgument, "powerlog theta must be non-negative");
        } else if constexpr (std::is_same_v<T, EarRule>) {
          if (v.delta == EarRule::Delta::kLog2Scaled && v.delta_param <= 0) {
            Fail(ErrorCode::kInvalidArgument, "ear sigma must be positive");
          }
          if (v.delta == EarRule::Delta::kConstant && v.delta_param <= 0) {
            Fail(ErrorCode::kInvalidArgument, "ear delta constant must be positive");
          }
          if (v.h == EarRule::H::kConstant && v.h_param < 0) {
            Fail(ErrorCode::kInvalidArgument, "ear h constant must be non-negative");
          }
        } else {
          if (v.values.empty()) Fail(ErrorCode::kInvalidArgument, "table radius sequence is empty");
          for (const Rational& r : v.values) {
            if (r < 0) Fail(ErrorCode::kInvalidArgument, "table radii must be non-negative");
          }
        }
      },
      variant_);
}

RadiusSequence RadiusSequence::Parse(std::string_view text) {
  const std::string s(text);
  auto colon = s.find(':');
  if (colon == std::string::npos) {
    Fail(ErrorCode::kInvalidArgument, "radius sequence needs 'kind:params', got '" + s + "'");
  }
  const std::string kind = s.substr(0, colon);
  const std::string params = s.substr(colon + 1);
  if (kind == "powerlaw" || kind == "powerlog") {
    auto parts = SplitTopLevel(params, ',');
    if (parts.size() != 2) Fail(ErrorCode::kInvalidArgument, kind + " needs two parameters");
    Rational kappa = ParseRational(parts[0]);
    Rational exponent = ParseRational(parts[1]);
    if (kind == "powerlaw") return RadiusSequence(PowerLaw{kappa, exponent});
    return RadiusSequence(PowerLog{kappa, exponent});
  }
  if (kind == "table") {
    ExplicitTable table;
    for (const auto& part : SplitTopLevel(params, ',')) table.values.push_back(ParseRational(part));
    return RadiusSequence(std::move(table));
  }
  if (kind == "ear") {
    auto parts = SplitTopLevel(params, ';');
    if (parts.size() != 2) Fail(ErrorCode::kInvalidArgument, "ear needs 'delta;h'");
    EarRule rule;
    if (parts[0] == "log") {
      rule.delta = EarRule::Delta::kNaturalLog;
    } else if (auto arg = CallArgument(parts[0], "log2s")) {
      rule.delta = EarRule::Delta::kLog2Scaled;
      rule.delta_param = ParseRational(*arg);
    } else if (auto arg = CallArgument(parts[0], "const")) {
      rule.delta = EarRule::Delta::kConstant;
      rule.delta_param = ParseRational(*arg);
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown ear delta rule '" + parts[0] + "'");
    }
    if (parts[1] == "log") {
      rule.h = EarRule::H::kLog;
    } else if (parts[1] == "loglog") {
      rule.h = EarRule::H::kLogLog;
    } else if (parts[1] == "id") {
      rule.h = EarRule::H::kIdentity;
    } else if (auto arg = CallArgument(parts[1], "const")) {
      rule.h = EarRule::H::kConstant;
      rule.h_param = ParseRational(*arg);
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown ear h rule '" + parts[1] + "'");
    }
    return RadiusSequence(rule);
  }
  Fail(ErrorCode::kInvalidArgument, "unknown radius sequence kind '" + kind + "'");
}

std::string RadiusSequence::ToString() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return "powerlaw:" + recurlab::ToString(v.kappa) + "," + recurlab::ToString(v.gamma);
        } else if constexpr (std::is_same_v<T, PowerLog>) {
          return "powerlog:" + recurlab::ToString(v.kappa) + "," + recurlab::ToString(v.theta);
        } else if constexpr (std::is_same_v<T, EarRule>) {
          return "ear:" + RuleToString(v);
        } else {
          std::string out = "table:";
          for (std::size_t i = 0; i < v.values.size(); ++i) {
            if (i) out += ",";
            out += recurlab::ToString(v.values[i]);
          }
          return out;
        }
      },
      variant_);
}

RadiusValue RadiusSequence::Evaluate(long n) const {
  Require(n >= 1, "radius index must be >= 1");
  return std::visit(
      [n](const auto& v) -> RadiusValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          if (IsInteger(v.gamma) && v.gamma.get_num().fits_slong_p()) {
            long g = v.gamma.get_num().get_si();
            Rational power(Pow(Integer(n), static_cast<unsigned long>(g < 0 ? -g : g)));
            Rational exact = g >= 0 ? Rational(v.kappa / power) : Rational(v.kappa * power);
            exact.canonicalize();
            return {exact, ToReal(exact)};
          }
          return {std::nullopt, ToReal(v.kappa) * mp::pow(Real(n), -ToReal(v.gamma))};
        } else if constexpr (std::is_same_v<T, PowerLog>) {
          Real log_n = mp::log(Real(n));
          if (log_n <= 1 || v.theta == 0) {
            Rational exact = v.kappa / Rational(n);
            exact.canonicalize();
            return {exact, ToReal(exact)};
          }
          return {std::nullopt, ToReal(v.kappa) / (Real(n) * mp::pow(log_n, ToReal(v.theta)))};
        } else if constexpr (std::is_same_v<T, EarRule>) {
          Real delta = v.DeltaAt(n);
          Real r = delta * v.HAt(delta) / Real(n);
          if (r <= 0) return {Rational(0), Real(0)};
          return {std::nullopt, r};
        } else {
          if (static_cast<std::size_t>(n) > v.values.size()) {
            Fail(ErrorCode::kInvalidArgument,
                 "table radius sequence has no entry for n=" + std::to_string(n));
          }
          const Rational& exact = v.values[n - 1];
          return {exact, ToReal(exact)};
        }
      },
      variant_);
}

double RadiusSequence::Approx(long n) const { return static_cast<double>(Evaluate(n).value); }

Rational RadiusSequence::AsRational(long n, unsigned bits) const {
  RadiusValue value = Evaluate(n);
  if (value.exact) return *value.exact;
  return FloorDyadic(value.value, bits);
}

}  // namespace recurlab
