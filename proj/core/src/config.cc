#include "recurlab/config.h"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "recurlab/experiments.h"
#include "recurlab/number_theory.h"
#include "recurlab/orbit.h"
#include "recurlab/stats.h"
#include "recurlab/transfer_operator.h"

namespace recurlab {

namespace {

std::string Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> SplitList(const std::string& text, char sep = ',') {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(Trim(part));
  return parts;
}

std::string FormatDouble(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

long ParseLongValue(const std::string& text) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidArgument, "expected an integer, got '" + text + "'");
  }
  if (used != text.size()) Fail(ErrorCode::kInvalidArgument, "expected an integer, got '" + text + "'");
  return value;
}

double ParseDoubleValue(const std::string& text) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidArgument, "expected a number, got '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) {
    Fail(ErrorCode::kInvalidArgument, "expected a finite number, got '" + text + "'");
  }
  return value;
}

long RangedLong(const std::string& text, long lo, long hi) {
  const long value = ParseLongValue(text);
  if (value < lo || value > hi) {
    Fail(ErrorCode::kInvalidArgument,
         "value " + text + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return value;
}

bool ParseBool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  Fail(ErrorCode::kInvalidArgument, "expected true or false, got '" + text + "'");
}

std::string JoinLongs(const std::vector<long>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

std::string JoinDoubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + FormatDouble(values[i]);
  return out;
}

std::vector<long> ParseLongList(const std::string& text, long lo) {
  std::vector<long> values;
  for (const auto& part : SplitList(text)) values.push_back(RangedLong(part, lo, 1L << 40));
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "empty list");
  return values;
}

std::vector<double> ParseDoubleList(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : SplitList(text)) values.push_back(ParseDoubleValue(part));
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "empty list");
  return values;
}

constexpr long kMaxLong = 1L << 40;

// Applies one value and returns its canonical spelling.
using Setter = std::function<std::string(RunConfig&, const std::string&)>;

struct KeySpec {
  std::string name;
  std::string help;
  Setter apply;
  bool per_process = false;  // excluded from the canonical config
};

Setter LongSetter(long RunConfig::*field, long lo, long hi = kMaxLong) {
  return [field, lo, hi](RunConfig& c, const std::string& v) {
    c.*field = RangedLong(v, lo, hi);
    return std::to_string(c.*field);
  };
}

Setter SequenceSetter(std::optional<RadiusSequence> RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) {
    c.*field = RadiusSequence::Parse(v);
    return (c.*field)->ToString();
  };
}

Setter PositiveRationalSetter(Rational RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) {
    Rational value = ParseRational(v);
    if (value <= 0) Fail(ErrorCode::kInvalidArgument, "must be positive, got '" + v + "'");
    c.*field = value;
    return ToString(value);
  };
}

const std::vector<KeySpec>& Keys() {
  static const std::vector<KeySpec> keys = {
      {"run.experiment", "experiment verb",
       [](RunConfig& c, const std::string& v) {
         if (std::find(std::begin(kExperiments), std::end(kExperiments), v) == std::end(kExperiments)) {
           Fail(ErrorCode::kInvalidArgument, "unknown experiment '" + v + "'");
         }
         c.experiment = v;
         return v;
       }},
      {"run.seed", "base seed of the sample streams",
       [](RunConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(RangedLong(v, 0, std::numeric_limits<long>::max()));
         return std::to_string(c.seed);
       }},
      {"run.samples", "Monte Carlo sample count M", LongSetter(&RunConfig::samples, 1, 100000000)},
      {"run.threads", "worker threads (results do not depend on it)",
       [](RunConfig& c, const std::string& v) {
         c.threads = static_cast<int>(RangedLong(v, 1, 1024));
         return std::to_string(c.threads);
       },
       true},
      {"run.output", "output directory",
       [](RunConfig& c, const std::string& v) {
         if (v.empty()) Fail(ErrorCode::kInvalidArgument, "empty output directory");
         c.output = v;
         return v;
       },
       true},
      {"run.include_runtime", "record wall-clock runtime in the report",
       [](RunConfig& c, const std::string& v) {
         c.include_runtime = ParseBool(v);
         return std::string(c.include_runtime ? "true" : "false");
       },
       true},
      {"system.spec", "doubling | circle:a | tent | beta:x | rotation:x | toral:rows | piecewise:branches",
       [](RunConfig& c, const std::string& v) {
         c.system = SystemSpec::Parse(v);
         return c.system->ToString();
       }},
      {"sequence.spec", "powerlaw:k,g | powerlog:k,theta | ear:delta;h | table:r1,r2,...",
       SequenceSetter(&RunConfig::sequence)},
      {"sequence.convergent", "summable radius sequence for the dichotomy", SequenceSetter(&RunConfig::convergent)},
      {"sequence.divergent", "non-summable radius sequence for the dichotomy",
       SequenceSetter(&RunConfig::divergent)},
      {"sequence.r", "fixed radius for the exact recurrence set",
       [](RunConfig& c, const std::string& v) {
         Rational value = ParseRational(v);
         if (value < 0) Fail(ErrorCode::kInvalidArgument, "must be non-negative, got '" + v + "'");
         c.r = value;
         return ToString(value);
       }},
      {"sequence.thetas", "comma-separated log exponents for the rate scan",
       [](RunConfig& c, const std::string& v) {
         c.thetas = ParseDoubleList(v);
         for (double t : c.thetas) {
           if (t < 0) Fail(ErrorCode::kInvalidArgument, "theta must be non-negative, got " + FormatDouble(t));
         }
         return JoinDoubles(c.thetas);
       }},
      {"sequence.kappa", "constant of the rate-scan radii", PositiveRationalSetter(&RunConfig::kappa)},
      {"sequence.H", "Petrov weight H", PositiveRationalSetter(&RunConfig::H)},
      {"sequence.sigma", "sigma of the eventually-always bound",
       [](RunConfig& c, const std::string& v) {
         c.sigma = ParseDoubleValue(v);
         if (c.sigma <= 0) Fail(ErrorCode::kInvalidArgument, "sigma must be positive, got '" + v + "'");
         return FormatDouble(c.sigma);
       }},
      {"window.k", "first time of the truncated window", LongSetter(&RunConfig::k, 1)},
      {"window.N", "last time of the window", LongSetter(&RunConfig::N, 1)},
      {"window.n0", "first m of the eventually-always window", LongSetter(&RunConfig::n0, 1)},
      {"window.horizon", "last m of the eventually-always window", LongSetter(&RunConfig::horizon, 1)},
      {"window.n", "time n of the exact recurrence set", LongSetter(&RunConfig::n, 1, 4096)},
      {"window.steps", "orbit length", LongSetter(&RunConfig::steps, 1)},
      {"window.terms", "number of series terms", LongSetter(&RunConfig::terms, 2, 1000000)},
      {"window.onset", "first m at which the bound is required", LongSetter(&RunConfig::onset, 1)},
      {"window.bins", "Ulam bin count",
       [](RunConfig& c, const std::string& v) {
         c.bins = static_cast<int>(RangedLong(v, 2, 1 << 24));
         return std::to_string(c.bins);
       }},
      {"window.n_max", "largest n of the correlation fit or sandwich",
       [](RunConfig& c, const std::string& v) {
         c.n_max = static_cast<int>(RangedLong(v, 1, 10000));
         return std::to_string(c.n_max);
       }},
      {"window.checkpoints", "ascending orbit lengths N",
       [](RunConfig& c, const std::string& v) {
         c.checkpoints = ParseLongList(v, 1);
         if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end())) {
           Fail(ErrorCode::kInvalidArgument, "checkpoints must be ascending");
         }
         return JoinLongs(c.checkpoints);
       }},
      {"window.alphas", "Boshernitzan exponents",
       [](RunConfig& c, const std::string& v) {
         c.alphas = ParseDoubleList(v);
         for (double a : c.alphas) {
           if (a <= 0) Fail(ErrorCode::kInvalidArgument, "alpha must be positive, got " + FormatDouble(a));
         }
         return JoinDoubles(c.alphas);
       }},
      {"window.m_grid", "m values of the eventually-always bound check",
       [](RunConfig& c, const std::string& v) {
         c.m_grid = ParseLongList(v, 1);
         return JoinLongs(c.m_grid);
       }},
      {"window.x", "rational orbit start in [0,1); random when absent",
       [](RunConfig& c, const std::string& v) {
         Rational value = ParseRational(v);
         if (value < 0 || value >= 1) Fail(ErrorCode::kInvalidArgument, "start must lie in [0,1), got '" + v + "'");
         c.x = value;
         return ToString(value);
       }},
      {"nt.a", "integer base a", LongSetter(&RunConfig::nt_a, 2, 1000000)},
      {"nt.m", "exponent m", LongSetter(&RunConfig::nt_m, 1, 4096)},
      {"nt.n", "exponent n", LongSetter(&RunConfig::nt_n, 1, 4096)},
      {"nt.max", "largest exponent of the exhaustive gcd check", LongSetter(&RunConfig::nt_max, 1, 512)},
      {"nt.bound", "brute-force box |k|,|l| <= bound", LongSetter(&RunConfig::nt_bound, 0, 100000)},
      {"nt.box", "brute-force entry box [-box, box]", LongSetter(&RunConfig::nt_box, 0, 50)},
      {"nt.matrix", "integer matrix, rows separated by ';'",
       [](RunConfig& c, const std::string& v) {
         const auto rows = SplitList(v, ';');
         std::string canonical;
         for (std::size_t i = 0; i < rows.size(); ++i) {
           const auto cols = SplitList(rows[i]);
           if (cols.size() != rows.size()) Fail(ErrorCode::kInvalidArgument, "matrix must be square: '" + v + "'");
           for (std::size_t j = 0; j < cols.size(); ++j) {
             canonical += (j ? "," : (i ? ";" : "")) + std::to_string(ParseLongValue(cols[j]));
           }
         }
         c.nt_matrix = canonical;
         return canonical;
       }},
      {"budget.arcs", "arc and branch-piece budget",
       [](RunConfig& c, const std::string& v) {
         c.budget_arcs = static_cast<std::uint64_t>(RangedLong(v, 1, 1L << 40));
         return std::to_string(c.budget_arcs);
       }},
      {"budget.precision_bits", "cap on fixed-point bits (0: none)",
       [](RunConfig& c, const std::string& v) {
         c.precision_bits = static_cast<unsigned>(RangedLong(v, 0, 1 << 24));
         return std::to_string(c.precision_bits);
       }},
      {"budget.runtime_seconds", "wall-clock cap (0: none)",
       [](RunConfig& c, const std::string& v) {
         c.runtime_seconds = ParseDoubleValue(v);
         if (c.runtime_seconds < 0) Fail(ErrorCode::kInvalidArgument, "runtime cap must be non-negative");
         return FormatDouble(c.runtime_seconds);
       }},
  };
  return keys;
}

struct ExperimentKeys {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

const std::map<std::string, ExperimentKeys>& ExperimentTable() {
  static const std::map<std::string, ExperimentKeys> table = {
      {"rio", {{"system.spec", "sequence.spec", "window.k", "window.N"}, {"run.samples", "window.bins"}}},
      {"rio-dichotomy",
       {{"system.spec", "sequence.convergent", "sequence.divergent", "window.k", "window.N"},
        {"run.samples", "window.bins"}}},
      {"rate-scan",
       {{"system.spec", "sequence.thetas", "window.k", "window.N"}, {"sequence.kappa", "run.samples", "window.bins"}}},
      {"ear", {{"system.spec", "sequence.spec", "window.n0", "window.horizon"}, {"run.samples", "window.bins"}}},
      {"ear-bound", {{"sequence.spec", "sequence.sigma", "window.m_grid"}, {"window.onset", "system.spec"}}},
      {"petrov", {{"system.spec", "sequence.spec", "window.N"}, {"sequence.H"}}},
      {"ulam", {{"system.spec"}, {"window.bins", "window.n_max"}}},
      {"series", {{"system.spec", "sequence.spec", "window.terms"}, {"window.bins"}}},
      {"sandwich", {{"system.spec", "sequence.spec", "window.n_max"}, {"run.samples", "window.bins"}}},
      {"boshernitzan", {{"system.spec", "window.alphas", "window.checkpoints"}, {"run.samples", "window.bins"}}},
      {"orbit", {{"system.spec", "window.steps"}, {"window.x"}}},
      {"exact", {{"system.spec", "window.n"}, {"sequence.spec", "sequence.r"}}},
      {"nt-gcd", {{"nt.a", "nt.max"}, {}}},
      {"nt-lattice", {{"nt.a", "nt.m", "nt.n"}, {"nt.bound"}}},
      {"nt-matrix-lattice", {{"nt.matrix", "nt.m", "nt.n"}, {"nt.box"}}},
      {"nt-bezout", {{"nt.m", "nt.n"}, {}}},
  };
  return table;
}

bool AlwaysAllowed(const std::string& key) {
  return key.rfind("budget.", 0) == 0 || key == "run.experiment" || key == "run.seed" || key == "run.threads" ||
         key == "run.output" || key == "run.include_runtime";
}

void CheckConsistency(const RunConfig& c, const std::set<std::string>& present, std::vector<std::string>& errors) {
  auto error = [&errors](const std::string& message) { errors.push_back(message); };
  const std::string& e = c.experiment;
  const bool sampled = e == "rio" || e == "rio-dichotomy" || e == "rate-scan" || e == "ear" || e == "sandwich" ||
                       e == "boshernitzan";
  if ((e == "rio" || e == "rio-dichotomy" || e == "rate-scan") && present.count("window.N") &&
      present.count("window.k") && c.N < c.k) {
    error("window.N: must be at least window.k (" + std::to_string(c.k) + ")");
  }
  if (e == "ear" && present.count("window.horizon") && c.horizon < c.n0) {
    error("window.horizon: must be at least window.n0 (" + std::to_string(c.n0) + ")");
  }
  if ((e == "rio" || e == "rio-dichotomy" || e == "rate-scan") && c.samples < 100) {
    error("run.samples: truncated recurrence estimates need at least 100 samples");
  }
  if (e == "exact" && present.count("sequence.spec") == present.count("sequence.r")) {
    error("sequence: exact needs exactly one of sequence.spec and sequence.r");
  }
  if (e == "nt-bezout" && std::gcd(c.nt_m, c.nt_n) != 1) {
    error("nt.m: Bezout polynomials need coprime m and n, got gcd " + std::to_string(std::gcd(c.nt_m, c.nt_n)));
  }
  if (e == "nt-lattice" && std::max(c.nt_m, c.nt_n) * std::log2(static_cast<double>(c.nt_a)) > 60) {
    error("nt.m: a^max(m,n) must fit in 60 bits for the brute-force comparison");
  }
  if (!c.system) return;
  const SystemSpec& s = *c.system;
  if ((e == "petrov" || e == "nt-gcd") && !s.Is<IntegerCircleMap>()) {
    error("system.spec: " + e + " needs an integer circle map, got " + s.ToString());
  }
  if (e == "ear-bound" && !(s.Is<IntegerCircleMap>() && s.As<IntegerCircleMap>().a == 2)) {
    error("system.spec: ear-bound is defined for the doubling map, got " + s.ToString());
  }
  if (e == "exact" && !s.Is<IntegerCircleMap>() && !(s.Is<PiecewiseLinear>() && s.IsExpandingInterval())) {
    error("system.spec: exact sets need an integer circle map or an expanding piecewise-linear map, got " +
          s.ToString());
  }
  if ((e == "ulam" || e == "series" || e == "sandwich") && !s.IsExpandingInterval()) {
    error("system.spec: " + e + " needs an expanding interval map, got " + s.ToString());
  }
  if (sampled && !s.IsExpandingInterval() && !s.Is<IntegerCircleMap>() && !s.Is<ToralLinear>() &&
      !s.Is<Rotation>()) {
    error("system.spec: no invariant measure available for " + s.ToString());
  }
}

RunConfig Validate(const std::vector<std::pair<std::string, std::string>>& entries,
                   std::vector<std::string> errors) {
  RunConfig config;
  std::map<std::string, const KeySpec*> by_name;
  for (const KeySpec& key : Keys()) by_name[key.name] = &key;
  std::set<std::string> present;
  for (const auto& [raw_key, raw_value] : entries) {
    const std::string key = Trim(raw_key);
    const std::string value = Trim(raw_value);
    auto it = by_name.find(key);
    if (it == by_name.end()) {
      errors.push_back(key + ": unknown key");
      continue;
    }
    if (!present.insert(key).second) {
      errors.push_back(key + ": given more than once");
      continue;
    }
    try {
      std::string canonical = it->second->apply(config, value);
      if (!it->second->per_process) config.canonical[key] = std::move(canonical);
    } catch (const Error& error) {
      errors.push_back(key + ": " + error.what());
    }
  }
  if (!present.count("run.experiment")) {
    errors.push_back("run.experiment: missing");
  } else if (!config.experiment.empty()) {
    const ExperimentKeys& rules = ExperimentTable().at(config.experiment);
    for (const std::string& key : rules.required) {
      if (!present.count(key)) errors.push_back(key + ": required by experiment " + config.experiment);
    }
    for (const std::string& key : present) {
      const bool allowed = AlwaysAllowed(key) ||
                           std::count(rules.required.begin(), rules.required.end(), key) ||
                           std::count(rules.optional.begin(), rules.optional.end(), key);
      if (!allowed) errors.push_back(key + ": not used by experiment " + config.experiment);
    }
    CheckConsistency(config, present, errors);
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error(ErrorCode::kConfig,
            [&errors] {
              std::string joined;
              for (const auto& e : errors) joined += (joined.empty() ? "" : "\n") + e;
              return joined;
            }()),
      errors_(std::move(errors)) {}

std::string RunConfig::CanonicalText() const {
  std::string text;
  std::string section;
  for (const auto& [key, value] : canonical) {
    const auto dot = key.find('.');
    const std::string this_section = key.substr(0, dot);
    if (this_section != section) {
      text += (text.empty() ? "[" : "\n[") + this_section + "]\n";
      section = this_section;
    }
    text += key.substr(dot + 1) + " = " + value + "\n";
  }
  return text;
}

std::string RunConfig::Hash() const { return HashHex(CanonicalText()); }

RunConfig ParseConfig(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& error) {
    throw ConfigError({"line " + std::to_string(error.line()) + ": " + error.message()});
  }
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> errors;
  for (const auto& [section, children] : tree) {
    if (children.empty()) {
      errors.push_back(section + ": key outside any section");
      continue;
    }
    for (const auto& [key, value] : children) entries.emplace_back(section + "." + key, value.data());
  }
  return Validate(entries, std::move(errors));
}

RunConfig ParseConfigEntries(const std::vector<std::pair<std::string, std::string>>& entries) {
  return Validate(entries, {});
}

std::vector<std::pair<std::string, std::string>> ConfigKeys() {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const KeySpec& key : Keys()) keys.emplace_back(key.name, key.help);
  return keys;
}

namespace {

std::string Show(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

double ToDoubleValue(const Rational& value) { return value.get_d(); }

ReportRow EstimateRow(const std::string& series, double x, const Estimate& estimate, std::string verdict = {}) {
  ReportRow row;
  row.series = series;
  row.x = x;
  row.estimate = estimate.value;
  row.ci = estimate.ci;
  row.successes = estimate.successes;
  row.samples = estimate.samples;
  row.verdict = std::move(verdict);
  return row;
}

ReportRow ValueRow(const std::string& series, double x, double value, std::string verdict = {}) {
  ReportRow row;
  row.series = series;
  row.x = x;
  row.estimate = value;
  row.verdict = std::move(verdict);
  return row;
}

ExperimentOptions OptionsFor(const RunConfig& c) {
  ExperimentOptions options;
  options.seed = c.seed;
  options.precision_cap = c.precision_bits;
  options.arc_budget = c.budget_arcs;
  if (c.bins > 0) options.ulam_bins = c.bins;
  return options;
}

// Exact cross-checks are attempted only when the set sizes stay in budget.
bool ExactAffordable(long a, long horizon, std::uint64_t budget) {
  const double log_size = horizon * std::log2(static_cast<double>(std::labs(a))) + 1;
  return log_size < std::log2(static_cast<double>(budget));
}

void RunRio(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const ExperimentOptions options = OptionsFor(c);
  const Estimate estimate = RioTruncatedMeasure(*c.system, *c.sequence, c.k, c.N, c.samples, options);
  const double tail = RioTailBound(*c.system, *c.sequence, c.k, c.N);
  r.rows.push_back(EstimateRow("rio", static_cast<double>(c.N), estimate));
  r.summary.emplace_back("estimate", estimate.value);
  r.summary.emplace_back("tail_bound", tail);
  r.verdicts.push_back({"within_tail_bound", estimate.value <= tail + 3 * estimate.ci_width(),
                        "estimate " + Show(estimate.value) + " vs tail bound " + Show(tail)});
  if (c.system->Is<IntegerCircleMap>() &&
      ExactAffordable(c.system->As<IntegerCircleMap>().a, c.N, c.budget_arcs)) {
    const Rational exact = RioExactMeasure(c.system->As<IntegerCircleMap>().a, *c.sequence, c.k, c.N, c.budget_arcs);
    const double value = ToDoubleValue(exact);
    r.rows.push_back(ValueRow("exact", static_cast<double>(c.N), value));
    r.summary.emplace_back("exact", ToString(exact));
    r.verdicts.push_back({"agrees_with_exact", std::fabs(estimate.value - value) <= 3 * estimate.ci_width(),
                          "exact " + Show(value)});
  }
}

void RunDichotomy(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const DichotomyResult d =
      RioDichotomy(*c.system, *c.convergent, *c.divergent, c.k, c.N, c.samples, OptionsFor(c));
  r.rows.push_back(EstimateRow("convergent", static_cast<double>(c.N), d.convergent));
  r.rows.push_back(EstimateRow("divergent", static_cast<double>(c.N), d.divergent));
  r.summary.emplace_back("separation", d.separation);
  r.summary.emplace_back("tail_bound", d.tail_bound);
  r.summary.emplace_back("divergent_asserted", d.divergent_asserted);
  r.verdicts.push_back({"convergent_within_tail", d.convergent_within_tail,
                        "convergent " + Show(d.convergent.value) + " vs tail " + Show(d.tail_bound) +
                            " + 3 CI widths"});
  if (d.divergent_asserted) {
    r.verdicts.push_back({"divergent_above_convergent", d.separation > 0,
                          "separation " + Show(d.separation)});
  } else {
    r.warnings.push_back("divergent side not asserted: the system has an eigenvalue inside the unit circle");
  }
}

void RunRateScan(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const RateScan scan = RecurrenceRateScan(*c.system, c.thetas, c.kappa, c.k, c.N, c.samples, OptionsFor(c));
  if (!scan.warning.empty()) r.warnings.push_back(scan.warning);
  r.summary.emplace_back("hypotheses_ok", scan.hypotheses_ok);
  bool consistent = true;
  for (const RateScanRow& row : scan.rows) {
    r.rows.push_back(EstimateRow("theta", row.theta, row.estimate, row.verdict));
    consistent = consistent && row.verdict != "inconsistent";
  }
  r.verdicts.push_back({"no_inconsistent_theta", consistent, "verdicts per theta in rows"});
}

void RunEar(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const Estimate estimate = EarTruncatedMeasure(*c.system, *c.sequence, c.n0, c.horizon, c.samples, OptionsFor(c));
  r.rows.push_back(EstimateRow("ear", static_cast<double>(c.horizon), estimate));
  r.summary.emplace_back("estimate", estimate.value);
  if (!c.system->Is<IntegerCircleMap>()) return;
  try {
    const EarTruncation exact = EarExact(c.system->As<IntegerCircleMap>().a, *c.sequence, c.n0, c.horizon,
                                         c.budget_arcs);
    for (std::size_t i = 0; i < exact.measures_by_horizon.size(); ++i) {
      r.rows.push_back(ValueRow("exact", static_cast<double>(c.n0 + static_cast<long>(i)),
                                ToDoubleValue(exact.measures_by_horizon[i])));
    }
    const double value = ToDoubleValue(exact.measure);
    r.summary.emplace_back("exact", ToString(exact.measure));
    r.verdicts.push_back({"agrees_with_exact", std::fabs(estimate.value - value) <= 3 * estimate.ci_width(),
                          "exact " + Show(value) + ", estimate " + Show(estimate.value)});
  } catch (const Error& error) {
    if (error.code() != ErrorCode::kBudgetExceeded) throw;
    r.warnings.push_back(std::string("exact cross-check skipped: ") + error.what());
  }
}

void RunEarBound(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const EarBoundCheck check = CheckEarBound(*c.sequence, c.sigma, c.m_grid, c.onset, c.budget_arcs);
  for (const EarBoundRow& row : check.rows) {
    const std::string verdict = !row.verdict_required ? "not-required" : (row.bound_holds ? "holds" : "fails");
    r.rows.push_back(ValueRow("complement", static_cast<double>(row.m), ToDoubleValue(row.complement_measure),
                              verdict));
    r.rows.push_back(ValueRow("epsilon", static_cast<double>(row.m), row.epsilon));
  }
  if (check.observed_onset) r.summary.emplace_back("observed_onset", *check.observed_onset);
  r.verdicts.push_back({"bound_holds_after_onset", check.pass, "onset " + std::to_string(c.onset)});
}

void RunPetrov(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const long a = c.system->As<IntegerCircleMap>().a;
  const PetrovSummary p = PetrovRatio(a, *c.sequence, c.N, c.H, c.budget_arcs);
  bool all_ok = true;
  for (const PairCorrelation& pair : p.pairs) {
    r.rows.push_back(ValueRow("i=" + std::to_string(pair.i), static_cast<double>(pair.j), ToDoubleValue(pair.excess),
                              pair.bound_ok ? "ok" : "violated"));
    all_ok = all_ok && pair.bound_ok;
  }
  r.summary.emplace_back("S_N", ToString(p.S_N));
  r.summary.emplace_back("R_N", ToString(p.R_N));
  r.summary.emplace_back("bound_sum", ToString(p.bound_sum));
  r.summary.emplace_back("ratio", p.ratio.convert_to<double>());
  r.verdicts.push_back({"pair_bounds", all_ok, std::to_string(p.pairs.size()) + " pairs"});
  out.artifacts.emplace_back("pairs.csv", PairCorrelationCsv(p.pairs));
}

int UlamBins(const RunConfig& c) { return c.bins > 0 ? c.bins : 1024; }

void RunUlam(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const UlamOperator op = BuildUlam(*c.system, UlamBins(c));
  for (int i = 0; i < op.bins; ++i) r.rows.push_back(ValueRow("density", (i + 0.5) / op.bins, op.density[i]));
  r.summary.emplace_back("bins", static_cast<long>(op.bins));
  r.summary.emplace_back("exact_geometry", op.exact_geometry);
  r.summary.emplace_back("max_row_error", op.max_row_error);
  r.summary.emplace_back("density_residual", op.density_residual);
  r.summary.emplace_back("second_eigenvalue", op.second_eigenvalue);
  r.summary.emplace_back("gap", op.gap);
  const DensityBounds bounds = ComputeDensityBounds(op);
  r.summary.emplace_back("density_lower", bounds.lower);
  r.summary.emplace_back("density_upper", bounds.upper);
  r.summary.emplace_back("c", bounds.c);
  r.summary.emplace_back("bin_density_lower", bounds.bin_lower);
  r.summary.emplace_back("bin_density_upper", bounds.bin_upper);
  const CorrelationFit fit = FitCorrelationDecay(op, *c.system, c.n_max);
  for (std::size_t n = 0; n < fit.p.size(); ++n) r.rows.push_back(ValueRow("correlation", static_cast<double>(n), fit.p[n]));
  r.summary.emplace_back("C", fit.C);
  r.summary.emplace_back("tau", fit.tau);
  r.summary.emplace_back("fit_residual_rms", fit.residual_rms);
  if (!fit.decaying) r.warnings.push_back("correlations do not decay over the fitted range");
  r.verdicts.push_back({"stochastic_rows", op.max_row_error <= 1e-12, "max |row sum - 1| " + Show(op.max_row_error)});
  r.verdicts.push_back({"density_converged", op.density_residual <= UlamOptions{}.tolerance,
                        "residual " + Show(op.density_residual)});
  out.artifacts.emplace_back("density.csv", UlamDensityCsv(op));
}

void RunSeries(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const UlamOperator op = BuildUlam(*c.system, UlamBins(c));
  const SeriesResult s = MeasureSeries(op, *c.system, *c.sequence, c.terms);
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    r.rows.push_back(ValueRow("term", static_cast<double>(i + 1), s.terms[i]));
    r.rows.push_back(ValueRow("partial_sum", static_cast<double>(i + 1), s.partial_sums[i]));
  }
  r.summary.emplace_back("raabe", s.raabe);
  r.summary.emplace_back("series_verdict", s.verdict);
  if (s.verdict == "inconclusive") r.warnings.push_back("series test inconclusive at this number of terms");
}

void RunSandwich(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const Sandwich s = MeasureSandwich(*c.system, *c.sequence, c.n_max, c.samples, OptionsFor(c));
  for (const SandwichRow& row : s.rows) {
    r.rows.push_back(EstimateRow("mu_E_n", static_cast<double>(row.n), row.estimate, row.inside ? "inside" : "outside"));
    r.rows.push_back(ValueRow("lower", static_cast<double>(row.n), row.lower));
    r.rows.push_back(ValueRow("upper", static_cast<double>(row.n), row.upper));
  }
  r.summary.emplace_back("c", s.c);
  r.summary.emplace_back("C", s.C);
  r.summary.emplace_back("tau", s.tau);
  r.summary.emplace_back("fraction_inside", s.fraction_inside);
  r.verdicts.push_back({"fraction_inside", s.fraction_inside >= 0.95, Show(s.fraction_inside) + " >= 0.95"});
}

void RunBoshernitzan(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  for (double alpha : c.alphas) {
    const BoshernitzanRow row = BoshernitzanScan(*c.system, alpha, c.checkpoints, c.samples, OptionsFor(c));
    const std::string series = "alpha=" + Show(alpha);
    for (std::size_t i = 0; i < row.checkpoints.size(); ++i) {
      r.rows.push_back(ValueRow(series, static_cast<double>(row.checkpoints[i]), row.medians[i]));
    }
    if (row.excluded > 0) {
      r.warnings.push_back(series + ": " + std::to_string(row.excluded) + " periodic samples excluded");
    }
    r.verdicts.push_back({series, row.pass, row.verdict});
  }
}

void RunOrbit(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  OrbitPoint start;
  if (c.x) {
    std::vector<Rational> coords(static_cast<std::size_t>(c.system->dimension()), *c.x);
    start = OrbitPoint::Exact(std::move(coords));
  } else {
    const unsigned precision = RequiredPrecision(*c.system, c.steps);
    if (c.precision_bits > 0 && precision > c.precision_bits) {
      Fail(ErrorCode::kPrecisionExhausted, "orbit of " + std::to_string(c.steps) + " steps needs " +
                                               std::to_string(precision) + " bits, cap is " +
                                               std::to_string(c.precision_bits));
    }
    start = SamplePoint(*c.system, SampleMeasure::Lebesgue(), c.seed, 0, precision);
  }
  auto cursor = MakeCursor(*c.system, start, c.steps);
  for (long n = 1; n <= c.steps; ++n) r.rows.push_back(ValueRow("distance", static_cast<double>(n), cursor->Next()));
  r.summary.emplace_back("exact", start.is_exact());
  out.artifacts.emplace_back("trace.csv", OrbitTraceCsv(*c.system, start, c.steps));
}

void RunExact(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const Rational radius = c.r ? *c.r : c.sequence->AsRational(c.n);
  RecurrenceSetResult set;
  if (c.system->Is<IntegerCircleMap>()) {
    set = BuildRecurrenceSet(c.system->As<IntegerCircleMap>().a, c.n, radius, c.budget_arcs);
    const Rational expected = 2 * radius < 1 ? Rational(2 * radius) : Rational(1);
    r.verdicts.push_back({"measure_is_2r", set.measure == expected,
                          "measure " + ToString(set.measure) + ", 2r " + ToString(expected)});
  } else {
    set = BuildRecurrenceSetPiecewise(*c.system, c.n, radius, c.budget_arcs);
    const BranchRatio ratio = BranchRatioCheck(*c.system, c.n, radius, c.budget_arcs);
    r.summary.emplace_back("branch_ratio", ToString(ratio.max_ratio));
    r.summary.emplace_back("branch_ratio_bound", ToString(ratio.claim_bound));
    r.verdicts.push_back({"branch_ratio", ratio.max_ratio <= ratio.claim_bound,
                          ToString(ratio.max_ratio) + " <= " + ToString(ratio.claim_bound)});
  }
  r.rows.push_back(ValueRow("measure", static_cast<double>(c.n), ToDoubleValue(set.measure)));
  r.summary.emplace_back("r", ToString(radius));
  r.summary.emplace_back("measure", ToString(set.measure));
  r.summary.emplace_back("arcs", static_cast<long>(set.arc_count));
  out.artifacts.emplace_back("set.txt", set.set.ToText());
}

void RunGcd(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  long failures = 0, checked = 0;
  for (long m = 1; m <= c.nt_max; ++m) {
    for (long n = 1; n <= c.nt_max; ++n) {
      const GcdMersenneResult g = GcdMersenne(c.nt_a, static_cast<unsigned>(m), static_cast<unsigned>(n));
      r.rows.push_back(ValueRow("m=" + std::to_string(m), static_cast<double>(n), g.holds ? 1 : 0,
                                g.holds ? "holds" : "fails"));
      ++checked;
      if (!g.holds) ++failures;
    }
  }
  r.summary.emplace_back("pairs", checked);
  r.summary.emplace_back("failures", failures);
  r.verdicts.push_back({"gcd_identity", failures == 0, std::to_string(checked) + " pairs checked"});
}

void RunLattice(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const auto m = static_cast<unsigned>(c.nt_m), n = static_cast<unsigned>(c.nt_n);
  const ScalarLattice lattice = SolveScalarLattice(c.nt_a, m, n);
  const auto brute = ScalarLatticeBruteForce(c.nt_a, m, n, c.nt_bound);
  const auto generated = ScalarLatticeGenerated(lattice, c.nt_bound);
  r.summary.emplace_back("k0", ToString(lattice.k0));
  r.summary.emplace_back("l0", ToString(lattice.l0));
  r.summary.emplace_back("solutions", static_cast<long>(brute.size()));
  for (const auto& [k, l] : generated) r.rows.push_back(ValueRow("l", static_cast<double>(k), static_cast<double>(l)));
  r.verdicts.push_back({"lattice_complete", brute == generated,
                        std::to_string(brute.size()) + " brute-force solutions, " + std::to_string(generated.size()) +
                            " generated"});
}

IntMatrix ParseMatrix(const std::string& text) {
  std::vector<long> entries;
  const auto rows = SplitList(text, ';');
  for (const auto& row : rows) {
    for (const auto& col : SplitList(row)) entries.push_back(ParseLongValue(col));
  }
  return IntMatrix::FromLongs(static_cast<int>(rows.size()), entries);
}

void RunMatrixLattice(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const IntMatrix b = ParseMatrix(c.nt_matrix);
  const auto m = static_cast<unsigned>(c.nt_m), n = static_cast<unsigned>(c.nt_n);
  const MatrixLattice lattice = SolveMatrixLattice(b, m, n);
  const auto brute = MatrixLatticeBruteForce(b, m, n, c.nt_box);
  const auto generated = MatrixLatticeGenerated(lattice, c.nt_box);
  r.summary.emplace_back("K", lattice.k_generator.ToString());
  r.summary.emplace_back("L", lattice.l_generator.ToString());
  r.summary.emplace_back("solutions", static_cast<long>(brute.size()));
  r.verdicts.push_back({"lattice_complete", brute == generated,
                        std::to_string(brute.size()) + " brute-force solutions, " + std::to_string(generated.size()) +
                            " generated"});
}

void RunBezout(const RunConfig& c, RunOutput& out) {
  ExperimentReport& r = out.report;
  const auto m = static_cast<unsigned>(c.nt_m), n = static_cast<unsigned>(c.nt_n);
  const BezoutPair pair = BezoutPolynomials(m, n);
  const IntPolynomial combination =
      pair.u * IntPolynomial::GeometricSum(m) + pair.v * IntPolynomial::GeometricSum(n);
  r.summary.emplace_back("u", pair.u.ToString());
  r.summary.emplace_back("v", pair.v.ToString());
  r.summary.emplace_back("combination", combination.ToString());
  r.verdicts.push_back({"bezout_identity", combination == IntPolynomial::Constant(1), combination.ToString()});
}

const std::map<std::string, void (*)(const RunConfig&, RunOutput&)>& Dispatch() {
  static const std::map<std::string, void (*)(const RunConfig&, RunOutput&)> table = {
      {"rio", RunRio},         {"rio-dichotomy", RunDichotomy}, {"rate-scan", RunRateScan},
      {"ear", RunEar},         {"ear-bound", RunEarBound},      {"petrov", RunPetrov},
      {"ulam", RunUlam},       {"series", RunSeries},           {"sandwich", RunSandwich},
      {"boshernitzan", RunBoshernitzan}, {"orbit", RunOrbit},   {"exact", RunExact},
      {"nt-gcd", RunGcd},      {"nt-lattice", RunLattice},      {"nt-matrix-lattice", RunMatrixLattice},
      {"nt-bezout", RunBezout},
  };
  return table;
}

FieldValue WindowValue(const std::string& text) {
  try {
    return ParseLongValue(text);
  } catch (const Error&) {
    return text;
  }
}

}  // namespace

RunOutput Execute(const RunConfig& config) {
  RunOutput out;
  ExperimentReport& r = out.report;
  r.experiment = config.experiment;
  if (config.system) r.system = config.system->ToString();
  if (config.sequence) {
    r.sequence = config.sequence->ToString();
  } else if (config.convergent && config.divergent) {
    r.sequence = "convergent=" + config.convergent->ToString() + ";divergent=" + config.divergent->ToString();
  }
  for (const auto& [key, value] : config.canonical) {
    if (key.rfind("window.", 0) == 0 || key.rfind("nt.", 0) == 0) {
      r.window.emplace_back(key.substr(key.find('.') + 1), WindowValue(value));
    }
  }
  if (config.canonical.count("run.samples")) r.samples = config.samples;
  r.seed = config.seed;
  r.config_text = config.CanonicalText();
  r.config_hash = config.Hash();
  Dispatch().at(config.experiment)(config, out);
  return out;
}

int Run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    SetThreadCount(config.threads);
    const auto started = std::chrono::steady_clock::now();
    RunOutput result = Execute(config);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (config.runtime_seconds > 0 && elapsed > config.runtime_seconds) {
      Fail(ErrorCode::kBudgetExceeded, "runtime cap of " + Show(config.runtime_seconds) +
                                           " s exceeded (" + Show(elapsed) + " s)");
    }
    if (config.include_runtime) result.report.runtime_seconds = elapsed;
    const ExperimentReport& report = result.report;
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    files.emplace_back(config.output / (config.experiment + ".json"), ReportJson(report));
    files.emplace_back(config.output / (config.experiment + ".tsv"), ReportTsv(report));
    for (const auto& [name, content] : result.artifacts) files.emplace_back(config.output / name, content);
    WriteFilesAtomically(files);
    for (const Verdict& v : report.verdicts) {
      out << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
    }
    for (const std::string& w : report.warnings) out << "warning: " << w << "\n";
    out << report.experiment << " " << (report.pass() ? "passed" : "failed") << ", report "
        << files.front().first.string() << " (config " << report.config_hash << ")\n";
    return report.pass() ? kExitPass : kExitVerdictFailure;
  } catch (const ConfigError& error) {
    for (const auto& e : error.errors()) err << "config error: " << e << "\n";
    return kExitError;
  } catch (const Error& error) {
    err << "error [" << ErrorCodeName(error.code()) << "]: " << error.what() << "\n";
    return kExitError;
  } catch (const std::exception& error) {
    err << "error: " << error.what() << "\n";
    return kExitError;
  }
}

}  // namespace recurlab
