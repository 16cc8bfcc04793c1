#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "recurlab/config.h"
#include "recurlab/report.h"

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

// Binds a string flag to a config key; the value is validated later.
void Bind(CLI::App* app, Entries& entries, const std::string& flag, const std::string& key,
          const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&entries, key](const std::string& value) { entries.emplace_back(key, value); }, help + " [" + key + "]");
}

std::string OutputHelp() {
  std::string text =
      "Outputs: <out>/<experiment>.json (schema " + std::string(recurlab::kReportSchema) +
      ") and <out>/<experiment>.tsv with tab-separated columns\n  " + std::string(recurlab::kTsvColumns) +
      "\nci_low, ci_high and successes are empty for rows that are not Monte Carlo estimates.\n"
      "Exit status: 0 all verdicts pass, 2 some verdict fails, 1 error (nothing written).";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recurlab: recurrence and shrinking-target experiments for expanding maps"};
  app.require_subcommand(0, 1);
  app.footer(OutputHelp());

  Entries common;
  std::string config_path;
  app.add_option("--config", config_path, "INI configuration file (run it as is)");
  Bind(&app, common, "--threads", "run.threads", "worker threads");
  Bind(&app, common, "--out", "run.output", "output directory");
  Bind(&app, common, "--seed", "run.seed", "base seed");
  Bind(&app, common, "--budget-arcs", "budget.arcs", "arc and branch-piece budget");
  Bind(&app, common, "--precision-bits", "budget.precision_bits", "cap on fixed-point bits");
  Bind(&app, common, "--runtime-cap", "budget.runtime_seconds", "wall-clock cap in seconds");
  bool include_runtime = false;
  app.add_flag("--include-runtime", include_runtime, "record the runtime in the report");
  app.fallthrough();

  Entries entries;
  std::string experiment;

  auto* rio = app.add_subcommand("rio", "truncated infinitely-often recurrence (rio, rio-dichotomy, rate-scan)");
  Bind(rio, entries, "--system", "system.spec", "map");
  Bind(rio, entries, "--seq", "sequence.spec", "radius sequence");
  Bind(rio, entries, "--conv", "sequence.convergent", "summable sequence");
  Bind(rio, entries, "--div", "sequence.divergent", "non-summable sequence");
  Bind(rio, entries, "--thetas", "sequence.thetas", "log exponents of a rate scan");
  Bind(rio, entries, "--kappa", "sequence.kappa", "rate-scan constant");
  Bind(rio, entries, "--k", "window.k", "first time");
  Bind(rio, entries, "--N", "window.N", "last time");
  Bind(rio, entries, "--M", "run.samples", "samples");
  Bind(rio, entries, "--bins", "window.bins", "Ulam bins of the sampling density");

  auto* ear = app.add_subcommand("ear", "eventually-always recurrence (ear, ear-bound)");
  bool bound_check = false;
  ear->add_flag("--bound-check", bound_check, "exact bound check on an m grid");
  Bind(ear, entries, "--system", "system.spec", "map");
  Bind(ear, entries, "--seq", "sequence.spec", "radius sequence");
  Bind(ear, entries, "--n0", "window.n0", "first m");
  Bind(ear, entries, "--horizon", "window.horizon", "last m");
  Bind(ear, entries, "--M", "run.samples", "samples");
  Bind(ear, entries, "--bins", "window.bins", "Ulam bins of the sampling density");
  Bind(ear, entries, "--sigma", "sequence.sigma", "sigma");
  Bind(ear, entries, "--m-grid", "window.m_grid", "m values");
  Bind(ear, entries, "--onset", "window.onset", "first required m");

  auto* petrov = app.add_subcommand("petrov", "exact pair correlations and the Petrov ratio");
  Bind(petrov, entries, "--system", "system.spec", "integer circle map");
  Bind(petrov, entries, "--seq", "sequence.spec", "radius sequence");
  Bind(petrov, entries, "--N", "window.N", "largest index");
  Bind(petrov, entries, "--H", "sequence.H", "weight H");

  auto* ulam = app.add_subcommand("ulam", "Ulam operator, density, decay fit (ulam, series, sandwich)");
  std::string series_terms;
  bool sandwich = false;
  ulam->add_option("--series-terms", series_terms, "terms of the series test [window.terms]");
  ulam->add_flag("--sandwich", sandwich, "Monte Carlo measure sandwich");
  Bind(ulam, entries, "--system", "system.spec", "expanding interval map");
  Bind(ulam, entries, "--seq", "sequence.spec", "radius sequence");
  Bind(ulam, entries, "--bins", "window.bins", "bins");
  Bind(ulam, entries, "--n-max", "window.n_max", "largest n");
  Bind(ulam, entries, "--M", "run.samples", "samples");

  auto* nt = app.add_subcommand("nt", "number-theory checks");
  nt->require_subcommand(1);
  auto* gcd = nt->add_subcommand("gcd", "gcd(a^m - 1, a^n - 1) for all m, n <= max");
  Bind(gcd, entries, "--a", "nt.a", "base");
  Bind(gcd, entries, "--max", "nt.max", "largest exponent");
  auto* lattice = nt->add_subcommand("lattice", "scalar lattice against brute force");
  Bind(lattice, entries, "--a", "nt.a", "base");
  Bind(lattice, entries, "--m", "nt.m", "m");
  Bind(lattice, entries, "--n", "nt.n", "n");
  Bind(lattice, entries, "--bound", "nt.bound", "box bound");
  auto* matrix = nt->add_subcommand("matrix-lattice", "matrix lattice against brute force");
  Bind(matrix, entries, "--matrix", "nt.matrix", "matrix, e.g. 1,1;1,0");
  Bind(matrix, entries, "--m", "nt.m", "m");
  Bind(matrix, entries, "--n", "nt.n", "n");
  Bind(matrix, entries, "--box", "nt.box", "entry box");
  auto* bezout = nt->add_subcommand("bezout", "Bezout polynomials of the geometric sums");
  Bind(bezout, entries, "--m", "nt.m", "m");
  Bind(bezout, entries, "--n", "nt.n", "n");

  auto* exact = app.add_subcommand("exact", "exact recurrence set E_n");
  std::string exact_a;
  exact->add_option("--a", exact_a, "shorthand for --system circle:<a>");
  Bind(exact, entries, "--system", "system.spec", "integer circle or piecewise-linear map");
  Bind(exact, entries, "--n", "window.n", "time n");
  Bind(exact, entries, "--r", "sequence.r", "radius");
  Bind(exact, entries, "--seq", "sequence.spec", "radius sequence evaluated at n");

  auto* orbit = app.add_subcommand("orbit", "orbit trace or Boshernitzan scan");
  Bind(orbit, entries, "--system", "system.spec", "map");
  Bind(orbit, entries, "--steps", "window.steps", "orbit length");
  Bind(orbit, entries, "--x", "window.x", "rational start");
  Bind(orbit, entries, "--alphas", "window.alphas", "Boshernitzan exponents");
  Bind(orbit, entries, "--checkpoints", "window.checkpoints", "orbit lengths");
  Bind(orbit, entries, "--M", "run.samples", "samples");

  auto* keys = app.add_subcommand("keys", "list configuration keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int status = app.exit(error);
    return status == 0 ? 0 : recurlab::kExitError;
  }

  if (keys->parsed()) {
    for (const auto& [key, help] : recurlab::ConfigKeys()) std::cout << key << "\t" << help << "\n";
    return 0;
  }

  if (rio->parsed()) {
    auto has = [&](const char* flag) { return rio->count(flag) > 0; };
    experiment = has("--thetas") ? "rate-scan" : (has("--conv") || has("--div")) ? "rio-dichotomy" : "rio";
  } else if (ear->parsed()) {
    experiment = bound_check ? "ear-bound" : "ear";
  } else if (petrov->parsed()) {
    experiment = "petrov";
  } else if (ulam->parsed()) {
    if (!series_terms.empty()) {
      entries.emplace_back("window.terms", series_terms);
      experiment = "series";
    }
    if (sandwich) experiment = experiment.empty() ? "sandwich" : "invalid: --series-terms with --sandwich";
    if (experiment.empty()) experiment = "ulam";
  } else if (nt->parsed()) {
    experiment = gcd->parsed() ? "nt-gcd" : lattice->parsed() ? "nt-lattice"
                 : matrix->parsed() ? "nt-matrix-lattice" : "nt-bezout";
  } else if (exact->parsed()) {
    experiment = "exact";
    if (!exact_a.empty()) entries.emplace_back("system.spec", "circle:" + exact_a);
  } else if (orbit->parsed()) {
    experiment = orbit->count("--alphas") || orbit->count("--checkpoints") ? "boshernitzan" : "orbit";
  }

  try {
    recurlab::RunConfig config;
    if (!config_path.empty()) {
      if (!experiment.empty()) throw recurlab::ConfigError({"--config cannot be combined with a subcommand"});
      std::ifstream in(config_path);
      if (!in) throw recurlab::ConfigError({"cannot read " + config_path});
      std::stringstream text;
      text << in.rdbuf();
      // Flags given next to a config file override per-process keys only.
      config = recurlab::ParseConfig(text.str());
      for (const auto& [key, value] : common) {
        if (key == "run.output") {
          config.output = value;
        } else if (key == "run.threads") {
          int threads = 0;
          std::istringstream parse(value);
          if (!(parse >> threads) || !parse.eof() || threads < 1) {
            throw recurlab::ConfigError({"run.threads: expected a positive integer, got '" + value + "'"});
          }
          config.threads = threads;
        } else {
          throw recurlab::ConfigError({key + ": cannot override a config file value from the command line"});
        }
      }
      if (include_runtime) config.include_runtime = true;
    } else {
      if (experiment.empty()) {
        std::cerr << app.help();
        return recurlab::kExitError;
      }
      Entries all = common;
      all.emplace_back("run.experiment", experiment);
      all.insert(all.end(), entries.begin(), entries.end());
      if (include_runtime) all.emplace_back("run.include_runtime", "true");
      config = recurlab::ParseConfigEntries(all);
    }
    return recurlab::Run(config, std::cout, std::cerr);
  } catch (const recurlab::ConfigError& error) {
    for (const auto& e : error.errors()) std::cerr << "config error: " << e << "\n";
    return recurlab::kExitError;
  }
}
