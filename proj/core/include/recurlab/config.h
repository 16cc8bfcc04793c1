#ifndef RECURLAB_CONFIG_H_
#define RECURLAB_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recurlab/error.h"
#include "recurlab/exact_recurrence.h"
#include "recurlab/numeric.h"
#include "recurlab/radius.h"
#include "recurlab/report.h"
#include "recurlab/system.h"

namespace recurlab {

// Experiment verbs accepted in run.experiment.
inline constexpr std::string_view kExperiments[] = {
    "rio",  "rio-dichotomy", "rate-scan", "ear",    "ear-bound",  "petrov",      "ulam",
    "series", "sandwich",    "boshernitzan", "orbit", "exact",    "nt-gcd",      "nt-lattice",
    "nt-matrix-lattice", "nt-bezout"};

struct RunConfig {
  std::string experiment;

  std::optional<SystemSpec> system;
  std::optional<RadiusSequence> sequence;
  std::optional<RadiusSequence> convergent;
  std::optional<RadiusSequence> divergent;
  std::optional<Rational> r;
  std::vector<double> thetas;
  Rational kappa = 1;
  Rational H = 1;
  double sigma = 1;

  long k = 1, N = 0, n0 = 1, horizon = 0, n = 1, steps = 0, terms = 0, onset = 1;
  int bins = 0;  // 0: module default (Ulam 1024, sampler 4096)
  int n_max = 0;
  std::vector<long> checkpoints;
  std::vector<double> alphas;
  std::vector<long> m_grid;
  std::optional<Rational> x;  // orbit start; random when absent

  long nt_a = 2, nt_m = 1, nt_n = 1, nt_max = 12, nt_bound = 200, nt_box = 5;
  std::string nt_matrix;

  long samples = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path output = ".";
  bool include_runtime = false;

  std::uint64_t budget_arcs = kDefaultArcBudget;
  unsigned precision_bits = 0;  // 0: uncapped
  double runtime_seconds = 0;   // 0: uncapped

  // Normalised "section.key" -> value, without the per-process keys
  // (output, threads, include_runtime). Drives the hash and the embedded config.
  std::map<std::string, std::string> canonical;

  std::string CanonicalText() const;  // INI form of `canonical`
  std::string Hash() const;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// INI text: [run] experiment = rio, [system] spec = doubling, ...
// Throws ConfigError listing every problem found.
RunConfig ParseConfig(std::string_view text);
// Same validation from "section.key" -> value pairs (the CLI path).
RunConfig ParseConfigEntries(const std::vector<std::pair<std::string, std::string>>& entries);

// Every recognised key with a one-line description, for --help.
std::vector<std::pair<std::string, std::string>> ConfigKeys();

struct RunOutput {
  ExperimentReport report;
  std::vector<std::pair<std::string, std::string>> artifacts;  // file name, content
};

// Computes the report without touching the filesystem.
RunOutput Execute(const RunConfig& config);

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdictFailure = 2;

// Executes, writes <output>/<experiment>.json, .tsv and any artifacts
// atomically, prints the verdict summary to `out` and errors to `err`.
int Run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace recurlab

#endif  // RECURLAB_CONFIG_H_
