#ifndef RECURLAB_REPORT_H_
#define RECURLAB_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "recurlab/stats.h"

namespace recurlab {

inline constexpr std::string_view kReportSchema = "recurlab.report/1";

using FieldValue = std::variant<bool, long, double, std::string>;
using Fields = std::vector<std::pair<std::string, FieldValue>>;

struct ReportRow {
  std::string series;
  double x = 0;
  double estimate = 0;
  std::optional<ConfidenceInterval> ci;  // probabilities only
  long successes = -1;                   // -1 when not a Monte Carlo count
  long samples = 0;
  std::string verdict;
};

struct Verdict {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  std::string system;
  std::string sequence;
  Fields window;
  long samples = 0;
  std::uint64_t seed = 0;
  Fields summary;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;
  std::string config_text;
  std::string config_hash;
  std::optional<double> runtime_seconds;  // left out of files unless requested

  bool pass() const;
};

// Versioned JSON; keys in a fixed order so equal reports are equal bytes.
std::string ReportJson(const ExperimentReport& report);
// Columns: series, x, estimate, ci_low, ci_high, successes, samples, verdict.
std::string ReportTsv(const ExperimentReport& report);
inline constexpr std::string_view kTsvColumns =
    "series\tx\testimate\tci_low\tci_high\tsuccesses\tsamples\tverdict";

std::uint64_t Fnv1a64(std::string_view text);
std::string HashHex(std::string_view text);

// Writes every file to a temporary sibling first and renames afterwards,
// so a failed run leaves no partial output.
void WriteFilesAtomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

}  // namespace recurlab

#endif  // RECURLAB_REPORT_H_
