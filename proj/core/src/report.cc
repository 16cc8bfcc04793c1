#include "recurlab/report.h"

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "recurlab/error.h"

namespace recurlab {

namespace {

using Json = nlohmann::ordered_json;

Json ToJson(const FieldValue& value) {
  return std::visit([](const auto& v) { return Json(v); }, value);
}

Json ToJson(const Fields& fields) {
  Json object = Json::object();
  for (const auto& [key, value] : fields) object[key] = ToJson(value);
  return object;
}

std::string Number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

bool ExperimentReport::pass() const {
  for (const Verdict& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

std::string ReportJson(const ExperimentReport& report) {
  Json json;
  json["schema"] = kReportSchema;
  json["experiment"] = report.experiment;
  json["system"] = report.system;
  json["sequence"] = report.sequence;
  json["window"] = ToJson(report.window);
  json["samples"] = report.samples;
  json["seed"] = report.seed;
  json["config_hash"] = report.config_hash;
  json["config"] = report.config_text;
  json["summary"] = ToJson(report.summary);
  Json rows = Json::array();
  for (const ReportRow& row : report.rows) {
    Json r;
    r["series"] = row.series;
    r["x"] = row.x;
    r["estimate"] = row.estimate;
    r["ci_low"] = row.ci ? Json(row.ci->low) : Json(nullptr);
    r["ci_high"] = row.ci ? Json(row.ci->high) : Json(nullptr);
    r["successes"] = row.successes >= 0 ? Json(row.successes) : Json(nullptr);
    r["samples"] = row.samples;
    r["verdict"] = row.verdict;
    rows.push_back(std::move(r));
  }
  json["rows"] = std::move(rows);
  Json verdicts = Json::array();
  for (const Verdict& v : report.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  json["verdicts"] = std::move(verdicts);
  json["pass"] = report.pass();
  json["warnings"] = report.warnings;
  if (report.runtime_seconds) json["runtime_seconds"] = *report.runtime_seconds;
  return json.dump(2) + "\n";
}

std::string ReportTsv(const ExperimentReport& report) {
  std::string tsv(kTsvColumns);
  tsv += "\n";
  for (const ReportRow& row : report.rows) {
    tsv += row.series + "\t" + Number(row.x) + "\t" + Number(row.estimate) + "\t" +
           (row.ci ? Number(row.ci->low) : "") + "\t" + (row.ci ? Number(row.ci->high) : "") + "\t" +
           (row.successes >= 0 ? std::to_string(row.successes) : "") + "\t" + std::to_string(row.samples) + "\t" +
           row.verdict + "\n";
  }
  return tsv;
}

std::uint64_t Fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string HashHex(std::string_view text) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(Fnv1a64(text)));
  return buffer;
}

void WriteFilesAtomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
  namespace fs = std::filesystem;
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&staged] {
    std::error_code ignored;
    for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ignored);
  };
  for (const auto& [path, content] : files) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    staged.emplace_back(tmp, path);
    if (!out) {
      cleanup();
      Fail(ErrorCode::kIo, "cannot write " + path.string());
    }
  }
  for (const auto& [tmp, final_path] : staged) {
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) {
      cleanup();
      Fail(ErrorCode::kIo, "cannot rename " + tmp.string() + " to " + final_path.string() + ": " + ec.message());
    }
  }
}

}  // namespace recurlab
