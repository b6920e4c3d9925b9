#include "rad/pipeline/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "rad/error.hpp"

namespace rad::pipeline {

namespace {

std::string fixed4(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("-");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

const PhaseRecord* ExperimentReport::find(std::string_view name) const {
  for (const auto& r : records) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void ExperimentReport::append(const std::vector<PhaseRecord>& more) {
  records.insert(records.end(), more.begin(), more.end());
}

std::string to_tsv(const ExperimentReport& report) {
  std::string out = "#name\trole\tauc\tlogloss\tms\tretrieval_calls\n";
  for (const auto& r : report.records) {
    out += fmt::format("{}\t{}\t{}\t{}\t{:.0f}\t{}\n", r.name, r.role, fixed4(r.auc),
                       fixed4(r.logloss), r.ms, r.retrieval_calls);
  }
  for (const auto& [key, value] : report.notes) out += "#" + key + "\t" + value + "\n";
  return out;
}

nlohmann::json to_json(const PhaseRecord& r) {
  nlohmann::json j = {{"name", r.name},
                      {"role", r.role},
                      {"auc", nullptr},
                      {"logloss", nullptr},
                      {"ms", r.ms},
                      {"retrieval_calls", r.retrieval_calls}};
  if (r.auc) j["auc"] = *r.auc;
  if (r.logloss) j["logloss"] = *r.logloss;
  return j;
}

nlohmann::json to_json(const ExperimentReport& report) {
  auto records = nlohmann::json::array();
  for (const auto& r : report.records) records.push_back(to_json(r));
  // An array keeps the notes in insertion order.
  auto notes = nlohmann::json::array();
  for (const auto& [key, value] : report.notes) notes.push_back({key, value});
  return {{"title", report.title}, {"records", records}, {"notes", notes}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport report;
    report.title = j.value("title", "");
    for (const auto& r : j.at("records")) {
      report.records.push_back({r.at("name").get<std::string>(), r.at("role").get<std::string>(),
                                optional_number(r, "auc"), optional_number(r, "logloss"),
                                r.at("ms").get<double>(),
                                r.at("retrieval_calls").get<std::uint64_t>()});
    }
    if (j.contains("notes")) {
      for (const auto& kv : j.at("notes")) {
        report.notes.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
      }
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

void write_report(const ExperimentReport& report, const std::filesystem::path& stem) {
  auto tsv = stem;
  tsv += ".tsv";
  auto json = stem;
  json += ".json";
  write_text(tsv, to_tsv(report));
  write_text(json, to_json(report).dump(2) + "\n");
}

std::string format_table(const ExperimentReport& report) {
  std::string out;
  if (!report.title.empty()) out += report.title + "\n";
  out += fmt::format("{:<22} {:<9} {:>7} {:>8} {:>9} {:>12}\n", "model", "data", "AUC", "LogLoss",
                     "ms", "retrievals");
  for (const auto& r : report.records) {
    out += fmt::format("{:<22} {:<9} {:>7} {:>8} {:>9.0f} {:>12}\n", r.name, r.role, fixed4(r.auc),
                       fixed4(r.logloss), r.ms, r.retrieval_calls);
  }
  for (const auto& [key, value] : report.notes) out += key + ": " + value + "\n";
  return out;
}

}  // namespace rad::pipeline
