#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rad::pipeline {

// One evaluated phase: which model, on which data partition, how well, and
// what it cost.
struct PhaseRecord {
  std::string name;
  std::string role;  // "test", "shifting", ...
  std::optional<double> auc;
  std::optional<double> logloss;
  double ms = 0.0;
  std::uint64_t retrieval_calls = 0;

  bool operator==(const PhaseRecord&) const = default;
};

struct ExperimentReport {
  std::string title;
  std::vector<PhaseRecord> records;
  // Free-form key/value lines, e.g. the winner of a comparison.
  std::vector<std::pair<std::string, std::string>> notes;

  // nullptr when absent.
  const PhaseRecord* find(std::string_view name) const;
  void append(const std::vector<PhaseRecord>& more);
};

// Tab-separated: name, role, AUC (4 dp), LogLoss (4 dp), ms, retrieval
// calls, after a '#' header line. Missing metrics are written as "-". Notes
// follow as "#key\tvalue" lines.
std::string to_tsv(const ExperimentReport& report);
nlohmann::json to_json(const PhaseRecord& record);
nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

// Writes <stem>.tsv and <stem>.json.
void write_report(const ExperimentReport& report, const std::filesystem::path& stem);

// Fixed-width table for terminals.
std::string format_table(const ExperimentReport& report);

}  // namespace rad::pipeline
