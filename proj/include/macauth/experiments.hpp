#pragma once

// Command dispatch for the CLI and the machine-readable output record.

#include <string>
#include <vector>

#include <json.hpp>

#include "macauth/config.hpp"
#include "macauth/parallel.hpp"

namespace macauth {

inline constexpr const char* kVersion = "1.0.0";

struct SimulationCell {
  std::size_t n = 0;
  double rate = 0.0;
  std::string attack;
  TrialReport report;
};

struct OutputRecord {
  std::string command;
  std::string config_hash;
  std::string config_text;  // canonical
  std::string version = kVersion;
  std::vector<std::uint64_t> seeds;
  nlohmann::json results;
  std::vector<SimulationCell> cells;  // simulate only
  double duration_seconds = 0.0;
  bool ok = true;  // false when any check failed
};

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(const std::string& s);

const std::vector<std::string>& command_names();

/// Runs one command. Stage failures are rethrown as std::runtime_error prefixed
/// with the stage name.
OutputRecord run_command(const ExperimentConfig& cfg, const std::string& command,
                         Execution exec = Execution::parallel);

/// Full nested record; keys sorted, numbers shortest round-trip.
std::string to_json(const OutputRecord& rec);
/// One row per simulation cell. Throws for records without cells.
std::string to_csv(const OutputRecord& rec);
void write_report(const OutputRecord& rec, ReportFormat fmt, const std::string& path);

nlohmann::json to_json(const TrialReport& r);
nlohmann::json to_json(const FeasibilityReport& r);
nlohmann::json to_json(const MembershipVerdict& v);
nlohmann::json to_json(const AttackKernel& k);
nlohmann::json to_json(const EncoderSpec& e);

}  // namespace macauth
