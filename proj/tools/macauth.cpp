// macauth <command> --config <file> --out <file> --format json|csv [--serial]

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "macauth/experiments.hpp"

namespace {

// MACAUTH_LOG: 0 = silent, 1 = summary (default), 2 = per-check detail.
int log_level() {
  const char* v = std::getenv("MACAUTH_LOG");
  if (!v) return 1;
  try {
    return std::stoi(v);
  } catch (...) {
    return 1;
  }
}

void log_summary(const macauth::OutputRecord& rec, int level) {
  if (level < 1) return;
  std::cerr << rec.command << ": " << (rec.ok ? "ok" : "FAILED") << " in " << rec.duration_seconds
            << " s (config " << rec.config_hash << ")\n";
  if (level < 2 || !rec.results.contains("checks")) return;
  for (const auto& c : rec.results["checks"])
    std::cerr << "  [" << (c["pass"].get<bool>() ? "PASS" : "FAIL") << "] " << c["id"] << " "
              << c["name"].get<std::string>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyless physical-layer authentication over a DM-MAC"};
  app.require_subcommand(1);
  std::string config, out, format = "json";
  bool serial = false;
  for (const auto& name : macauth::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "report path")->required();
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--serial", serial, "run the serial reference kernels");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  const int level = log_level();
  const auto fmt = macauth::parse_report_format(format);
  const auto exec = serial ? macauth::Execution::serial : macauth::Execution::parallel;

  macauth::ExperimentConfig cfg;
  try {
    cfg = macauth::load_config(config);
  } catch (const std::exception& e) {
    std::cerr << "config: " << e.what() << "\n";
    macauth::OutputRecord rec;
    rec.command = command;
    rec.results = {{"error", std::string("config: ") + e.what()}};
    rec.ok = false;
    try {
      macauth::write_report(rec, macauth::ReportFormat::json, out);
    } catch (const std::exception&) {
    }
    return 2;
  }
  if (fmt == macauth::ReportFormat::csv && command != "simulate") {
    std::cerr << "--format csv is only available for simulate\n";
    return 2;
  }

  macauth::OutputRecord rec;
  int status = 0;
  try {
    rec = macauth::run_command(cfg, command, exec);
    status = rec.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    rec.command = command;
    rec.config_text = macauth::serialize_config(cfg);
    rec.config_hash = macauth::config_hash(cfg);
    rec.results = {{"error", e.what()}};
    rec.ok = false;
    status = 2;
  }
  try {
    // A failed run still leaves a JSON record; CSV needs cells.
    if (fmt == macauth::ReportFormat::csv && rec.cells.empty()) {
      macauth::write_report(rec, macauth::ReportFormat::json, out);
    } else {
      macauth::write_report(rec, fmt, out);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  log_summary(rec, level);
  return status;
}
