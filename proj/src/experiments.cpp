#include "macauth/experiments.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "macauth/example_suite.hpp"

namespace macauth {

using json = nlohmann::json;

namespace {

json kernel_rows(const StochasticKernel& k) {
  json rows = json::array();
  for (std::size_t i = 0; i < k.input_size(); ++i) {
    const auto r = k.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

// Drops negative zeros left over from the LP.
std::vector<double> clean_zeros(std::vector<double> v) {
  for (auto& x : v) x += 0.0;
  return v;
}

json estimate(const Estimate& e) { return {{"value", e.value}, {"half_width", e.half_width}}; }

json tally(const Tally& t) {
  return {{"trials", t.trials}, {"correct", t.correct}, {"wrong_message", t.wrong_message},
          {"target_hit", t.target_hit}, {"intrusion", t.intrusion}};
}

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

json analyze(const ExperimentConfig& cfg) {
  const auto ch = stage("config", [&] { return cfg.build_channel(); });
  const auto enc = stage("config", [&] { return cfg.build_encoder(); });
  json out;
  out["clean_rate"] = clean_rate(ch, enc);
  json reports = json::object();
  for (auto mode : cfg.analyze.modes)
    reports[to_string(mode)] = stage("feasibility", [&] { return to_json(simulatability_lp(ch, enc, mode)); });
  out["feasibility"] = reports;
  const double rate = cfg.analyze.rate.value_or(out["clean_rate"].get<double>());
  out["membership"] = stage("membership", [&] { return to_json(membership_check(ch, enc, rate)); });
  out["max_active_mass"] = stage("active_mass", [&] { return max_active_mass(ch, enc); });
  return out;
}

json rate_bound(const ExperimentConfig& cfg, Execution exec) {
  const auto ch = stage("config", [&] { return cfg.build_channel(); });
  RateSearchConfig rs;
  rs.restarts = cfg.rate_bound.restarts;
  rs.seed = cfg.rate_bound.seed;
  const auto res = stage("rate_bound", [&] { return optimize_rate_bound(ch, cfg.rate_bound.u_size_max, rs, exec); });
  json out;
  out["best_rate"] = res.best_rate;
  out["best_encoder"] = res.best_encoder ? to_json(*res.best_encoder) : json(nullptr);
  out["verdict"] = res.verdict ? to_json(*res.verdict) : json(nullptr);
  json trace = json::array();
  for (const auto& c : res.search_trace)
    trace.push_back({{"u_size", c.u_size}, {"restart", c.restart}, {"rate", c.rate},
                     {"in_u_plus", c.in_u_plus}, {"residual", c.residual}});
  out["search_trace"] = trace;
  return out;
}

json synthesize(const ExperimentConfig& cfg) {
  const auto ch = stage("config", [&] { return cfg.build_channel(); });
  const auto enc = stage("config", [&] { return cfg.build_encoder(); });
  const auto rep = stage("feasibility", [&] { return simulatability_lp(ch, enc, CouplingMode::general); });
  json out;
  out["feasibility"] = to_json(rep);
  out["attack"] = rep.feasible ? stage("synthesize", [&] { return to_json(synthesize_attack(ch, enc, rep)); })
                               : json(nullptr);
  return out;
}

std::vector<SimulationCell> simulate(const ExperimentConfig& cfg, Execution exec) {
  if (!cfg.simulate) throw std::runtime_error("config: no simulate block");
  const auto& s = *cfg.simulate;
  const auto ch = stage("config", [&] { return cfg.build_channel(); });
  const auto enc = stage("config", [&] { return cfg.build_encoder(); });
  std::vector<double> rates = s.rate;
  if (rates.empty()) {
    const double base = clean_rate(ch, enc);
    for (double f : s.rate_fraction) rates.push_back(f * base);
  }
  std::vector<SimulationCell> cells;
  for (const auto& name : s.attacks) {
    const auto atk = stage("attack " + name, [&] { return cfg.build_attack(name, ch, enc); });
    for (auto n : s.n)
      for (double rate : rates) {
        TrialConfig tc;
        tc.n = n;
        tc.rate = rate;
        tc.trials = s.trials;
        tc.seed = *s.seed;
        tc.tp = s.delta ? TypicalityParams{n, *s.delta} : TypicalityParams::schedule(n, s.delta_scale);
        tc.encoder = enc;
        tc.channel = ch;
        tc.attack = atk;
        tc.mode = s.codebook;
        tc.max_messages = s.max_messages;
        cells.push_back({n, rate, name, stage("simulate", [&] { return run_trials(tc, exec); })});
      }
  }
  return cells;
}

}  // namespace

ReportFormat parse_report_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown format '" + s + "' (expected json|csv)");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"analyze", "rate-bound", "simulate", "synthesize-attack",
                                              "reproduce-paper-example"};
  return names;
}

json to_json(const TrialReport& r) {
  return {{"unattacked", tally(r.unattacked)},
          {"attacked", tally(r.attacked)},
          {"eps1", estimate(r.eps1)},
          {"eps2", estimate(r.eps2)},
          {"target_rate", estimate(r.target_rate)},
          {"attacked_intrusion", estimate(r.attacked_intrusion)},
          {"unattacked_intrusion", estimate(r.unattacked_intrusion)},
          {"num_messages", r.num_messages},
          {"delta", r.delta},
          {"codebook", to_string(r.mode)},
          {"codebook_fallbacks", r.codebook_fallbacks},
          {"typicality_test", "strong, L1 <= delta"},
          {"codeword_fallback", "nearest realizable type after 1000 rejections"}};
}

json to_json(const FeasibilityReport& r) {
  json out{{"feasible", r.feasible}, {"residual", r.residual}, {"mode", to_string(r.mode)}};
  if (r.witness) {
    const auto m = r.witness->mass();
    out["witness"] = {{"dims", r.witness->dims()}, {"mass", clean_zeros({m.begin(), m.end()})}};
  } else {
    out["witness"] = nullptr;
  }
  return out;
}

json to_json(const MembershipVerdict& v) {
  return {{"in_u_plus", v.in_u_plus},       {"residual", v.residual},
          {"min_confusion_info", v.min_confusion_info}, {"rate_threshold", v.rate_threshold},
          {"rate", v.rate},                 {"safe_at_rate", v.safe_at_rate}};
}

json to_json(const AttackKernel& k) {
  json out{{"u_size", k.u_size}, {"v_size", k.v_size}, {"silence", k.silence},
           {"v_given_uu", clean_zeros(k.v_given_uu)}};
  out["v_given_xx"] = k.v_given_xx ? json(clean_zeros(*k.v_given_xx)) : json(nullptr);
  out["x_size"] = k.x_size;
  return out;
}

json to_json(const EncoderSpec& e) {
  const auto pu = e.pu.mass();
  return {{"pu", std::vector<double>(pu.begin(), pu.end())}, {"px_given_u", kernel_rows(e.px_given_u)}};
}

OutputRecord run_command(const ExperimentConfig& cfg, const std::string& command, Execution exec) {
  const auto t0 = std::chrono::steady_clock::now();
  OutputRecord rec;
  rec.command = command;
  rec.config_text = serialize_config(cfg);
  rec.config_hash = config_hash(cfg);
  if (command == "analyze") {
    rec.results = analyze(cfg);
  } else if (command == "rate-bound") {
    rec.seeds = {cfg.rate_bound.seed};
    rec.results = rate_bound(cfg, exec);
  } else if (command == "simulate") {
    if (cfg.simulate) rec.seeds = {*cfg.simulate->seed};
    rec.cells = simulate(cfg, exec);
    json cells = json::array();
    for (const auto& c : rec.cells)
      cells.push_back({{"n", c.n}, {"rate", c.rate}, {"attack", c.attack}, {"report", to_json(c.report)}});
    rec.results = {{"cells", cells}};
  } else if (command == "synthesize-attack") {
    rec.results = synthesize(cfg);
  } else if (command == "reproduce-paper-example") {
    SuiteOptions opt;
    opt.exec = exec;
    if (cfg.simulate) {
      opt.trials = cfg.simulate->trials;
      opt.seed = *cfg.simulate->seed;
    }
    rec.seeds = {opt.seed};
    json checks = json::array();
    for (const auto& c : run_example_suite(opt)) {
      checks.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"values", c.values},
                        {"seconds", c.seconds}});
      rec.ok = rec.ok && c.pass;
    }
    rec.results = {{"checks", checks}, {"all_pass", rec.ok}, {"trials", opt.trials}};
  } else {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
  rec.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string to_json(const OutputRecord& rec) {
  const json j{{"command", rec.command},
               {"config_hash", rec.config_hash},
               {"config", rec.config_text},
               {"version", rec.version},
               {"seeds", rec.seeds},
               {"results", rec.results},
               {"duration_seconds", rec.duration_seconds},
               {"ok", rec.ok}};
  return j.dump(2) + "\n";
}

std::string to_csv(const OutputRecord& rec) {
  if (rec.cells.empty()) throw std::invalid_argument("csv output is only available for simulate");
  std::ostringstream out;
  out << "n,rate,attack,codebook,num_messages,delta,"
         "unattacked_trials,unattacked_correct,unattacked_wrong,unattacked_intrusion,"
         "attacked_trials,attacked_correct,attacked_wrong,attacked_target,attacked_intrusion,"
         "eps1,eps1_half_width,eps2,eps2_half_width,target_rate,target_rate_half_width\n";
  for (const auto& c : rec.cells) {
    const auto& r = c.report;
    const auto& u = r.unattacked;
    const auto& a = r.attacked;
    out << c.n << ',' << format_double(c.rate) << ',' << c.attack << ',' << to_string(r.mode) << ','
        << r.num_messages << ',' << format_double(r.delta) << ',' << u.trials << ',' << u.correct << ','
        << u.wrong_message << ',' << u.intrusion << ',' << a.trials << ',' << a.correct << ','
        << a.wrong_message << ',' << a.target_hit << ',' << a.intrusion << ',' << format_double(r.eps1.value)
        << ',' << format_double(r.eps1.half_width) << ',' << format_double(r.eps2.value) << ','
        << format_double(r.eps2.half_width) << ',' << format_double(r.target_rate.value) << ','
        << format_double(r.target_rate.half_width) << '\n';
  }
  return out.str();
}

void write_report(const OutputRecord& rec, ReportFormat fmt, const std::string& path) {
  const std::string body = fmt == ReportFormat::json ? to_json(rec) : to_csv(rec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace macauth
