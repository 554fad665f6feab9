#include "macauth/example_suite.hpp"

#include <chrono>
#include <cmath>

#include "macauth/analyzer.hpp"
#include "macauth/coding.hpp"

namespace macauth {

namespace {

using json = nlohmann::json;

constexpr std::size_t kV0 = 1, kV1 = 2;  // symbols "0" and "1"; silence is 0

// Attack on the plain encoder: P(x, v | x^) with completion P(x | x^).
Coupling attack_coupling(const StochasticKernel& completion) {
  std::vector<std::vector<double>> rows(2, std::vector<double>(6, 0.0));
  rows[0][0 * 3 + 0] = completion(0, 0);
  rows[0][1 * 3 + kV1] = completion(1, 0);
  rows[1][1 * 3 + 0] = completion(1, 1);
  rows[1][0 * 3 + kV0] = completion(0, 1);
  return StochasticKernel::from_rows(rows);
}

std::vector<double> input_attack_kernel() {
  std::vector<double> k(2 * 2 * 3, 0.0);
  k[(0 * 2 + 0) * 3 + 0] = k[(1 * 2 + 1) * 3 + 0] = 1.0;
  k[(0 * 2 + 1) * 3 + kV1] = k[(1 * 2 + 0) * 3 + kV0] = 1.0;
  return k;
}

TrialConfig sim(std::size_t n, double rate, const EncoderSpec& enc, const AttackStrategy& atk,
                const SuiteOptions& opt) {
  TrialConfig c;
  c.n = n;
  c.rate = rate;
  c.trials = opt.trials;
  c.seed = opt.seed;
  c.tp = TypicalityParams::schedule(n, 0.68);
  c.encoder = enc;
  c.channel = worked_example_channel();
  c.attack = atk;
  c.mode = CodebookMode::ensemble;
  return c;
}

SuiteCheck check(int id, const char* name) {
  SuiteCheck c;
  c.id = id;
  c.name = name;
  return c;
}

json tally_json(const Tally& t) {
  return {{"trials", t.trials}, {"correct", t.correct}, {"wrong_message", t.wrong_message},
          {"target_hit", t.target_hit}, {"intrusion", t.intrusion}};
}

SuiteCheck matrix_identity() {
  SuiteCheck c = check(1, "matrix_identity");
  const auto ch = worked_example_channel();
  const auto enc = crossover_encoder(0.0);
  const std::vector<std::vector<double>> clean{{.9, .1, 0}, {.1, .9, 0}};
  double worst = 0.0;
  for (const auto& comp : {StochasticKernel::identity(2), StochasticKernel::from_rows({{0, 1}, {1, 0}}),
                           StochasticKernel::from_rows({{.7, .3}, {.4, .6}})}) {
    const auto out = attacked_channel(ch, enc, attack_coupling(comp));
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 3; ++y) worst = std::max(worst, std::abs(out(y, x) - clean[x][y]));
  }
  c.values = {{"max_deviation", worst}, {"tolerance", 1e-12}};
  c.pass = worst <= 1e-12;
  return c;
}

SuiteCheck plain_simulatable() {
  SuiteCheck c = check(2, "plain_encoder_simulatable");
  const auto ch = worked_example_channel();
  c.pass = true;
  json rows = json::array();
  for (auto px : {std::vector<double>{.5, .5}, {.3, .7}, {.9, .1}}) {
    const auto enc = crossover_encoder(0.0, Distribution(px));
    json r{{"px", px}};
    for (auto mode : {CouplingMode::general, CouplingMode::product}) {
      const auto rep = simulatability_lp(ch, enc, mode);
      r[to_string(mode)] = rep.residual;
      c.pass = c.pass && rep.feasible && rep.residual <= 1e-7;
    }
    rows.push_back(r);
  }
  c.values = {{"residuals", rows}, {"tolerance", 1e-7}};
  return c;
}

SuiteCheck aux_admissible() {
  SuiteCheck c = check(3, "aux_encoder_admissible");
  const auto ch = worked_example_channel();
  c.pass = true;
  json rows = json::array();
  for (double p : {0.05, 0.1, 0.2, 0.4}) {
    const auto enc = crossover_encoder(p);
    const auto prod = simulatability_lp(ch, enc, CouplingMode::product);
    const double active = max_active_mass(ch, enc);
    rows.push_back({{"p", p}, {"product_residual", prod.residual}, {"max_active_mass", active}});
    c.pass = c.pass && !prod.feasible && prod.residual >= 0.005 && active <= 1e-6;
  }
  c.values = {{"instances", rows}, {"min_residual", 0.005}, {"max_active", 1e-6}};
  return c;
}

SuiteCheck rate_trend(Execution exec) {
  SuiteCheck c = check(4, "rate_trend");
  const auto ch = worked_example_channel();
  c.pass = true;
  json rows = json::array();
  double prev = -1.0;
  for (double p : {0.2, 0.1, 0.05}) {
    const double got = clean_rate(ch, crossover_encoder(p));
    const double closed = 1.0 - binary_entropy(0.1 + 0.8 * p);
    rows.push_back({{"p", p}, {"rate", got}, {"closed_form", closed}});
    c.pass = c.pass && std::abs(got - closed) <= 1e-6 && got > prev;
    prev = got;
  }
  const double capacity = 1.0 - binary_entropy(0.1);
  RateSearchConfig rs;
  rs.restarts = 16;
  const auto best = optimize_rate_bound(ch, 2, rs, exec);
  c.pass = c.pass && prev < capacity && best.best_rate >= prev && best.best_rate <= capacity + 1e-9;
  c.values = {{"instances", rows}, {"limit", capacity}, {"optimized_rate", best.best_rate}};
  return c;
}

SuiteCheck reliability(const SuiteOptions& opt) {
  SuiteCheck c = check(5, "reliability_trend");
  const auto enc = crossover_encoder(0.1);
  const double rate = 0.6 * clean_rate(worked_example_channel(), enc);
  json rows = json::array();
  double prev = 2.0, last = 1.0;
  c.pass = true;
  for (std::size_t n : {40u, 80u, 160u}) {
    const auto r = run_trials(sim(n, rate, enc, AttackStrategy::silent(), opt), opt.exec);
    rows.push_back({{"n", n}, {"eps1", r.eps1.value}, {"half_width", r.eps1.half_width},
                    {"num_messages", r.num_messages}, {"delta", r.delta}});
    c.pass = c.pass && r.eps1.value < prev;
    prev = last = r.eps1.value;
  }
  c.pass = c.pass && last <= 0.15;
  c.values = {{"rate", rate}, {"cells", rows}, {"max_eps1_at_160", 0.15}};
  return c;
}

SuiteCheck attack_demo(const SuiteOptions& opt) {
  SuiteCheck c = check(6, "attack_on_plain_encoder");
  const auto enc = crossover_encoder(0.0);
  const auto clean = run_trials(sim(80, 0.3, enc, AttackStrategy::silent(), opt), opt.exec);
  const auto hit = run_trials(sim(80, 0.3, enc, AttackStrategy::input_aware(input_attack_kernel()), opt), opt.exec);
  const double correct = static_cast<double>(clean.unattacked.correct) / clean.unattacked.trials;
  const double d1 = std::abs(hit.target_rate.value - correct);
  const double d2 = std::abs(hit.attacked_intrusion.value - clean.unattacked_intrusion.value);
  c.values = {{"no_attack", tally_json(clean.unattacked)}, {"attacked", tally_json(hit.attacked)},
              {"target_rate", hit.target_rate.value}, {"no_attack_correct_rate", correct},
              {"intrusion_gap", d2}, {"tolerance", 0.05}};
  c.pass = hit.attacked.trials > 0 && d1 <= 0.05 && d2 <= 0.05;
  return c;
}

SuiteCheck detection(const SuiteOptions& opt) {
  SuiteCheck c = check(7, "iid_attack_detected");
  const auto enc = crossover_encoder(0.1);
  const double rate = 0.6 * clean_rate(worked_example_channel(), enc);
  const auto r = run_trials(sim(100, rate, enc, AttackStrategy::iid_symbol({0, .5, .5}), opt), opt.exec);
  c.values = {{"attacked", tally_json(r.attacked)}, {"wrong_rate", r.eps2.value}, {"max", 0.01}};
  c.pass = r.attacked.trials > 0 && r.eps2.value <= 0.01;
  return c;
}

SuiteCheck information_measures() {
  SuiteCheck c = check(9, "information_measures");
  const double h = entropy(Distribution({0.9, 0.1}));
  const double bsc = mutual_information(Distribution::uniform(2), StochasticKernel::from_rows({{.9, .1}, {.1, .9}}));
  const double cascade = clean_rate(worked_example_channel(), crossover_encoder(0.1));
  // Chain rule and non-negativity on pseudo-random joints over 2 x 3 x 2.
  Rng rng(77);
  double chain = 0.0, lowest = 1.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> m(12);
    double s = 0.0;
    for (auto& v : m) s += (v = rng.uniform() * (rng.uniform() < 0.2 ? 0.0 : 1.0));
    if (s == 0.0) continue;
    for (auto& v : m) v /= s;
    const JointDistribution j({2, 3, 2}, m, 1e-9);
    const double abc = mutual_information(j.reshaped({2, 6}));
    const double ac = mutual_information(j.marginal(std::vector<std::size_t>{0, 2}));
    const double b_given_c = conditional_mutual_information(j);
    chain = std::max(chain, std::abs(abc - ac - b_given_c));
    lowest = std::min({lowest, abc, ac, b_given_c});
  }
  c.values = {{"binary_entropy_0.1", h}, {"bsc_0.1_uniform", bsc}, {"cascade_p0.1", cascade},
              {"chain_rule_max_error", chain}, {"min_information", lowest}};
  c.pass = std::abs(h - 0.46900) <= 1e-4 && std::abs(bsc - 0.53100) <= 1e-4 &&
           std::abs(cascade - 0.3199) <= 1e-4 && chain <= 1e-10 && lowest >= -1e-12;
  return c;
}

}  // namespace

std::vector<SuiteCheck> run_example_suite(const SuiteOptions& opt) {
  std::vector<SuiteCheck> out;
  auto timed = [&](auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteCheck c = f();
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(c));
  };
  timed([] { return matrix_identity(); });
  timed([] { return plain_simulatable(); });
  timed([] { return aux_admissible(); });
  timed([&] { return rate_trend(opt.exec); });
  timed([&] { return reliability(opt); });
  timed([&] { return attack_demo(opt); });
  timed([&] { return detection(opt); });
  timed([] { return information_measures(); });
  return out;
}

}  // namespace macauth
