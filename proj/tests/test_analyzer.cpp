#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "macauth/analyzer.hpp"

namespace macauth {
namespace {

// 1 - H2(0.1 + 0.8 p), evaluated independently of the library.
constexpr double kCascadeRate[3] = {0.41576118835714404, 0.31992295427172013,
                                    0.17325362750738216};
constexpr double kBsc01Capacity = 0.5310044064107188;

EncoderSpec no_aux(std::vector<double> px) {
  return {Distribution(std::move(px)), StochasticKernel::identity(2)};
}

TEST(CouplingMode, ParseRoundTrip) {
  for (auto m : {CouplingMode::general, CouplingMode::product})
    EXPECT_EQ(parse_coupling_mode(to_string(m)), m);
  EXPECT_THROW(parse_coupling_mode("joint"), std::invalid_argument);
}

TEST(Simulatability, NoAuxAlwaysFeasible) {
  const auto ch = worked_example_channel();
  for (auto px : {std::vector<double>{.5, .5}, {.3, .7}, {.9, .1}}) {
    const auto enc = no_aux(px);
    for (auto mode : {CouplingMode::general, CouplingMode::product}) {
      const auto rep = simulatability_lp(ch, enc, mode);
      EXPECT_TRUE(rep.feasible) << px[0] << " " << to_string(mode);
      EXPECT_LE(rep.residual, kFeasibilityTol);
      ASSERT_TRUE(rep.witness);
      EXPECT_EQ(rep.witness->dims(), (std::vector<std::size_t>{2, 2, 3}));
      // The witness really reproduces the clean channel.
      const auto attacked = attacked_channel(ch, enc, coupling_kernel(*rep.witness, ch.silence()));
      const auto clean = clean_channel(ch);
      for (std::size_t i = 0; i < clean.data().size(); ++i)
        EXPECT_NEAR(attacked.data()[i], clean.data()[i], 1e-9);
    }
    EXPECT_FALSE(in_u_plus(ch, enc));
  }
}

TEST(Simulatability, ProductWitnessHasProductMarginal) {
  const auto ch = worked_example_channel();
  const auto enc = no_aux({.3, .7});
  const auto rep = simulatability_lp(ch, enc, CouplingMode::product);
  ASSERT_TRUE(rep.witness);
  const auto uu = rep.witness->marginal(std::vector<std::size_t>{0, 1});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      EXPECT_NEAR(uu.mass()[a * 2 + b], enc.pu.mass()[a] * enc.pu.mass()[b], 1e-9);
}

TEST(Simulatability, AuxEncoderOnlySilentReplay) {
  // Reference residuals from an external LP solver; they equal 0.8/17, 6.4/73, 8/55, 8/65.
  const auto ch = worked_example_channel();
  const double ps[] = {0.05, 0.1, 0.2, 0.4};
  const double residual[] = {0.8 / 17, 6.4 / 73, 8.0 / 55, 8.0 / 65};
  for (int i = 0; i < 4; ++i) {
    const auto enc = crossover_encoder(ps[i]);
    const auto prod = simulatability_lp(ch, enc, CouplingMode::product);
    EXPECT_FALSE(prod.feasible);
    EXPECT_FALSE(prod.witness);
    EXPECT_GE(prod.residual, 0.005);
    EXPECT_NEAR(prod.residual, residual[i], 1e-9) << ps[i];
    EXPECT_TRUE(simulatability_lp(ch, enc, CouplingMode::general).feasible);
    EXPECT_LE(max_active_mass(ch, enc), 1e-6) << ps[i];
    EXPECT_TRUE(in_u_plus(ch, enc));
  }
  // Without the auxiliary noise Eve has plenty of room.
  EXPECT_NEAR(max_active_mass(ch, crossover_encoder(0.0)), 1.0, 1e-9);
}

TEST(Simulatability, SingleSymbolEncoderIsSimulatable) {
  const auto ch = worked_example_channel();
  EncoderSpec one{Distribution::uniform(1), StochasticKernel::from_rows({{.4, .6}})};
  EXPECT_FALSE(in_u_plus(ch, one));
  const auto v = membership_check(ch, one, 0.1);
  EXPECT_FALSE(v.in_u_plus);
  EXPECT_NEAR(v.min_confusion_info, 0.0, 1e-12);
  EXPECT_FALSE(v.safe_at_rate);
}

struct FrozenInstance {
  std::size_t x_size, v_size, silence;
  std::vector<std::vector<double>> columns;
  std::vector<double> pu;
  std::vector<std::vector<double>> px_given_u;
  double product_residual, general_residual, min_confusion;
};

// Random small instances; residuals from an external LP solver at 1e-10 tolerances and
// min I(U';U,V) from an external conic solver.
const std::vector<FrozenInstance>& frozen() {
  static const std::vector<FrozenInstance> v{
      {3, 2, 0, {{0.766, 0.151, 0.815, 0.0, 0.371, 0.0}, {0.234, 0.849, 0.185, 1.0, 0.629, 1.0}},
       {0.829, 0.064, 0.107}, {{0.0, 1.0, 0.0}, {0.008, 0.98, 0.012}, {0.053, 0.373, 0.574}},
       0.03712400588, 0, 0.3915931},
      {2, 2, 0, {{0.247, 0.072, 0.81, 0.683}, {0.106, 0.639, 0.182, 0.307}, {0.647, 0.289, 0.008, 0.01}},
       {0.061, 0.803, 0.136}, {{0.663, 0.337}, {0.843, 0.157}, {0.561, 0.439}},
       0.08142690164, 0, 0.61128368},
      {3, 2, 0, {{0.553, 0.883, 0.0, 0.574, 0.5, 0.0}, {0.447, 0.117, 1.0, 0.426, 0.5, 1.0}},
       {0.973, 0.027}, {{0.0, 1.0, 0.0}, {0.075, 0.609, 0.316}},
       0.01596110368, 0, 0.087629657},
      {2, 2, 0, {{1.0, 0.0, 0.15, 0.0}, {0.0, 1.0, 0.85, 1.0}},
       {0.023, 0.131, 0.846}, {{0.417, 0.583}, {0.51, 0.49}, {0.141, 0.859}},
       0.092530404, 0, 0.24426492},
      {3, 3, 0, {{0.0, 0.664, 0.077, 1.0, 0.994, 1.0, 0.24, 1.0, 1.0},
                 {1.0, 0.336, 0.923, 0.0, 0.006, 0.0, 0.76, 0.0, 0.0}},
       {0.124, 0.391, 0.485}, {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}, {0.963, 0.003, 0.034}},
       0.0361624245, 0, 0.036845853},
      {2, 2, 0, {{0.349, 1.0, 0.0, 0.324}, {0.641, 0.0, 1.0, 0.283}, {0.01, 0.0, 0.0, 0.393}},
       {0.259, 0.73, 0.011}, {{0.476, 0.524}, {0.275, 0.725}, {0.0, 1.0}},
       0.07027060099, 0, 0.1863493},
  };
  return v;
}

TEST(Simulatability, FrozenReferenceInstances) {
  for (const auto& f : frozen()) {
    const auto ch = MacChannel::from_column_matrix(f.x_size, f.v_size, f.silence, f.columns);
    const EncoderSpec enc{Distribution(f.pu, 1e-9), StochasticKernel::from_rows(f.px_given_u, 1e-9)};
    EXPECT_NEAR(simulatability_lp(ch, enc, CouplingMode::product).residual, f.product_residual, 1e-9);
    EXPECT_NEAR(simulatability_lp(ch, enc, CouplingMode::general).residual, f.general_residual, 1e-9);
    const auto mc = min_confusion_information(ch, enc);
    EXPECT_NEAR(mc.value, f.min_confusion, 1e-3);
    EXPECT_GE(mc.value, f.min_confusion - 1e-6);  // never below the true minimum
  }
}

TEST(MinConfusion, SilentReplayOnlyGivesEntropy) {
  const auto ch = worked_example_channel();
  for (double p : {0.05, 0.1, 0.2}) {
    const auto r = min_confusion_information(ch, crossover_encoder(p));
    EXPECT_NEAR(r.value, 1.0, 1e-9);
    EXPECT_NEAR(confusion_information(r.minimizer), r.value, 1e-9);
  }
  EncoderSpec skew{Distribution({.2, .8}), StochasticKernel::from_rows({{.9, .1}, {.1, .9}})};
  EXPECT_NEAR(min_confusion_information(ch, skew).value, entropy(skew.pu), 1e-9);
}

TEST(MinConfusion, MinimizerIsFeasible) {
  const auto& f = frozen()[1];
  const auto ch = MacChannel::from_column_matrix(f.x_size, f.v_size, f.silence, f.columns);
  const EncoderSpec enc{Distribution(f.pu, 1e-9), StochasticKernel::from_rows(f.px_given_u, 1e-9)};
  const auto r = min_confusion_information(ch, enc);
  const auto up = r.minimizer.marginal(0);
  for (std::size_t u = 0; u < 3; ++u) EXPECT_NEAR(up.mass()[u], f.pu[u], 1e-9);
  const auto attacked = attacked_channel(ch, enc, coupling_kernel(r.minimizer, ch.silence()));
  const auto clean = effective_channel_silent(ch, enc);
  for (std::size_t i = 0; i < clean.data().size(); ++i)
    EXPECT_NEAR(attacked.data()[i], clean.data()[i], 1e-8);
}

TEST(Membership, RateDichotomy) {
  const auto ch = worked_example_channel();
  const auto enc = crossover_encoder(0.1);
  auto v = membership_check(ch, enc, 0.3);
  EXPECT_TRUE(v.in_u_plus);
  EXPECT_NEAR(v.rate_threshold, 1.0, 1e-9);
  EXPECT_TRUE(v.safe_at_rate);
  v = membership_check(ch, no_aux({.5, .5}), 0.3);
  EXPECT_FALSE(v.in_u_plus);
  EXPECT_THROW(membership_check(ch, enc, -0.1), std::invalid_argument);
}

TEST(SynthesizeAttack, NoAuxProductWitnessIsInputAware) {
  const auto ch = worked_example_channel();
  const auto enc = no_aux({.5, .5});
  const auto rep = simulatability_lp(ch, enc, CouplingMode::product);
  const auto k = synthesize_attack(ch, enc, rep);
  ASSERT_TRUE(k.v_given_xx);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      double s = 0.0;
      for (double p : k.row_xx(a, b)) s += p;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  // Replaying the kernel on (U', U) drawn from the witness marginal gives back the witness.
  const auto& j = *rep.witness;
  const auto uu = j.marginal(std::vector<std::size_t>{0, 1});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t v = 0; v < 3; ++v)
        EXPECT_NEAR(uu.mass()[a * 2 + b] * k.row_uu(a, b)[v], j.mass()[(a * 2 + b) * 3 + v], 1e-12);
  // For uniform X the witness is unique and is the worked example's attack: silent when
  // x = x^, symbol "1" when (x, x^) = (1, 0), symbol "0" when (x, x^) = (0, 1).
  EXPECT_NEAR(k.row_xx(0, 0)[0], 1.0, 1e-9);
  EXPECT_NEAR(k.row_xx(1, 1)[0], 1.0, 1e-9);
  EXPECT_NEAR(k.row_xx(0, 1)[2], 1.0, 1e-9);
  EXPECT_NEAR(k.row_xx(1, 0)[1], 1.0, 1e-9);
}

TEST(SynthesizeAttack, AuxEncoderGeneralWitnessIsSilent) {
  const auto ch = worked_example_channel();
  const auto enc = crossover_encoder(0.1);
  const auto k = synthesize_attack(ch, enc, simulatability_lp(ch, enc, CouplingMode::general));
  EXPECT_FALSE(k.v_given_xx);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) EXPECT_NEAR(k.row_uu(a, b)[ch.silence()], 1.0, 1e-6);
  EXPECT_THROW(synthesize_attack(ch, enc, simulatability_lp(ch, enc, CouplingMode::product)),
               std::invalid_argument);
}

TEST(CouplingKernel, ZeroRowsBecomeSilentReplay) {
  JointDistribution j({2, 2, 2}, {0.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.0, 0.5});
  const auto k = coupling_kernel(j, 1);
  EXPECT_DOUBLE_EQ(k(0 * 2 + 1, 0), 1.0);  // u' = 0 -> (u = 0, silence)
  EXPECT_DOUBLE_EQ(k(0 * 2 + 0, 1), 0.25);
  EXPECT_DOUBLE_EQ(k(1 * 2 + 1, 1), 0.5);
}

TEST(CleanRate, CascadeClosedForm) {
  const auto ch = worked_example_channel();
  const double ps[] = {0.05, 0.1, 0.2};
  double prev = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double r = clean_rate(ch, crossover_encoder(ps[i]));
    EXPECT_NEAR(r, kCascadeRate[i], 1e-12);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_NEAR(clean_rate(ch, crossover_encoder(0.0)), kBsc01Capacity, 1e-12);
  double last = 0.0;
  for (double p = 0.45; p >= 0.0; p -= 0.05) {
    const double r = clean_rate(ch, crossover_encoder(std::max(p, 0.0)));
    EXPECT_GT(r, last);
    last = r;
  }
}

RateSearchConfig quick(std::size_t restarts) {
  RateSearchConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = 7;
  return cfg;
}

TEST(RateBound, WorkedExample) {
  const auto ch = worked_example_channel();
  const auto r = optimize_rate_bound(ch, 2, quick(16));
  ASSERT_TRUE(r.best_encoder);
  ASSERT_TRUE(r.verdict);
  EXPECT_GE(r.best_rate, 0.30);
  EXPECT_LE(r.best_rate, kBsc01Capacity + 1e-9);
  EXPECT_TRUE(r.verdict->in_u_plus);
  EXPECT_TRUE(in_u_plus(ch, *r.best_encoder));
  EXPECT_NEAR(clean_rate(ch, *r.best_encoder), r.best_rate, 1e-9);
  EXPECT_FALSE(r.search_trace.empty());
  for (const auto& c : r.search_trace)
    if (c.in_u_plus) EXPECT_LE(c.rate, r.best_rate);
}

TEST(RateBound, SingleSymbolGivesZero) {
  const auto r = optimize_rate_bound(worked_example_channel(), 1, quick(4));
  EXPECT_EQ(r.best_rate, 0.0);
  EXPECT_FALSE(r.best_encoder);
}

TEST(RateBound, NoiselessChannelWithoutEveReachesOneBit) {
  // |V| = 1: Eve can only stay silent, so every encoder with distinct rows is admissible.
  const auto ch = MacChannel::from_column_matrix(2, 1, 0, {{1, 0}, {0, 1}});
  const auto r = optimize_rate_bound(ch, 2, quick(8));
  EXPECT_GT(r.best_rate, 0.999);
  EXPECT_LE(r.best_rate, 1.0 + 1e-12);
}

TEST(RateBound, SerialMatchesParallel) {
  const auto ch = worked_example_channel();
  const auto s = optimize_rate_bound(ch, 2, quick(6), Execution::serial);
  const auto p = optimize_rate_bound(ch, 2, quick(6), Execution::parallel);
  EXPECT_EQ(s.best_rate, p.best_rate);
  ASSERT_EQ(s.search_trace.size(), p.search_trace.size());
  for (std::size_t i = 0; i < s.search_trace.size(); ++i)
    EXPECT_EQ(s.search_trace[i].rate, p.search_trace[i].rate);
}

}  // namespace
}  // namespace macauth
