#pragma once

// Admissibility analysis of an encoder against a DM-MAC: can Eve pick a
// per-symbol coupling P(u, v | u') that makes Bob's view of target symbol u'
// indistinguishable from a clean transmission of u'?
//
// Coupling variable J(u', u, v) >= 0, flat index (u' * |U| + u) * |V| + v:
//   (a) sum_{u,v} J(u',u,v)            = P_U(u')
//   (b) sum_{u,v} W(y|u,v) J(u',u,v)   = W(y|u',silence) P_U(u')      for all (y, u')
//   (c) sum_v J(u',u,v)                = P_U(u') P_U(u)   (product mode only)
// with W(y|u,v) = sum_x law(y|x,v) P(x|u). Residual = min L1 violation of (b).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macauth/channel.hpp"
#include "macauth/parallel.hpp"
#include "macauth/prob.hpp"

namespace macauth {

enum class CouplingMode { general, product };
const char* to_string(CouplingMode m);
CouplingMode parse_coupling_mode(const std::string& s);

inline constexpr double kFeasibilityTol = 1e-7;

struct FeasibilityReport {
  bool feasible = false;
  double residual = 0.0;
  std::optional<JointDistribution> witness;  // dims {U', U, V}
  CouplingMode mode = CouplingMode::general;
};

struct MembershipVerdict {
  bool in_u_plus = false;
  double residual = 0.0;             // product-mode residual that decided membership
  double min_confusion_info = 0.0;   // bits
  double rate_threshold = 0.0;       // rates below this are safe even when attacks exist
  double rate = 0.0;
  bool safe_at_rate = false;
};

struct ConfusionResult {
  double value = 0.0;  // min I(U'; U, V) over the general polytope
  double gap = 0.0;    // final Frank-Wolfe duality gap
  std::size_t iterations = 0;
  bool converged = false;
  JointDistribution minimizer;
};

struct FrankWolfeOptions {
  double gap_tol = 1e-6;
  std::size_t max_iterations = 5000;
};

/// Eve's per-symbol attack rule extracted from a feasible coupling.
struct AttackKernel {
  std::size_t u_size = 0, v_size = 0, silence = 0;
  std::vector<double> v_given_uu;  // ((u' * |U| + u) * |V| + v)
  // Present when every row of P(x|u) is a point mass: rule in terms of channel inputs.
  std::size_t x_size = 0;
  std::optional<std::vector<double>> v_given_xx;  // ((x' * |X| + x) * |V| + v)

  std::span<const double> row_uu(std::size_t u_target, std::size_t u) const {
    return {v_given_uu.data() + (u_target * u_size + u) * v_size, v_size};
  }
  std::span<const double> row_xx(std::size_t x_target, std::size_t x) const {
    return {v_given_xx->data() + (x_target * x_size + x) * v_size, v_size};
  }
};

struct RateSearchConfig {
  std::size_t restarts = 64;
  std::uint64_t seed = 1;
  std::size_t max_rounds = 2000;
  double initial_step = 0.25;
  double min_step = 1e-9;
  FrankWolfeOptions fw{};
};

struct RateCandidate {
  std::size_t u_size = 0;
  std::size_t restart = 0;
  EncoderSpec encoder;
  double rate = 0.0;
  bool in_u_plus = false;
  double residual = 0.0;
};

struct RateBoundResult {
  double best_rate = 0.0;
  std::optional<EncoderSpec> best_encoder;
  std::optional<MembershipVerdict> verdict;
  std::vector<RateCandidate> search_trace;
};

FeasibilityReport simulatability_lp(const MacChannel& ch, const EncoderSpec& enc,
                                    CouplingMode mode);
/// Max mass on non-silent v over general-mode couplings whose residual is within 1e-9 of
/// the minimum (the feasible polytope itself when the encoder is simulatable).
double max_active_mass(const MacChannel& ch, const EncoderSpec& enc);
/// I(U'; U, V) in bits for a coupling over {U', U, V}.
double confusion_information(const JointDistribution& coupling);
ConfusionResult min_confusion_information(const MacChannel& ch, const EncoderSpec& enc,
                                          const FrankWolfeOptions& opt = {});
/// Membership decided by the product-coupling LP alone (no Frank-Wolfe).
bool in_u_plus(const MacChannel& ch, const EncoderSpec& enc, double* residual = nullptr);
MembershipVerdict membership_check(const MacChannel& ch, const EncoderSpec& enc, double rate,
                                   const FrankWolfeOptions& opt = {});
AttackKernel synthesize_attack(const MacChannel& ch, const EncoderSpec& enc,
                               const FeasibilityReport& report);
/// I(Y;U) through the silent slice, in bits.
double clean_rate(const MacChannel& ch, const EncoderSpec& enc);
RateBoundResult optimize_rate_bound(const MacChannel& ch, std::size_t u_size_max,
                                    const RateSearchConfig& cfg = {},
                                    Execution exec = Execution::parallel);

/// Row-conditional view of a coupling joint: P(u, v | u') (zero rows -> silent replay).
Coupling coupling_kernel(const JointDistribution& joint, std::size_t silence);

}  // namespace macauth
