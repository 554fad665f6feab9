#pragma once

// The DM-MAC shared by Alice (X) and Eve (V) towards Bob (Y), Alice's
// auxiliary-variable encoder, and the kernels obtained by composing them.

#include <cstdint>
#include <span>

#include "macauth/prob.hpp"

namespace macauth {

class MacChannel {
 public:
  MacChannel() = default;
  /// `law` maps the flat input index x * v_size + v to Y.
  MacChannel(std::size_t x_size, std::size_t v_size, std::size_t silence_index,
             StochasticKernel law);

  /// Builds from a Y x (X*V) matrix whose columns follow the external order:
  /// all x for v = silence first, then all x for each remaining v ascending.
  static MacChannel from_column_matrix(std::size_t x_size, std::size_t v_size,
                                       std::size_t silence_index,
                                       const std::vector<std::vector<double>>& y_by_col,
                                       double tol = 1e-9);
  /// Inverse of from_column_matrix.
  std::vector<std::vector<double>> column_matrix() const;
  /// Column position of (x, v) in the external matrix layout.
  std::size_t column_of(std::size_t x, std::size_t v) const;

  std::size_t x_size() const { return x_; }
  std::size_t v_size() const { return v_; }
  std::size_t y_size() const { return law_.output_size(); }
  std::size_t silence() const { return silence_; }
  const StochasticKernel& law() const { return law_; }
  double operator()(std::size_t y, std::size_t x, std::size_t v) const {
    return law_(y, x * v_ + v);
  }

 private:
  std::size_t x_ = 0, v_ = 0, silence_ = 0;
  StochasticKernel law_;
};

struct EncoderSpec {
  Distribution pu;
  StochasticKernel px_given_u;  // U -> X

  std::size_t u_size() const { return pu.size(); }
  void validate_against(const MacChannel& ch) const;
};

/// Per-symbol coupling chosen by Eve: U' -> (U x V), output index u * v_size + v.
using Coupling = StochasticKernel;

StochasticKernel clean_channel(const MacChannel& ch);
/// P(y|u) = sum_x law(y|x, v) P(x|u) for a fixed Eve symbol v.
StochasticKernel effective_channel(const MacChannel& ch, const EncoderSpec& enc, std::size_t v);
inline StochasticKernel effective_channel_silent(const MacChannel& ch, const EncoderSpec& enc) {
  return effective_channel(ch, enc, ch.silence());
}
/// Y-law for each (u, v) pair: rows indexed u * v_size + v.
StochasticKernel effective_uv_channel(const MacChannel& ch, const EncoderSpec& enc);
/// P(y|u') = sum_{u,v} W(y|u,v) P(u,v|u').
StochasticKernel attacked_channel(const MacChannel& ch, const EncoderSpec& enc,
                                  const Coupling& coupling);
/// u = u', v = silence.
Coupling silent_replay_coupling(const MacChannel& ch, std::size_t u_size);

class Rng;
/// y_i ~ law(.|x_i, v_i), independently, deterministic given seed.
Sequence sample_output(const MacChannel& ch, std::span<const Symbol> x_seq,
                       std::span<const Symbol> v_seq, std::uint64_t seed);
Sequence sample_output(const MacChannel& ch, std::span<const Symbol> x_seq,
                       std::span<const Symbol> v_seq, Rng& rng);

/// The 3 x 6 DM-MAC of the worked example: X = {0,1}, V = {silence, 0, 1}, Y = {0,1,2}.
MacChannel worked_example_channel();
/// Binary U with P(x|u) a crossover-p flip; p = 0 gives the no-auxiliary (U = X) encoder.
EncoderSpec crossover_encoder(double p, const Distribution& pu = Distribution::uniform(2));

}  // namespace macauth
