#pragma once

// Random-coding authentication: typical-set codebooks, the stochastic encoder,
// Eve's attack strategies, the authenticate-or-decode typicality decoder and the
// Monte Carlo harness estimating eps1 (no attack) and eps2 (wrong message under attack).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macauth/channel.hpp"
#include "macauth/parallel.hpp"
#include "macauth/prob.hpp"
#include "macauth/rng.hpp"

namespace macauth {

/// Default cap on materialized codebooks (the decoder is exhaustive).
inline constexpr std::uint64_t kMaxExplicitMessages = std::uint64_t{1} << 20;
inline constexpr std::size_t kCodewordAttempts = 1000;

/// floor(2^(n * rate)); n * rate within 1e-9 of an integer is snapped to it so that
/// e.g. rate 0.3 at n = 80 gives 2^24 rather than 2^24 - 1. Throws unless the count is
/// in [2, 2^62].
std::uint64_t message_count(std::size_t n, double rate);

/// Codeword law: i.i.d. P_U conditioned on strong typicality, with up to
/// `attempts` rejections before falling back to a uniformly shuffled
/// sequence of the realizable type nearest to P_U.
class CodewordSampler {
 public:
  /// Throws when no realizable type is typical (the fallback would fail too).
  CodewordSampler(const Distribution& pu, const TypicalityParams& tp,
                  std::size_t attempts = kCodewordAttempts);

  Sequence sample(Rng& rng, bool* fell_back = nullptr) const;

  const Distribution& pu() const { return pu_; }
  const TypicalityParams& tp() const { return tp_; }
  const std::vector<std::size_t>& nearest_type() const { return nearest_; }
  /// Probability that one i.i.d. draw is typical.
  double acceptance() const { return acceptance_; }
  /// Probability that all attempts are rejected.
  double fallback_probability() const { return fallback_; }

 private:
  Distribution pu_;
  TypicalityParams tp_;
  std::size_t attempts_;
  std::vector<std::size_t> nearest_;
  double acceptance_ = 0.0, fallback_ = 0.0;
};

struct Codebook {
  std::size_t n = 0;
  std::uint64_t num_messages = 0;
  std::vector<Sequence> words;
  TypicalityParams tp;
  std::uint64_t seed = 0;
  std::size_t fallback_words = 0;

  double rate() const;
  std::span<const Symbol> word(std::uint64_t m) const;
};

Codebook generate_codebook(const EncoderSpec& enc, std::size_t n, double rate,
                           const TypicalityParams& tp, std::uint64_t seed,
                           std::uint64_t max_messages = kMaxExplicitMessages);

/// x_i ~ P(x | u_i) independently.
Sequence encode_word(std::span<const Symbol> u, const EncoderSpec& enc, Rng& rng);
Sequence encode(const Codebook& cb, const EncoderSpec& enc, std::uint64_t m, Rng& rng);

struct AttackStrategy {
  enum class Kind { silent, iid_symbol, codeword_aware, input_aware };
  enum class Target { uniform, fixed };

  Kind kind = Kind::silent;
  Target target = Target::uniform;
  std::uint64_t fixed_target = 0;
  std::vector<double> iid;  // over V
  /// P(v | a', a), row (a' * A + a), A = |U| (codeword_aware) or |X| (input_aware),
  /// a' the target's symbol and a Alice's.
  std::vector<double> kernel;

  static AttackStrategy silent() { return {}; }
  static AttackStrategy iid_symbol(std::vector<double> dist);
  static AttackStrategy codeword_aware(std::vector<double> v_given_uu, Target t = Target::uniform,
                                       std::uint64_t fixed = 0);
  static AttackStrategy input_aware(std::vector<double> v_given_xx, Target t = Target::uniform,
                                    std::uint64_t fixed = 0);

  bool targeted() const { return kind == Kind::codeword_aware || kind == Kind::input_aware; }
  void validate(const MacChannel& ch, const EncoderSpec& enc) const;
};

const char* to_string(AttackStrategy::Kind k);
AttackStrategy::Kind parse_attack_kind(const std::string& s);

/// Eve's sequence given Alice's codeword u and input x and the target codeword u_target
/// (unused unless targeted). input_aware re-encodes u_target with Eve's own draws.
Sequence attack_sequence(const AttackStrategy& s, const MacChannel& ch, const EncoderSpec& enc,
                         std::span<const Symbol> u, std::span<const Symbol> x,
                         std::span<const Symbol> u_target, Rng& rng);

struct AttackDraw {
  Sequence v;
  std::optional<std::uint64_t> target;
};

/// Picks the target per policy, then draws v^n. A fixed target equal to m is rejected.
AttackDraw run_attack(const AttackStrategy& s, const MacChannel& ch, const Codebook& cb,
                      const EncoderSpec& enc, std::uint64_t m, std::span<const Symbol> x,
                      Rng& rng);

/// Authenticate-or-decode against the reference kernel P(y | u, silence).
class TypicalityDecoder {
 public:
  TypicalityDecoder(const MacChannel& ch, const EncoderSpec& enc, const TypicalityParams& tp);

  bool matches(std::span<const Symbol> u, std::span<const Symbol> y) const;
  /// The unique matching message, or nullopt (intrusion) on zero or several matches.
  std::optional<std::uint64_t> decode(const Codebook& cb, std::span<const Symbol> y) const;

  const StochasticKernel& reference() const { return ref_; }
  const TypicalityParams& tp() const { return tp_; }

 private:
  StochasticKernel ref_;
  TypicalityParams tp_;
};

std::optional<std::uint64_t> decode(const Codebook& cb, const EncoderSpec& enc,
                                    const MacChannel& ch, std::span<const Symbol> y,
                                    const TypicalityParams& tp);

/// Probability that a codeword drawn from `sampler`, independently of y, is
/// conditionally typical with y. Depends on y only through its type; computed by
/// exact enumeration of joint (u, y) types. Not thread-safe (memoizes).
class ConfusionModel {
 public:
  ConfusionModel(const CodewordSampler& sampler, const StochasticKernel& reference);

  /// Natural log of the probability (-inf when zero).
  double log_q(const std::vector<std::size_t>& y_counts);
  double log_q(std::span<const Symbol> y);

 private:
  const CodewordSampler* sampler_;
  StochasticKernel ref_;
  std::vector<double> log_fact_;
  double log_norm_;  // log((1 - fallback) / acceptance)
  std::map<std::vector<std::size_t>, double> cache_;
};

enum class CodebookMode { explicit_words, ensemble };
const char* to_string(CodebookMode m);
CodebookMode parse_codebook_mode(const std::string& s);

struct TrialConfig {
  std::size_t n = 0;
  double rate = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  TypicalityParams tp;
  EncoderSpec encoder;
  MacChannel channel;
  AttackStrategy attack;
  CodebookMode mode = CodebookMode::explicit_words;
  std::uint64_t max_messages = kMaxExplicitMessages;

  void validate() const;
};

struct Tally {
  std::uint64_t trials = 0, correct = 0, wrong_message = 0, intrusion = 0;
  std::uint64_t target_hit = 0;  // subset of wrong_message: Bob output Eve's target

  Tally& operator+=(const Tally& o);
  bool operator==(const Tally&) const = default;
};

struct Estimate {
  double value = 0.0;
  double half_width = 0.0;  // 95% normal approximation
  bool operator==(const Estimate&) const = default;
};

Estimate proportion(std::uint64_t hits, std::uint64_t total);

/// Trials are bucketed by the realized v^n: all-silence counts as unattacked.
struct TrialReport {
  Tally unattacked, attacked;
  Estimate eps1, eps2;
  Estimate target_rate;           // attacked trials decoded as Eve's target
  Estimate attacked_intrusion;    // attacked trials declared intrusion
  Estimate unattacked_intrusion;
  std::uint64_t num_messages = 0;
  double delta = 0.0;
  std::size_t codebook_fallbacks = 0;
  CodebookMode mode = CodebookMode::explicit_words;

  bool operator==(const TrialReport&) const = default;
};

TrialReport run_trials(const TrialConfig& cfg, Execution exec = Execution::parallel);

}  // namespace macauth
