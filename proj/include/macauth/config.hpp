#pragma once

// Experiment configuration: a line-oriented `key = value` text format.
//
//   # comment
//   channel.x_size = 2
//   channel.law = [            # Y rows; columns (x, v): all x for silence first,
//     0.9 0.1 0.1 0 0 0.9      # then all x for each remaining v
//     ...
//   ]
//
// Matrices are column-stochastic with columns = conditioning inputs. Lists are
// whitespace- or comma-separated. Keys are documented in docs/config.md.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "macauth/analyzer.hpp"
#include "macauth/channel.hpp"
#include "macauth/coding.hpp"

namespace macauth {

using Matrix = std::vector<std::vector<double>>;  // row-major, rows of equal width

struct ChannelBlock {
  std::size_t x_size = 0, v_size = 0, silence = 0;
  Matrix law;  // |Y| x (|X| |V|), external column order
  bool operator==(const ChannelBlock&) const = default;

  MacChannel build() const;
};

struct EncoderBlock {
  std::size_t u_size = 0;
  std::vector<double> pu;
  Matrix px_given_u;  // |X| x |U|
  bool operator==(const EncoderBlock&) const = default;

  EncoderSpec build() const;
};

struct AnalyzeBlock {
  std::vector<CouplingMode> modes{CouplingMode::general, CouplingMode::product};
  std::optional<double> rate;  // defaults to I(Y;U|silence) of the encoder
  bool operator==(const AnalyzeBlock&) const = default;
};

struct RateBoundBlock {
  std::size_t u_size_max = 2;
  std::size_t restarts = 64;
  std::uint64_t seed = 1;
  bool operator==(const RateBoundBlock&) const = default;
};

struct AttackBlock {
  AttackStrategy::Kind kind = AttackStrategy::Kind::silent;
  std::vector<double> iid;
  std::optional<Matrix> kernel;  // |V| x (A * A), column a' * A + a
  bool synthesize = false;       // kernel from the analyzer's general-mode witness
  AttackStrategy::Target target = AttackStrategy::Target::uniform;
  std::uint64_t fixed_target = 0;
  bool operator==(const AttackBlock&) const = default;
};

struct SimulateBlock {
  std::vector<std::size_t> n;
  std::vector<double> rate;           // absolute rates (bits per symbol)
  std::vector<double> rate_fraction;  // or fractions of I(Y;U|silence)
  std::size_t trials = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;  // fixed delta for every n
  double delta_scale = 1.0;     // else delta = delta_scale * n^(-1/3)
  CodebookMode codebook = CodebookMode::explicit_words;
  std::uint64_t max_messages = kMaxExplicitMessages;
  std::vector<std::string> attacks{"silent"};
  bool operator==(const SimulateBlock&) const = default;
};

struct ExperimentConfig {
  std::optional<ChannelBlock> channel;
  std::optional<EncoderBlock> encoder;
  AnalyzeBlock analyze;
  RateBoundBlock rate_bound;
  std::optional<SimulateBlock> simulate;
  std::map<std::string, AttackBlock> attacks;
  bool operator==(const ExperimentConfig&) const = default;

  MacChannel build_channel() const;
  EncoderSpec build_encoder() const;
  AttackStrategy build_attack(const std::string& name, const MacChannel& ch,
                              const EncoderSpec& enc) const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates; errors name the line and key (and row/column for matrices).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text: fixed key order, shortest round-trip numbers.
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical text, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace macauth
