#include "macauth/coding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace macauth {

namespace {

constexpr std::uint64_t kCodebookStream = 1;
constexpr std::uint64_t kTrialStream = 2;
// Joint-type enumeration beyond this many leaves is refused (ensemble mode).
constexpr double kMaxEnumeration = 5e7;

bool within(double distance, const TypicalityParams& tp) { return distance <= tp.delta + kProbTol; }

// Calls fn(parts) for every composition of `total` into parts.size() non-negative parts.
void for_each_composition(std::size_t total, std::vector<std::size_t>& parts, std::size_t at,
                          const std::function<void()>& fn) {
  if (at + 1 == parts.size()) {
    parts[at] = total;
    fn();
    return;
  }
  for (std::size_t k = 0; k <= total; ++k) {
    parts[at] = k;
    for_each_composition(total - k, parts, at + 1, fn);
  }
}

double compositions(std::size_t total, std::size_t parts) {
  // C(total + parts - 1, parts - 1)
  double c = 1.0;
  for (std::size_t i = 1; i < parts; ++i) c = c * static_cast<double>(total + i) / static_cast<double>(i);
  return c;
}

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lf(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

// Largest-remainder rounding of n * p: the realizable type nearest to p in L1.
std::vector<std::size_t> rounded_type(const Distribution& p, std::size_t n) {
  const std::size_t k = p.size();
  std::vector<std::size_t> t(k);
  std::vector<std::pair<double, std::size_t>> rem(k);
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = p[i] * static_cast<double>(n);
    t[i] = static_cast<std::size_t>(std::floor(exact));
    used += t[i];
    rem[i] = {exact - static_cast<double>(t[i]), i};
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++t[rem[i % k].second];
  return t;
}

void check_row_stochastic(const std::vector<double>& m, std::size_t rows, std::size_t width,
                          const char* what) {
  if (m.size() != rows * width)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows * width) +
                                " entries, got " + std::to_string(m.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      const double v = m[r * width + c];
      if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative entry in row " + std::to_string(r));
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument(std::string(what) + ": row " + std::to_string(r) + " sums to " +
                                  std::to_string(s));
  }
}

}  // namespace

std::uint64_t message_count(std::size_t n, double rate) {
  if (!(rate > 0.0) || n == 0) throw std::invalid_argument("message_count: need n >= 1 and rate > 0");
  double bits = static_cast<double>(n) * rate;
  if (std::abs(bits - std::round(bits)) < 1e-9) bits = std::round(bits);
  if (bits > 62.0) throw std::invalid_argument("message_count: n * rate exceeds 62 bits");
  const auto m = static_cast<std::uint64_t>(std::floor(std::exp2(bits)));
  if (m < 2) throw std::invalid_argument("message_count: floor(2^(n*rate)) < 2");
  return m;
}

// ---------------------------------------------------------------------------

CodewordSampler::CodewordSampler(const Distribution& pu, const TypicalityParams& tp,
                                 std::size_t attempts)
    : pu_(pu), tp_(tp), attempts_(attempts), nearest_(rounded_type(pu, tp.n)) {
  if (tp.n == 0) throw std::invalid_argument("codebook: n must be positive");
  if (!within(type_distance(nearest_, tp.n, pu.mass()), tp))
    throw std::invalid_argument("codebook: no type of length " + std::to_string(tp.n) +
                                " is within delta = " + std::to_string(tp.delta) + " of P_U");
  if (compositions(tp.n, pu.size()) > kMaxEnumeration) {
    acceptance_ = std::numeric_limits<double>::quiet_NaN();
    fallback_ = 0.0;
    return;
  }
  const auto lf = log_factorials(tp.n);
  std::vector<std::size_t> t(pu.size());
  long double a = 0.0;
  for_each_composition(tp.n, t, 0, [&] {
    if (!within(type_distance(t, tp.n, pu.mass()), tp)) return;
    double l = lf[tp.n];
    for (std::size_t u = 0; u < t.size(); ++u) {
      if (t[u] == 0) continue;
      if (pu[u] == 0.0) return;
      l += static_cast<double>(t[u]) * std::log(pu[u]) - lf[t[u]];
    }
    a += std::exp(static_cast<long double>(l));
  });
  acceptance_ = static_cast<double>(std::min(a, 1.0L));
  fallback_ = acceptance_ >= 1.0 ? 0.0
                                 : std::exp(static_cast<double>(attempts_) * std::log1p(-acceptance_));
}

Sequence CodewordSampler::sample(Rng& rng, bool* fell_back) const {
  Sequence u(tp_.n);
  for (std::size_t attempt = 0; attempt < attempts_; ++attempt) {
    for (auto& s : u) s = rng.categorical(pu_.mass());
    if (is_typical(u, pu_, tp_)) {
      if (fell_back) *fell_back = false;
      return u;
    }
  }
  std::size_t i = 0;
  for (std::size_t s = 0; s < nearest_.size(); ++s)
    for (std::size_t c = 0; c < nearest_[s]; ++c) u[i++] = static_cast<Symbol>(s);
  for (std::size_t j = u.size(); j > 1; --j) std::swap(u[j - 1], u[rng.below(j)]);
  if (fell_back) *fell_back = true;
  return u;
}

double Codebook::rate() const { return std::log2(static_cast<double>(num_messages)) / static_cast<double>(n); }

std::span<const Symbol> Codebook::word(std::uint64_t m) const {
  if (m >= words.size()) throw std::out_of_range("codebook: message " + std::to_string(m) + " out of range");
  return words[m];
}

Codebook generate_codebook(const EncoderSpec& enc, std::size_t n, double rate,
                           const TypicalityParams& tp, std::uint64_t seed,
                           std::uint64_t max_messages) {
  if (tp.n != n) throw std::invalid_argument("codebook: typicality length != n");
  Codebook cb;
  cb.n = n;
  cb.num_messages = message_count(n, rate);
  if (cb.num_messages > max_messages)
    throw std::invalid_argument("codebook: " + std::to_string(cb.num_messages) +
                                " messages exceed the explicit limit " + std::to_string(max_messages));
  cb.tp = tp;
  cb.seed = seed;
  const CodewordSampler sampler(enc.pu, tp);
  Rng rng(derive_seed(seed, kCodebookStream));
  cb.words.reserve(cb.num_messages);
  for (std::uint64_t m = 0; m < cb.num_messages; ++m) {
    bool fb = false;
    cb.words.push_back(sampler.sample(rng, &fb));
    cb.fallback_words += fb;
  }
  return cb;
}

Sequence encode_word(std::span<const Symbol> u, const EncoderSpec& enc, Rng& rng) {
  Sequence x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] >= enc.u_size()) throw std::invalid_argument("encode: codeword symbol out of range");
    x[i] = rng.categorical(enc.px_given_u.row(u[i]));
  }
  return x;
}

Sequence encode(const Codebook& cb, const EncoderSpec& enc, std::uint64_t m, Rng& rng) {
  if (m >= cb.num_messages) throw std::out_of_range("encode: message " + std::to_string(m) + " out of range");
  return encode_word(cb.word(m), enc, rng);
}

// ---------------------------------------------------------------------------

AttackStrategy AttackStrategy::iid_symbol(std::vector<double> dist) {
  AttackStrategy s;
  s.kind = Kind::iid_symbol;
  s.iid = std::move(dist);
  return s;
}

AttackStrategy AttackStrategy::codeword_aware(std::vector<double> v_given_uu, Target t,
                                              std::uint64_t fixed) {
  AttackStrategy s;
  s.kind = Kind::codeword_aware;
  s.kernel = std::move(v_given_uu);
  s.target = t;
  s.fixed_target = fixed;
  return s;
}

AttackStrategy AttackStrategy::input_aware(std::vector<double> v_given_xx, Target t,
                                           std::uint64_t fixed) {
  AttackStrategy s = codeword_aware(std::move(v_given_xx), t, fixed);
  s.kind = Kind::input_aware;
  return s;
}

void AttackStrategy::validate(const MacChannel& ch, const EncoderSpec& enc) const {
  const std::size_t nv = ch.v_size();
  switch (kind) {
    case Kind::silent: break;
    case Kind::iid_symbol: check_row_stochastic(iid, 1, nv, "iid_symbol attack"); break;
    case Kind::codeword_aware:
      check_row_stochastic(kernel, enc.u_size() * enc.u_size(), nv, "codeword_aware attack");
      break;
    case Kind::input_aware:
      check_row_stochastic(kernel, ch.x_size() * ch.x_size(), nv, "input_aware attack");
      break;
  }
  if (target == Target::fixed && !targeted())
    throw std::invalid_argument("attack: a fixed target needs a codeword_aware or input_aware attack");
}

const char* to_string(AttackStrategy::Kind k) {
  switch (k) {
    case AttackStrategy::Kind::silent: return "silent";
    case AttackStrategy::Kind::iid_symbol: return "iid_symbol";
    case AttackStrategy::Kind::codeword_aware: return "codeword_aware";
    case AttackStrategy::Kind::input_aware: return "input_aware";
  }
  return "?";
}

AttackStrategy::Kind parse_attack_kind(const std::string& s) {
  for (auto k : {AttackStrategy::Kind::silent, AttackStrategy::Kind::iid_symbol,
                 AttackStrategy::Kind::codeword_aware, AttackStrategy::Kind::input_aware})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown attack kind '" + s + "'");
}

Sequence attack_sequence(const AttackStrategy& s, const MacChannel& ch, const EncoderSpec& enc,
                         std::span<const Symbol> u, std::span<const Symbol> x,
                         std::span<const Symbol> u_target, Rng& rng) {
  const std::size_t n = u.size(), nv = ch.v_size();
  Sequence v(n, static_cast<Symbol>(ch.silence()));
  switch (s.kind) {
    case AttackStrategy::Kind::silent: break;
    case AttackStrategy::Kind::iid_symbol:
      for (auto& sym : v) sym = rng.categorical(s.iid);
      break;
    case AttackStrategy::Kind::codeword_aware: {
      if (u_target.size() != n) throw std::invalid_argument("attack: target codeword missing");
      const std::size_t nu = enc.u_size();
      for (std::size_t i = 0; i < n; ++i)
        v[i] = rng.categorical({s.kernel.data() + (u_target[i] * nu + u[i]) * nv, nv});
      break;
    }
    case AttackStrategy::Kind::input_aware: {
      if (u_target.size() != n || x.size() != n)
        throw std::invalid_argument("attack: input_aware needs the target codeword and x^n");
      const auto xt = encode_word(u_target, enc, rng);
      const std::size_t nx = ch.x_size();
      for (std::size_t i = 0; i < n; ++i)
        v[i] = rng.categorical({s.kernel.data() + (xt[i] * nx + x[i]) * nv, nv});
      break;
    }
  }
  return v;
}

AttackDraw run_attack(const AttackStrategy& s, const MacChannel& ch, const Codebook& cb,
                      const EncoderSpec& enc, std::uint64_t m, std::span<const Symbol> x,
                      Rng& rng) {
  AttackDraw d;
  if (!s.targeted()) {
    d.v = attack_sequence(s, ch, enc, cb.word(m), x, {}, rng);
    return d;
  }
  std::uint64_t t = s.fixed_target;
  if (s.target == AttackStrategy::Target::fixed) {
    if (t == m) throw std::invalid_argument("attack: fixed target equals the transmitted message");
  } else {
    t = rng.below(cb.num_messages - 1);
    if (t >= m) ++t;
  }
  d.target = t;
  d.v = attack_sequence(s, ch, enc, cb.word(m), x, cb.word(t), rng);
  return d;
}

// ---------------------------------------------------------------------------

TypicalityDecoder::TypicalityDecoder(const MacChannel& ch, const EncoderSpec& enc,
                                     const TypicalityParams& tp)
    : ref_(effective_channel_silent(ch, enc)), tp_(tp) {}

bool TypicalityDecoder::matches(std::span<const Symbol> u, std::span<const Symbol> y) const {
  return is_cond_typical(y, u, ref_, tp_);
}

std::optional<std::uint64_t> TypicalityDecoder::decode(const Codebook& cb,
                                                       std::span<const Symbol> y) const {
  if (y.size() != cb.n) throw std::invalid_argument("decode: length != n");
  std::optional<std::uint64_t> found;
  for (std::uint64_t m = 0; m < cb.num_messages; ++m) {
    if (!matches(cb.word(m), y)) continue;
    if (found) return std::nullopt;
    found = m;
  }
  return found;
}

std::optional<std::uint64_t> decode(const Codebook& cb, const EncoderSpec& enc,
                                    const MacChannel& ch, std::span<const Symbol> y,
                                    const TypicalityParams& tp) {
  return TypicalityDecoder(ch, enc, tp).decode(cb, y);
}

// ---------------------------------------------------------------------------

ConfusionModel::ConfusionModel(const CodewordSampler& sampler, const StochasticKernel& reference)
    : sampler_(&sampler), ref_(reference), log_fact_(log_factorials(sampler.tp().n)) {
  if (std::isnan(sampler.acceptance()))
    throw std::invalid_argument("ensemble: codeword type enumeration too large");
  const double a = sampler.acceptance(), f = sampler.fallback_probability();
  log_norm_ = a > 0.0 ? std::log1p(-f) - std::log(a) : -std::numeric_limits<double>::infinity();
}

double ConfusionModel::log_q(std::span<const Symbol> y) {
  return log_q(empirical_type(y, ref_.output_size()).counts);
}

double ConfusionModel::log_q(const std::vector<std::size_t>& s) {
  if (auto it = cache_.find(s); it != cache_.end()) return it->second;
  const std::size_t nu = ref_.input_size(), ny = ref_.output_size(), n = sampler_->tp().n;
  const auto& tp = sampler_->tp();
  const auto& pu = sampler_->pu();
  const auto& star = sampler_->nearest_type();

  double leaves = 1.0;
  for (std::size_t y = 0; y < ny; ++y) leaves *= compositions(s[y], nu);
  if (leaves > kMaxEnumeration) throw std::invalid_argument("ensemble: joint type enumeration too large");

  std::vector<double> log_pu(nu);
  for (std::size_t u = 0; u < nu; ++u) log_pu[u] = pu[u] > 0.0 ? std::log(pu[u]) : -INFINITY;
  double log_star = log_fact_[n];
  for (std::size_t u = 0; u < nu; ++u) log_star -= log_fact_[star[u]];
  const double f = sampler_->fallback_probability();
  const double log_f = f > 0.0 ? std::log(f) : -INFINITY;

  long double mx = -INFINITY, sum = 0.0L;
  auto add = [&](double l) {
    if (l == -INFINITY) return;
    if (l > mx) {
      sum = sum * std::exp(mx - static_cast<long double>(l)) + 1.0L;
      mx = l;
    } else {
      sum += std::exp(static_cast<long double>(l) - mx);
    }
  };

  std::vector<std::size_t> joint(nu * ny, 0), t(nu);
  std::vector<std::vector<std::size_t>> cols(ny, std::vector<std::size_t>(nu));
  // Recurse over y: column y of the joint type is a composition of s[y].
  std::function<void(std::size_t, double)> rec = [&](std::size_t y, double acc) {
    if (y == ny) {
      std::fill(t.begin(), t.end(), 0);
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t yy = 0; yy < ny; ++yy) t[u] += joint[u * ny + yy];
      if (!within(cond_type_distance(joint, n, ref_), tp)) return;
      if (within(type_distance(t, n, pu.mass()), tp)) {
        double l = log_norm_ + acc;
        for (std::size_t u = 0; u < nu; ++u)
          if (t[u]) l += static_cast<double>(t[u]) * log_pu[u];
        add(l);
      }
      if (t == star) add(log_f + acc - log_star);
      return;
    }
    const double base = acc + log_fact_[s[y]];
    auto& col = cols[y];
    for_each_composition(s[y], col, 0, [&] {
      double l = base;
      for (std::size_t u = 0; u < nu; ++u) {
        joint[u * ny + y] = col[u];
        l -= log_fact_[col[u]];
      }
      rec(y + 1, l);
    });
  };
  rec(0, 0.0);
  const double lq = sum > 0.0L ? static_cast<double>(mx + std::log(sum)) : -INFINITY;
  cache_.emplace(s, std::min(lq, 0.0));
  return std::min(lq, 0.0);
}

// ---------------------------------------------------------------------------

const char* to_string(CodebookMode m) {
  return m == CodebookMode::ensemble ? "ensemble" : "explicit";
}

CodebookMode parse_codebook_mode(const std::string& s) {
  if (s == "explicit") return CodebookMode::explicit_words;
  if (s == "ensemble") return CodebookMode::ensemble;
  throw std::invalid_argument("unknown codebook mode '" + s + "' (expected explicit|ensemble)");
}

void TrialConfig::validate() const {
  if (trials == 0) throw std::invalid_argument("simulate: trials must be >= 1");
  if (n == 0 || tp.n != n) throw std::invalid_argument("simulate: typicality length must equal n");
  if (!(tp.delta > 0.0)) throw std::invalid_argument("simulate: delta must be positive");
  encoder.validate_against(channel);
  attack.validate(channel, encoder);
  const auto m = message_count(n, rate);
  if (mode == CodebookMode::explicit_words && m > max_messages)
    throw std::invalid_argument("simulate: " + std::to_string(m) + " codewords exceed the explicit limit " +
                                std::to_string(max_messages) + " (use the ensemble codebook mode)");
  if (attack.target == AttackStrategy::Target::fixed && attack.fixed_target >= m)
    throw std::invalid_argument("simulate: fixed target " + std::to_string(attack.fixed_target) +
                                " out of range");
}

Tally& Tally::operator+=(const Tally& o) {
  trials += o.trials;
  correct += o.correct;
  wrong_message += o.wrong_message;
  intrusion += o.intrusion;
  target_hit += o.target_hit;
  return *this;
}

Estimate proportion(std::uint64_t hits, std::uint64_t total) {
  if (total == 0) return {};
  const double p = static_cast<double>(hits) / static_cast<double>(total);
  return {p, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(total))};
}

namespace {

enum class Outcome : std::uint8_t { correct, target, wrong, intrusion };

struct TrialResult {
  bool attacked = false;
  Outcome outcome = Outcome::intrusion;
};

bool any_active(const Sequence& v, std::size_t silence) {
  return std::any_of(v.begin(), v.end(), [&](Symbol s) { return s != silence; });
}

// Outcome when the remaining `others` codewords are drawn independently of y, each
// matching with probability exp(lq): K ~ Binomial(others, q) extra matches.
Outcome ensemble_outcome(bool a, bool b, double lq, std::uint64_t others, double r) {
  double p0 = 1.0, p1 = 0.0;
  if (others > 0) {
    const double q = std::exp(lq), l = std::log1p(-q), k = static_cast<double>(others);
    p0 = std::exp(k * l);
    p1 = others == 1 ? q : k * q * std::exp((k - 1.0) * l);
  }
  if (a && b) return Outcome::intrusion;
  if (a) return r < p0 ? Outcome::correct : Outcome::intrusion;
  if (b) return r < p0 ? Outcome::target : Outcome::intrusion;
  return r < p1 ? Outcome::wrong : Outcome::intrusion;
}

}  // namespace

TrialReport run_trials(const TrialConfig& cfg, Execution exec) {
  cfg.validate();
  const auto& ch = cfg.channel;
  const auto& enc = cfg.encoder;
  const auto& atk = cfg.attack;
  const std::uint64_t msgs = message_count(cfg.n, cfg.rate);
  const TypicalityDecoder decoder(ch, enc, cfg.tp);

  TrialReport rep;
  rep.num_messages = msgs;
  rep.delta = cfg.tp.delta;
  rep.mode = cfg.mode;

  std::vector<TrialResult> results(cfg.trials);
  const bool fixed = atk.target == AttackStrategy::Target::fixed;
  auto draw_message = [&](Rng& rng) {
    if (!fixed) return rng.below(msgs);
    const auto m = rng.below(msgs - 1);
    return m >= atk.fixed_target ? m + 1 : m;
  };

  if (cfg.mode == CodebookMode::explicit_words) {
    const auto cb = generate_codebook(enc, cfg.n, cfg.rate, cfg.tp, cfg.seed, cfg.max_messages);
    rep.codebook_fallbacks = cb.fallback_words;
    for_each_index(cfg.trials, exec, [&](std::size_t t) {
      Rng rng(derive_seed(cfg.seed, kTrialStream, t));
      const auto m = draw_message(rng);
      const auto x = encode(cb, enc, m, rng);
      const auto d = run_attack(atk, ch, cb, enc, m, x, rng);
      const auto y = sample_output(ch, x, d.v, rng);
      const auto got = decoder.decode(cb, y);
      TrialResult& res = results[t];
      res.attacked = any_active(d.v, ch.silence());
      if (!got) res.outcome = Outcome::intrusion;
      else if (*got == m) res.outcome = Outcome::correct;
      else if (d.target && *got == *d.target) res.outcome = Outcome::target;
      else res.outcome = Outcome::wrong;
    });
  } else {
    const CodewordSampler sampler(enc.pu, cfg.tp);
    std::vector<ConfusionModel> models(static_cast<std::size_t>(max_threads()),
                                       ConfusionModel(sampler, decoder.reference()));
    const std::uint64_t others = msgs - 1 - (atk.targeted() ? 1 : 0);
    for_each_index(cfg.trials, exec, [&](std::size_t t) {
      Rng rng(derive_seed(cfg.seed, kTrialStream, t));
      const auto u = sampler.sample(rng);
      const auto ut = atk.targeted() ? sampler.sample(rng) : Sequence{};
      const auto x = encode_word(u, enc, rng);
      const auto v = attack_sequence(atk, ch, enc, u, x, ut, rng);
      const auto y = sample_output(ch, x, v, rng);
      const bool a = decoder.matches(u, y);
      const bool b = atk.targeted() && decoder.matches(ut, y);
      const double lq = models[static_cast<std::size_t>(thread_id())].log_q(y);
      TrialResult& res = results[t];
      res.attacked = any_active(v, ch.silence());
      res.outcome = ensemble_outcome(a, b, lq, others, rng.uniform());
    });
  }

  for (const auto& r : results) {
    Tally& tl = r.attacked ? rep.attacked : rep.unattacked;
    ++tl.trials;
    switch (r.outcome) {
      case Outcome::correct: ++tl.correct; break;
      case Outcome::target: ++tl.target_hit; ++tl.wrong_message; break;
      case Outcome::wrong: ++tl.wrong_message; break;
      case Outcome::intrusion: ++tl.intrusion; break;
    }
  }
  const auto& u = rep.unattacked;
  const auto& a = rep.attacked;
  rep.eps1 = proportion(u.trials - u.correct, u.trials);
  rep.eps2 = proportion(a.wrong_message, a.trials);
  rep.target_rate = proportion(a.target_hit, a.trials);
  rep.attacked_intrusion = proportion(a.intrusion, a.trials);
  rep.unattacked_intrusion = proportion(u.intrusion, u.trials);
  return rep;
}

}  // namespace macauth
