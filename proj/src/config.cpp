#include "macauth/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace macauth {

namespace {

struct Entry {
  std::size_t line = 0;
  std::string scalar;  // raw text when not a matrix
  std::optional<std::vector<std::pair<std::size_t, std::string>>> rows;  // (line, text)
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& key, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + msg);
}

double to_double(const std::string& tok, std::size_t line, const std::string& key) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) fail(line, key, "bad number '" + tok + "'");
  return v;
}

std::uint64_t to_uint(const std::string& tok, std::size_t line, const std::string& key) {
  std::uint64_t v = 0;
  const auto* end = tok.data() + tok.size();
  const auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || p != end) fail(line, key, "bad non-negative integer '" + tok + "'");
  return v;
}

class Reader {
 public:
  explicit Reader(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t no = 0;
    std::string open_key;
    while (std::getline(in, raw)) {
      ++no;
      std::string line = raw.substr(0, raw.find('#'));
      line = trim(line);
      if (!open_key.empty()) {
        auto& rows = *entries_[open_key].rows;
        const auto close = line.find(']');
        std::string body = close == std::string::npos ? line : line.substr(0, close);
        add_rows(rows, no, body);
        if (close != std::string::npos) {
          if (!trim(line.substr(close + 1)).empty()) fail(no, open_key, "text after ']'");
          open_key.clear();
        }
        continue;
      }
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(no) + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(no) + ": empty key");
      if (entries_.count(key)) fail(no, key, "duplicate key (first set on line " + std::to_string(entries_[key].line) + ")");
      Entry e;
      e.line = no;
      if (!value.empty() && value[0] == '[') {
        e.rows.emplace();
        const auto close = value.find(']');
        add_rows(*e.rows, no, value.substr(1, close == std::string::npos ? std::string::npos : close - 1));
        if (close == std::string::npos) open_key = key;
        else if (!trim(value.substr(close + 1)).empty()) fail(no, key, "text after ']'");
      } else {
        e.scalar = value;
      }
      entries_[key] = std::move(e);
    }
    if (!open_key.empty()) fail(entries_[open_key].line, open_key, "matrix is missing ']'");
  }

  bool has(const std::string& k) const { return entries_.count(k) > 0; }
  bool has_prefix(const std::string& p) const {
    for (const auto& [k, e] : entries_)
      if (k.rfind(p, 0) == 0) return true;
    return false;
  }

  const Entry& get(const std::string& k) {
    used_.insert(k);
    return entries_.at(k);
  }
  const Entry& need(const std::string& k) {
    if (!has(k)) throw ConfigError("missing key " + k);
    return get(k);
  }

  std::string scalar(const std::string& k) {
    const auto& e = need(k);
    if (e.rows) fail(e.line, k, "expected a scalar, got a matrix");
    if (e.scalar.empty()) fail(e.line, k, "empty value");
    return e.scalar;
  }
  double real(const std::string& k) {
    const auto s = scalar(k);
    return to_double(s, entries_.at(k).line, k);
  }
  std::uint64_t uint(const std::string& k) {
    const auto s = scalar(k);
    return to_uint(s, entries_.at(k).line, k);
  }
  std::vector<std::string> words(const std::string& k) {
    const auto& e = need(k);
    if (e.rows) fail(e.line, k, "expected a list, got a matrix");
    return split_tokens(e.scalar);
  }
  std::vector<double> reals(const std::string& k) {
    std::vector<double> out;
    for (const auto& t : words(k)) out.push_back(to_double(t, entries_.at(k).line, k));
    if (out.empty()) fail(entries_.at(k).line, k, "empty list");
    return out;
  }
  Matrix matrix(const std::string& k) {
    const auto& e = need(k);
    if (!e.rows) fail(e.line, k, "expected a matrix '[ ... ]'");
    Matrix m;
    for (const auto& [no, text] : *e.rows) {
      std::vector<double> row;
      for (const auto& t : split_tokens(text)) row.push_back(to_double(t, no, k));
      if (!m.empty() && row.size() != m[0].size())
        fail(no, k, "row " + std::to_string(m.size()) + " has " + std::to_string(row.size()) +
                        " entries, expected " + std::to_string(m[0].size()));
      m.push_back(std::move(row));
    }
    if (m.empty() || m[0].empty()) fail(e.line, k, "empty matrix");
    return m;
  }
  std::size_t line(const std::string& k) const { return entries_.at(k).line; }

  void reject_unused() const {
    for (const auto& [k, e] : entries_)
      if (!used_.count(k)) fail(e.line, k, "unknown key");
  }

  std::set<std::string> attack_names() const {
    std::set<std::string> names;
    for (const auto& [k, e] : entries_) {
      if (k.rfind("attack.", 0) != 0) continue;
      const auto dot = k.find('.', 7);
      if (dot == std::string::npos || dot == 7) fail(e.line, k, "expected attack.<name>.<field>");
      names.insert(k.substr(7, dot - 7));
    }
    return names;
  }

 private:
  static void add_rows(std::vector<std::pair<std::size_t, std::string>>& rows, std::size_t no,
                       const std::string& body) {
    std::string part;
    std::istringstream ss(body);
    while (std::getline(ss, part, ';'))
      if (!trim(part).empty()) rows.emplace_back(no, trim(part));
  }

  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
};

// Column sums of a matrix whose columns are conditional laws.
void check_columns(const Matrix& m, const std::string& key, std::size_t line, double tol = 1e-9) {
  for (std::size_t c = 0; c < m[0].size(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (m[r][c] < 0.0)
        fail(line, key, "negative entry at row " + std::to_string(r) + ", column " + std::to_string(c));
      s += m[r][c];
    }
    if (std::abs(s - 1.0) > tol)
      fail(line, key, "column " + std::to_string(c) + " sums to " + format_double(s) + ", expected 1");
  }
}

void check_distribution(const std::vector<double>& p, const std::string& key, std::size_t line) {
  Matrix col;
  for (double v : p) col.push_back({v});
  if (col.empty()) fail(line, key, "empty distribution");
  check_columns(col, key, line);
}

std::vector<double> transpose_flat(const Matrix& m) {
  // |V| x C column-stochastic -> C rows of |V| entries.
  std::vector<double> out(m.size() * m[0].size());
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < m[0].size(); ++c) out[c * m.size() + r] = m[r][c];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

void emit_matrix(std::ostream& out, const std::string& key, const Matrix& m) {
  out << key << " = [\n";
  for (const auto& row : m) out << "  " << join(row) << "\n";
  out << "]\n";
}

const char* target_name(AttackStrategy::Target t) {
  return t == AttackStrategy::Target::fixed ? "fixed" : "uniform";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

MacChannel ChannelBlock::build() const {
  return MacChannel::from_column_matrix(x_size, v_size, silence, law);
}

EncoderSpec EncoderBlock::build() const {
  std::vector<std::vector<double>> rows(u_size, std::vector<double>(px_given_u.size()));
  for (std::size_t x = 0; x < px_given_u.size(); ++x)
    for (std::size_t u = 0; u < u_size; ++u) rows[u][x] = px_given_u[x][u];
  return {Distribution(pu, 1e-9), StochasticKernel::from_rows(rows, 1e-9)};
}

MacChannel ExperimentConfig::build_channel() const {
  if (!channel) throw ConfigError("config has no channel block");
  return channel->build();
}

EncoderSpec ExperimentConfig::build_encoder() const {
  if (!encoder) throw ConfigError("config has no encoder block");
  return encoder->build();
}

AttackStrategy ExperimentConfig::build_attack(const std::string& name, const MacChannel& ch,
                                              const EncoderSpec& enc) const {
  const auto it = attacks.find(name);
  if (it == attacks.end()) {
    if (name == "silent") return AttackStrategy::silent();
    throw ConfigError("unknown attack '" + name + "'");
  }
  const AttackBlock& a = it->second;
  using K = AttackStrategy::Kind;
  switch (a.kind) {
    case K::silent: return AttackStrategy::silent();
    case K::iid_symbol: return AttackStrategy::iid_symbol(a.iid);
    case K::codeword_aware:
    case K::input_aware: break;
  }
  std::vector<double> kernel;
  if (a.synthesize) {
    const auto rep = simulatability_lp(ch, enc, CouplingMode::general);
    if (!rep.feasible)
      throw ConfigError("attack '" + name + "': encoder is not simulatable (residual " +
                        format_double(rep.residual) + "), nothing to synthesize");
    const auto k = synthesize_attack(ch, enc, rep);
    if (a.kind == K::codeword_aware) {
      kernel = k.v_given_uu;
    } else {
      if (!k.v_given_xx)
        throw ConfigError("attack '" + name + "': input-aware form needs a deterministic encoder");
      kernel = *k.v_given_xx;
    }
  } else {
    kernel = transpose_flat(*a.kernel);
  }
  auto s = a.kind == K::codeword_aware ? AttackStrategy::codeword_aware(kernel, a.target, a.fixed_target)
                                       : AttackStrategy::input_aware(kernel, a.target, a.fixed_target);
  s.validate(ch, enc);
  return s;
}

ExperimentConfig parse_config(const std::string& text) {
  Reader r(text);
  ExperimentConfig cfg;

  if (r.has_prefix("channel.")) {
    ChannelBlock c;
    c.x_size = r.uint("channel.x_size");
    c.v_size = r.uint("channel.v_size");
    c.silence = r.uint("channel.silence");
    c.law = r.matrix("channel.law");
    if (c.x_size == 0 || c.v_size == 0) fail(r.line("channel.x_size"), "channel", "alphabet sizes must be positive");
    if (c.silence >= c.v_size)
      fail(r.line("channel.silence"), "channel.silence",
           "index " + std::to_string(c.silence) + " out of range for v_size " + std::to_string(c.v_size));
    if (c.law[0].size() != c.x_size * c.v_size)
      fail(r.line("channel.law"), "channel.law",
           "expected " + std::to_string(c.x_size * c.v_size) + " columns (x_size * v_size), got " +
               std::to_string(c.law[0].size()));
    check_columns(c.law, "channel.law", r.line("channel.law"));
    cfg.channel = std::move(c);
  }

  if (r.has_prefix("encoder.")) {
    EncoderBlock e;
    e.u_size = r.uint("encoder.u_size");
    e.pu = r.reals("encoder.pu");
    e.px_given_u = r.matrix("encoder.px_given_u");
    if (e.u_size == 0) fail(r.line("encoder.u_size"), "encoder.u_size", "must be positive");
    if (e.pu.size() != e.u_size)
      fail(r.line("encoder.pu"), "encoder.pu", "expected " + std::to_string(e.u_size) + " entries");
    check_distribution(e.pu, "encoder.pu", r.line("encoder.pu"));
    if (e.px_given_u[0].size() != e.u_size)
      fail(r.line("encoder.px_given_u"), "encoder.px_given_u", "expected " + std::to_string(e.u_size) + " columns (one per u)");
    if (cfg.channel && e.px_given_u.size() != cfg.channel->x_size)
      fail(r.line("encoder.px_given_u"), "encoder.px_given_u",
           "expected " + std::to_string(cfg.channel->x_size) + " rows (channel x_size)");
    check_columns(e.px_given_u, "encoder.px_given_u", r.line("encoder.px_given_u"));
    cfg.encoder = std::move(e);
  }

  if (r.has("analyze.modes")) {
    cfg.analyze.modes.clear();
    for (const auto& w : r.words("analyze.modes")) {
      try {
        cfg.analyze.modes.push_back(parse_coupling_mode(w));
      } catch (const std::exception& ex) {
        fail(r.line("analyze.modes"), "analyze.modes", ex.what());
      }
    }
    if (cfg.analyze.modes.empty()) fail(r.line("analyze.modes"), "analyze.modes", "empty list");
  }
  if (r.has("analyze.rate")) {
    cfg.analyze.rate = r.real("analyze.rate");
    if (*cfg.analyze.rate < 0.0) fail(r.line("analyze.rate"), "analyze.rate", "must be >= 0");
  }

  if (r.has("rate_bound.u_size_max")) cfg.rate_bound.u_size_max = r.uint("rate_bound.u_size_max");
  if (r.has("rate_bound.restarts")) cfg.rate_bound.restarts = r.uint("rate_bound.restarts");
  if (r.has("rate_bound.seed")) cfg.rate_bound.seed = r.uint("rate_bound.seed");
  if (cfg.rate_bound.u_size_max == 0) fail(r.line("rate_bound.u_size_max"), "rate_bound.u_size_max", "must be >= 1");
  if (cfg.rate_bound.restarts == 0) fail(r.line("rate_bound.restarts"), "rate_bound.restarts", "must be >= 1");

  for (const auto& name : r.attack_names()) {
    const std::string p = "attack." + name + ".";
    AttackBlock a;
    try {
      a.kind = parse_attack_kind(r.scalar(p + "kind"));
    } catch (const std::invalid_argument& ex) {
      fail(r.line(p + "kind"), p + "kind", ex.what());
    }
    using K = AttackStrategy::Kind;
    if (a.kind == K::iid_symbol) {
      a.iid = r.reals(p + "iid");
      if (cfg.channel && a.iid.size() != cfg.channel->v_size)
        fail(r.line(p + "iid"), p + "iid", "expected " + std::to_string(cfg.channel->v_size) + " entries");
      check_distribution(a.iid, p + "iid", r.line(p + "iid"));
    }
    if (a.kind == K::codeword_aware || a.kind == K::input_aware) {
      const auto& e = r.need(p + "kernel");
      if (!e.rows && trim(e.scalar) == "synthesize") {
        a.synthesize = true;
      } else {
        a.kernel = r.matrix(p + "kernel");
        check_columns(*a.kernel, p + "kernel", r.line(p + "kernel"));
      }
      if (r.has(p + "target")) {
        const auto t = r.scalar(p + "target");
        if (t == "fixed") a.target = AttackStrategy::Target::fixed;
        else if (t != "uniform") fail(r.line(p + "target"), p + "target", "expected uniform|fixed");
      }
      if (a.target == AttackStrategy::Target::fixed) a.fixed_target = r.uint(p + "fixed_target");
    }
    cfg.attacks[name] = std::move(a);
  }

  if (r.has_prefix("simulate.")) {
    SimulateBlock s;
    s.n.clear();
    for (const auto& w : r.words("simulate.n")) s.n.push_back(to_uint(w, r.line("simulate.n"), "simulate.n"));
    if (s.n.empty()) fail(r.line("simulate.n"), "simulate.n", "empty list");
    for (auto n : s.n)
      if (n == 0) fail(r.line("simulate.n"), "simulate.n", "block lengths must be positive");
    if (r.has("simulate.rate")) s.rate = r.reals("simulate.rate");
    if (r.has("simulate.rate_fraction")) s.rate_fraction = r.reals("simulate.rate_fraction");
    if (s.rate.empty() == s.rate_fraction.empty())
      throw ConfigError("simulate: set exactly one of simulate.rate and simulate.rate_fraction");
    for (double x : s.rate)
      if (!(x > 0.0)) fail(r.line("simulate.rate"), "simulate.rate", "rates must be positive");
    for (double x : s.rate_fraction)
      if (!(x > 0.0)) fail(r.line("simulate.rate_fraction"), "simulate.rate_fraction", "fractions must be positive");
    s.trials = r.uint("simulate.trials");
    if (s.trials == 0) fail(r.line("simulate.trials"), "simulate.trials", "must be >= 1");
    if (!r.has("simulate.seed")) throw ConfigError("simulate: simulate.seed is mandatory");
    s.seed = r.uint("simulate.seed");
    if (r.has("simulate.delta")) {
      s.delta = r.real("simulate.delta");
      if (!(*s.delta > 0.0)) fail(r.line("simulate.delta"), "simulate.delta", "must be positive");
    }
    if (r.has("simulate.delta_scale")) {
      s.delta_scale = r.real("simulate.delta_scale");
      if (!(s.delta_scale > 0.0)) fail(r.line("simulate.delta_scale"), "simulate.delta_scale", "must be positive");
    }
    if (r.has("simulate.codebook")) {
      try {
        s.codebook = parse_codebook_mode(r.scalar("simulate.codebook"));
      } catch (const std::invalid_argument& ex) {
        fail(r.line("simulate.codebook"), "simulate.codebook", ex.what());
      }
    }
    if (r.has("simulate.max_messages")) s.max_messages = r.uint("simulate.max_messages");
    if (r.has("simulate.attacks")) s.attacks = r.words("simulate.attacks");
    if (s.attacks.empty()) fail(r.line("simulate.attacks"), "simulate.attacks", "empty list");
    for (const auto& a : s.attacks)
      if (a != "silent" && !cfg.attacks.count(a))
        fail(r.line("simulate.attacks"), "simulate.attacks", "attack '" + a + "' is not defined");
    cfg.simulate = std::move(s);
  }

  r.reject_unused();
  // Semantic checks that need the built objects (e.g. positive-entry encoders).
  if (cfg.channel) {
    try {
      (void)cfg.build_channel();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("channel: ") + ex.what());
    }
  }
  if (cfg.encoder) {
    try {
      const auto enc = cfg.build_encoder();
      if (cfg.channel) enc.validate_against(cfg.build_channel());
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string("encoder: ") + ex.what());
    }
  }
  if (cfg.channel) {
    for (const auto& [name, a] : cfg.attacks) {
      const std::size_t nv = cfg.channel->v_size;
      if (!a.kernel) continue;
      const std::size_t alpha = a.kind == AttackStrategy::Kind::input_aware
                                    ? cfg.channel->x_size
                                    : (cfg.encoder ? cfg.encoder->u_size : 0);
      const std::string key = "attack." + name + ".kernel";
      if (a.kernel->size() != nv)
        throw ConfigError(key + ": expected " + std::to_string(nv) + " rows (v_size)");
      if (alpha && (*a.kernel)[0].size() != alpha * alpha)
        throw ConfigError(key + ": expected " + std::to_string(alpha * alpha) + " columns");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  if (cfg.channel) {
    const auto& c = *cfg.channel;
    out << "channel.x_size = " << c.x_size << "\n"
        << "channel.v_size = " << c.v_size << "\n"
        << "channel.silence = " << c.silence << "\n";
    emit_matrix(out, "channel.law", c.law);
  }
  if (cfg.encoder) {
    const auto& e = *cfg.encoder;
    out << "encoder.u_size = " << e.u_size << "\n"
        << "encoder.pu = " << join(e.pu) << "\n";
    emit_matrix(out, "encoder.px_given_u", e.px_given_u);
  }
  out << "analyze.modes =";
  for (auto m : cfg.analyze.modes) out << " " << to_string(m);
  out << "\n";
  if (cfg.analyze.rate) out << "analyze.rate = " << format_double(*cfg.analyze.rate) << "\n";
  out << "rate_bound.u_size_max = " << cfg.rate_bound.u_size_max << "\n"
      << "rate_bound.restarts = " << cfg.rate_bound.restarts << "\n"
      << "rate_bound.seed = " << cfg.rate_bound.seed << "\n";
  for (const auto& [name, a] : cfg.attacks) {
    const std::string p = "attack." + name + ".";
    out << p << "kind = " << to_string(a.kind) << "\n";
    if (a.kind == AttackStrategy::Kind::iid_symbol) out << p << "iid = " << join(a.iid) << "\n";
    if (a.synthesize) out << p << "kernel = synthesize\n";
    else if (a.kernel) emit_matrix(out, p + "kernel", *a.kernel);
    if (a.kind == AttackStrategy::Kind::codeword_aware || a.kind == AttackStrategy::Kind::input_aware) {
      out << p << "target = " << target_name(a.target) << "\n";
      if (a.target == AttackStrategy::Target::fixed) out << p << "fixed_target = " << a.fixed_target << "\n";
    }
  }
  if (cfg.simulate) {
    const auto& s = *cfg.simulate;
    out << "simulate.n =";
    for (auto n : s.n) out << " " << n;
    out << "\n";
    if (!s.rate.empty()) out << "simulate.rate = " << join(s.rate) << "\n";
    if (!s.rate_fraction.empty()) out << "simulate.rate_fraction = " << join(s.rate_fraction) << "\n";
    out << "simulate.trials = " << s.trials << "\n";
    if (s.seed) out << "simulate.seed = " << *s.seed << "\n";
    if (s.delta) out << "simulate.delta = " << format_double(*s.delta) << "\n";
    out << "simulate.delta_scale = " << format_double(s.delta_scale) << "\n"
        << "simulate.codebook = " << to_string(s.codebook) << "\n"
        << "simulate.max_messages = " << s.max_messages << "\n"
        << "simulate.attacks =";
    for (const auto& a : s.attacks) out << " " << a;
    out << "\n";
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace macauth
