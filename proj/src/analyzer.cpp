#include "macauth/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "macauth/rng.hpp"
#include "macauth/simplex.hpp"

namespace macauth {

const char* to_string(CouplingMode m) {
  return m == CouplingMode::general ? "general" : "product";
}

CouplingMode parse_coupling_mode(const std::string& s) {
  if (s == "general") return CouplingMode::general;
  if (s == "product") return CouplingMode::product;
  throw std::invalid_argument("unknown coupling mode '" + s + "' (expected general|product)");
}

namespace {

// Shared shape of the coupling polytope.
struct Polytope {
  std::size_t nu, nv, ny, silence;
  std::vector<double> pu;
  StochasticKernel w;   // (u, v) -> y
  StochasticKernel w0;  // u -> y at silence

  Polytope(const MacChannel& ch, const EncoderSpec& enc)
      : nu(enc.u_size()),
        nv(ch.v_size()),
        ny(ch.y_size()),
        silence(ch.silence()),
        pu(enc.pu.mass().begin(), enc.pu.mass().end()),
        w(effective_uv_channel(ch, enc)),
        w0(effective_channel_silent(ch, enc)) {}

  std::size_t num_coupling_vars() const { return nu * nu * nv; }
  std::size_t idx(std::size_t up, std::size_t u, std::size_t v) const {
    return (up * nu + u) * nv + v;
  }

  // Rows (a), optionally (c), and (b); (b) gets +/- slack columns when `slack_offset` is set.
  lp::Problem build(bool product, std::optional<std::size_t> slack_offset) const {
    lp::Problem p;
    const std::size_t nj = num_coupling_vars();
    p.num_vars = slack_offset ? nj + 2 * ny * nu : nj;
    for (std::size_t up = 0; up < nu; ++up) {
      std::vector<double> row(p.num_vars, 0.0);
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t v = 0; v < nv; ++v) row[idx(up, u, v)] = 1.0;
      p.add_row(std::move(row), pu[up]);
    }
    if (product)
      for (std::size_t up = 0; up < nu; ++up)
        for (std::size_t u = 0; u < nu; ++u) {
          std::vector<double> row(p.num_vars, 0.0);
          for (std::size_t v = 0; v < nv; ++v) row[idx(up, u, v)] = 1.0;
          p.add_row(std::move(row), pu[up] * pu[u]);
        }
    for (std::size_t up = 0; up < nu; ++up)
      for (std::size_t y = 0; y < ny; ++y) {
        std::vector<double> row(p.num_vars, 0.0);
        for (std::size_t u = 0; u < nu; ++u)
          for (std::size_t v = 0; v < nv; ++v) row[idx(up, u, v)] = w(y, u * nv + v);
        if (slack_offset) {
          const std::size_t s = nj + 2 * (up * ny + y);
          row[s] = 1.0;
          row[s + 1] = -1.0;
        }
        p.add_row(std::move(row), w0(y, up) * pu[up]);
      }
    return p;
  }

  std::vector<double> silent_replay() const {
    std::vector<double> j(num_coupling_vars(), 0.0);
    for (std::size_t u = 0; u < nu; ++u) j[idx(u, u, silence)] = pu[u];
    return j;
  }

  JointDistribution to_joint(std::span<const double> x) const {
    std::vector<double> j(x.begin(), x.begin() + num_coupling_vars());
    double s = 0.0;
    for (double& v : j) s += (v = std::max(v, 0.0));
    for (double& v : j) v /= s;
    return JointDistribution({nu, nu, nv}, std::move(j), 1e-6);
  }
};

lp::Result solve_or_throw(const lp::Problem& p, const char* what) {
  auto r = lp::solve(p);
  if (r.status != lp::Status::optimal)
    throw std::runtime_error(std::string(what) + ": simplex ended " + lp::to_string(r.status));
  return r;
}

// I(U'; U, V) for a flat coupling vector with fixed U' marginal.
class ConfusionObjective {
 public:
  ConfusionObjective(std::vector<double> pu, std::size_t nuv) : pu_(std::move(pu)), nuv_(nuv) {}

  double value(std::span<const double> j) const {
    marginal(j);
    double f = 0.0;
    for (std::size_t up = 0; up < pu_.size(); ++up)
      for (std::size_t c = 0; c < nuv_; ++c) {
        const double x = j[up * nuv_ + c];
        if (x > 0.0 && m_[c] > 0.0) f += x * std::log2(x / (pu_[up] * m_[c]));
      }
    return f;
  }

  // d/dt f(j + t dir) at t = 0, without the gradient floor; +-inf at the boundary.
  double directional(std::span<const double> j, std::span<const double> dir) const {
    marginal(j);
    double s = 0.0;
    for (std::size_t up = 0; up < pu_.size(); ++up)
      for (std::size_t c = 0; c < nuv_; ++c) {
        const std::size_t i = up * nuv_ + c;
        if (dir[i] == 0.0) continue;
        if (j[i] <= 0.0) return dir[i] > 0.0 ? -std::numeric_limits<double>::infinity()
                                             : std::numeric_limits<double>::infinity();
        s += dir[i] * std::log2(j[i] / (pu_[up] * m_[c]));
      }
    return s;
  }

  void gradient(std::span<const double> j, std::vector<double>& g) const {
    marginal(j);
    g.assign(j.size(), 0.0);
    for (std::size_t up = 0; up < pu_.size(); ++up) {
      if (pu_[up] <= 0.0) continue;
      for (std::size_t c = 0; c < nuv_; ++c) {
        const double x = j[up * nuv_ + c];
        double gi;
        if (m_[c] <= 0.0) gi = -std::log2(pu_[up]);
        else if (x <= 0.0) gi = kFloor;
        else gi = std::max(std::log2(x / (pu_[up] * m_[c])), kFloor);
        g[up * nuv_ + c] = gi;
      }
    }
  }

 private:
  static constexpr double kFloor = -64.0;
  void marginal(std::span<const double> j) const {
    m_.assign(nuv_, 0.0);
    for (std::size_t up = 0; up < pu_.size(); ++up)
      for (std::size_t c = 0; c < nuv_; ++c) m_[c] += std::max(j[up * nuv_ + c], 0.0);
  }
  std::vector<double> pu_;
  std::size_t nuv_;
  mutable std::vector<double> m_;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Largest t in [0, hi] with f'(t) <= 0 for a convex f, by bisection on the derivative sign.
template <typename D>
double line_search(D&& deriv, double hi) {
  if (deriv(hi) <= 0.0) return hi;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) <= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  double total = 0.0;
  for (double& x : v) total += (x = std::max(x - theta, 0.0));
  for (double& x : v) x /= total;
  return v;
}

std::vector<double> dirichlet_ones(std::size_t k, Rng& rng) {
  std::vector<double> v(k);
  double s = 0.0;
  for (auto& x : v) s += (x = -std::log(1.0 - rng.uniform()));
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace

FeasibilityReport simulatability_lp(const MacChannel& ch, const EncoderSpec& enc,
                                    CouplingMode mode) {
  enc.validate_against(ch);
  Polytope poly(ch, enc);
  auto prob = poly.build(mode == CouplingMode::product, poly.num_coupling_vars());
  prob.cost.assign(prob.num_vars, 0.0);
  for (std::size_t j = poly.num_coupling_vars(); j < prob.num_vars; ++j) prob.cost[j] = 1.0;
  const auto r = solve_or_throw(prob, "simulatability_lp");

  FeasibilityReport rep;
  rep.mode = mode;
  rep.residual = std::max(r.objective, 0.0);
  rep.feasible = rep.residual <= kFeasibilityTol;
  if (rep.feasible) rep.witness = poly.to_joint(r.x);
  return rep;
}

double max_active_mass(const MacChannel& ch, const EncoderSpec& enc) {
  // Over couplings whose residual is within kActiveSlack of the best achievable one; the
  // exact polytope is too sensitive to near-zero channel entries to optimize over directly.
  constexpr double kActiveSlack = 1e-9;
  const double best = simulatability_lp(ch, enc, CouplingMode::general).residual;
  Polytope poly(ch, enc);
  auto prob = poly.build(false, poly.num_coupling_vars());
  const std::size_t budget_slack = prob.num_vars++;
  for (auto& row : prob.a_eq) row.push_back(0.0);
  std::vector<double> budget(prob.num_vars, 0.0);
  for (std::size_t j = poly.num_coupling_vars(); j < budget_slack; ++j) budget[j] = 1.0;
  budget[budget_slack] = 1.0;
  prob.add_row(std::move(budget), best + kActiveSlack);
  prob.cost.assign(prob.num_vars, 0.0);
  for (std::size_t up = 0; up < poly.nu; ++up)
    for (std::size_t u = 0; u < poly.nu; ++u)
      for (std::size_t v = 0; v < poly.nv; ++v)
        if (v != poly.silence) prob.cost[poly.idx(up, u, v)] = -1.0;
  const auto r = solve_or_throw(prob, "max_active_mass");
  return std::max(-r.objective, 0.0);
}

double confusion_information(const JointDistribution& coupling) {
  if (coupling.rank() != 3) throw std::invalid_argument("confusion_information: need {U',U,V}");
  const auto& d = coupling.dims();
  return mutual_information(coupling.reshaped({d[0], d[1] * d[2]}));
}

ConfusionResult min_confusion_information(const MacChannel& ch, const EncoderSpec& enc,
                                          const FrankWolfeOptions& opt) {
  enc.validate_against(ch);
  Polytope poly(ch, enc);
  const std::size_t nj = poly.num_coupling_vars();
  ConfusionObjective obj(poly.pu, poly.nu * poly.nv);
  lp::Problem lmo = poly.build(false, std::nullopt);

  // Pairwise Frank-Wolfe: mass moves from the worst active vertex to the LMO vertex.
  std::vector<std::vector<double>> atoms{poly.silent_replay()};
  std::vector<double> weights{1.0};
  std::vector<double> x = atoms.front(), g, trial(nj), dir(nj);

  ConfusionResult res;
  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    obj.gradient(x, g);
    lmo.cost = g;
    const auto s = solve_or_throw(lmo, "min_confusion_information").x;
    res.gap = dot(g, x) - dot(g, s);
    if (res.gap <= opt.gap_tol) {
      res.converged = true;
      break;
    }
    std::size_t away = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double v = dot(g, atoms[k]);
      if (v > worst) {
        worst = v;
        away = k;
      }
    }
    for (std::size_t i = 0; i < nj; ++i) dir[i] = s[i] - atoms[away][i];
    const double gamma = line_search(
        [&](double t) {
          for (std::size_t i = 0; i < nj; ++i) trial[i] = std::max(x[i] + t * dir[i], 0.0);
          return obj.directional(trial, dir);
        },
        weights[away]);
    if (gamma <= 0.0) break;  // no descent even along the exact derivative
    for (std::size_t i = 0; i < nj; ++i) x[i] = std::max(x[i] + gamma * dir[i], 0.0);

    weights[away] -= gamma;
    auto it = std::find_if(atoms.begin(), atoms.end(), [&](const std::vector<double>& a) {
      for (std::size_t i = 0; i < nj; ++i)
        if (std::abs(a[i] - s[i]) > 1e-12) return false;
      return true;
    });
    if (it == atoms.end()) {
      atoms.push_back(s);
      weights.push_back(gamma);
    } else {
      weights[static_cast<std::size_t>(it - atoms.begin())] += gamma;
    }
    for (std::size_t k = atoms.size(); k-- > 0;)
      if (weights[k] <= 1e-15) {
        atoms.erase(atoms.begin() + static_cast<long>(k));
        weights.erase(weights.begin() + static_cast<long>(k));
      }
  }
  res.value = std::max(obj.value(x), 0.0);
  res.minimizer = poly.to_joint(x);
  return res;
}

bool in_u_plus(const MacChannel& ch, const EncoderSpec& enc, double* residual) {
  const auto rep = simulatability_lp(ch, enc, CouplingMode::product);
  if (residual) *residual = rep.residual;
  return !rep.feasible;
}

MembershipVerdict membership_check(const MacChannel& ch, const EncoderSpec& enc, double rate,
                                   const FrankWolfeOptions& opt) {
  if (rate < 0.0) throw std::invalid_argument("membership_check: negative rate");
  MembershipVerdict v;
  v.rate = rate;
  v.in_u_plus = in_u_plus(ch, enc, &v.residual);
  v.min_confusion_info = min_confusion_information(ch, enc, opt).value;
  v.rate_threshold = v.min_confusion_info;
  v.safe_at_rate = rate < v.min_confusion_info;
  return v;
}

Coupling coupling_kernel(const JointDistribution& joint, std::size_t silence) {
  const auto& d = joint.dims();
  const std::size_t nu = d[0], nuv = d[1] * d[2];
  std::vector<double> k(nu * nuv, 0.0);
  for (std::size_t up = 0; up < nu; ++up) {
    double row = 0.0;
    for (std::size_t c = 0; c < nuv; ++c) row += joint.mass()[up * nuv + c];
    if (row <= 0.0) {
      k[up * nuv + up * d[2] + silence] = 1.0;
      continue;
    }
    for (std::size_t c = 0; c < nuv; ++c) k[up * nuv + c] = joint.mass()[up * nuv + c] / row;
  }
  return {nu, nuv, std::move(k), 1e-9};
}

AttackKernel synthesize_attack(const MacChannel& ch, const EncoderSpec& enc,
                               const FeasibilityReport& report) {
  if (!report.feasible || !report.witness)
    throw std::invalid_argument("synthesize_attack: report has no feasible witness");
  enc.validate_against(ch);
  const auto& j = *report.witness;
  const std::size_t nu = enc.u_size(), nv = ch.v_size(), nx = ch.x_size();
  if (j.dims() != std::vector<std::size_t>{nu, nu, nv})
    throw std::invalid_argument("synthesize_attack: witness shape does not match encoder/channel");

  AttackKernel k;
  k.u_size = nu;
  k.v_size = nv;
  k.silence = ch.silence();
  k.x_size = nx;
  k.v_given_uu.assign(nu * nu * nv, 0.0);
  for (std::size_t pair = 0; pair < nu * nu; ++pair) {
    double s = 0.0;
    for (std::size_t v = 0; v < nv; ++v) s += j.mass()[pair * nv + v];
    for (std::size_t v = 0; v < nv; ++v)
      k.v_given_uu[pair * nv + v] = s > 0.0 ? j.mass()[pair * nv + v] / s : 0.0;
    if (s <= 0.0) k.v_given_uu[pair * nv + k.silence] = 1.0;
  }

  // Input-aware form exists when X is a deterministic function of U.
  std::vector<std::size_t> x_of_u(nu);
  bool deterministic = true;
  for (std::size_t u = 0; u < nu && deterministic; ++u) {
    const auto r = enc.px_given_u.row(u);
    const auto it = std::max_element(r.begin(), r.end());
    deterministic = std::abs(*it - 1.0) <= kProbTol;
    x_of_u[u] = static_cast<std::size_t>(it - r.begin());
  }
  if (deterministic) {
    std::vector<double> acc(nx * nx * nv, 0.0);
    for (std::size_t up = 0; up < nu; ++up)
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t v = 0; v < nv; ++v)
          acc[(x_of_u[up] * nx + x_of_u[u]) * nv + v] += j.mass()[(up * nu + u) * nv + v];
    for (std::size_t pair = 0; pair < nx * nx; ++pair) {
      double s = 0.0;
      for (std::size_t v = 0; v < nv; ++v) s += acc[pair * nv + v];
      for (std::size_t v = 0; v < nv; ++v) acc[pair * nv + v] = s > 0.0 ? acc[pair * nv + v] / s : 0.0;
      if (s <= 0.0) acc[pair * nv + k.silence] = 1.0;
    }
    k.v_given_xx = std::move(acc);
  }
  return k;
}

double clean_rate(const MacChannel& ch, const EncoderSpec& enc) {
  return mutual_information(enc.pu, effective_channel_silent(ch, enc));
}

namespace {

struct RateState {
  std::vector<double> pu;
  std::vector<std::vector<double>> rows;  // P(x|u)

  EncoderSpec encoder() const {
    return {Distribution(pu, 1e-9), StochasticKernel::from_rows(rows, 1e-9)};
  }
};

// d I(Y;U) / d block, block 0 = P_U, block u + 1 = P(.|u).
std::vector<double> rate_gradient(const RateState& st, const StochasticKernel& w0,
                                  std::size_t block) {
  const std::size_t nu = st.pu.size(), nx = w0.input_size(), ny = w0.output_size();
  std::vector<double> wy(nu * ny, 0.0), py(ny, 0.0);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) wy[u * ny + y] += w0(y, x) * st.rows[u][x];
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t y = 0; y < ny; ++y) py[y] += st.pu[u] * wy[u * ny + y];
  auto lr = [&](std::size_t u, std::size_t y) {
    if (wy[u * ny + y] <= 0.0) return -60.0;
    return std::clamp(std::log2(wy[u * ny + y] / py[y]), -60.0, 60.0);
  };
  std::vector<double> g;
  if (block == 0) {
    g.resize(nu);
    for (std::size_t u = 0; u < nu; ++u) {
      double d = 0.0;
      for (std::size_t y = 0; y < ny; ++y)
        if (wy[u * ny + y] > 0.0) d += wy[u * ny + y] * lr(u, y);
      g[u] = d;
    }
  } else {
    const std::size_t u = block - 1;
    g.resize(nx);
    for (std::size_t x = 0; x < nx; ++x) {
      double d = 0.0;
      for (std::size_t y = 0; y < ny; ++y)
        if (w0(y, x) > 0.0) d += w0(y, x) * lr(u, y);
      g[x] = st.pu[u] * d;
    }
  }
  return g;
}

RateCandidate ascend(const MacChannel& ch, std::size_t nu, std::size_t restart,
                     const RateSearchConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, nu, restart));
  const auto w0 = clean_channel(ch);
  const std::size_t nx = ch.x_size();

  RateCandidate cand;
  cand.u_size = nu;
  cand.restart = restart;
  RateState st;
  bool member = false;
  for (int attempt = 0; attempt < 16 && !member; ++attempt) {
    st.pu = dirichlet_ones(nu, rng);
    st.rows.clear();
    for (std::size_t u = 0; u < nu; ++u) st.rows.push_back(dirichlet_ones(nx, rng));
    member = in_u_plus(ch, st.encoder(), &cand.residual);
  }
  double rate = clean_rate(ch, st.encoder());
  if (member) {
    std::vector<double> step(nu + 1, cfg.initial_step);
    for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
      bool active = false;
      for (std::size_t b = 0; b <= nu; ++b) {
        if (step[b] < cfg.min_step) continue;
        active = true;
        auto g = rate_gradient(st, w0, b);
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        double norm = 0.0;
        for (auto& v : g) {
          v -= mean;
          norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm <= 1e-300) {
          step[b] = 0.0;
          continue;
        }
        RateState next = st;
        auto& blk = b == 0 ? next.pu : next.rows[b - 1];
        for (std::size_t i = 0; i < blk.size(); ++i) blk[i] += step[b] * g[i] / norm;
        blk = project_to_simplex(blk);
        const auto enc = next.encoder();
        const double r = clean_rate(ch, enc);
        double res = 0.0;
        if (r > rate + 1e-15 && in_u_plus(ch, enc, &res)) {
          st = std::move(next);
          rate = r;
          cand.residual = res;
          step[b] = std::min(step[b] * 1.5, 1.0);
        } else {
          step[b] *= 0.5;
        }
      }
      if (!active) break;
    }
  }
  cand.encoder = st.encoder();
  cand.rate = rate;
  cand.in_u_plus = member;
  return cand;
}

}  // namespace

RateBoundResult optimize_rate_bound(const MacChannel& ch, std::size_t u_size_max,
                                    const RateSearchConfig& cfg, Execution exec) {
  if (u_size_max < 1) throw std::invalid_argument("optimize_rate_bound: u_size_max must be >= 1");
  if (cfg.restarts < 1) throw std::invalid_argument("optimize_rate_bound: restarts must be >= 1");
  const std::size_t total = u_size_max * cfg.restarts;
  std::vector<RateCandidate> trace(total);
  for_each_index(total, exec, [&](std::size_t i) {
    trace[i] = ascend(ch, i / cfg.restarts + 1, i % cfg.restarts, cfg);
  });

  RateBoundResult res;
  const RateCandidate* best = nullptr;
  for (const auto& c : trace)
    if (c.in_u_plus && (!best || c.rate > best->rate)) best = &c;
  if (best) {
    res.best_encoder = best->encoder;
    res.best_rate = clean_rate(ch, best->encoder);
    res.verdict = membership_check(ch, best->encoder, res.best_rate, cfg.fw);
  }
  res.search_trace = std::move(trace);
  return res;
}

}  // namespace macauth
