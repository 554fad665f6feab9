#include "macauth/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace macauth::lp {

namespace {

// Extended precision: coupling LPs mix O(1) coefficients with ones near 1e-8, and the
// resulting bases can be too ill-conditioned for double-precision reduced costs.
using Real = long double;

struct Attempt {
  double pivot_tol;
  bool bland;
};

class Tableau {
 public:
  // Columns: [0, n) structural, [n, n + m) artificial, last = rhs.
  explicit Tableau(const Problem& p) : m_(p.a_eq.size()), n_(p.num_vars), w_(n_ + m_ + 1) {
    t_.assign(m_ * w_, 0.0);
    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      if (p.a_eq[r].size() != n_) throw std::invalid_argument("lp: row width != num_vars");
      const double sign = p.b_eq[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(r, j) = sign * p.a_eq[r][j];
      at(r, n_ + r) = 1.0;
      at(r, w_ - 1) = sign * p.b_eq[r];
      basis_[r] = n_ + r;
    }
    active_.assign(m_, true);
    orig_ = t_;
  }

  Real& at(std::size_t r, std::size_t c) { return t_[r * w_ + c]; }
  Real at(std::size_t r, std::size_t c) const { return t_[r * w_ + c]; }
  Real rhs(std::size_t r) const { return at(r, w_ - 1); }

  void pivot(std::size_t pr, std::size_t pc) {
    const Real inv = 1.0L / at(pr, pc);
    for (std::size_t c = 0; c < w_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr || !active_[r]) continue;
      const Real f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < w_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis_[pr] = pc;
  }

  // Rebuilds B^-1 [A | I | b] from the original rows for the current basis, with partial
  // pivoting. Rows left without a pivot are dependent and get deactivated; returns false
  // if such a row is not actually redundant.
  bool refactor(const Options& opt) {
    std::vector<std::size_t> cols;
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r]) cols.push_back(basis_[r]);
    t_ = orig_;
    std::fill(active_.begin(), active_.end(), true);
    std::vector<bool> done(m_, false);
    for (std::size_t c : cols) {
      std::size_t pr = m_;
      Real big = opt.zero_tol;
      for (std::size_t r = 0; r < m_; ++r)
        if (!done[r] && std::abs(at(r, c)) > big) {
          big = std::abs(at(r, c));
          pr = r;
        }
      if (pr == m_) continue;
      pivot(pr, c);
      done[pr] = true;
    }
    bool consistent = true;
    for (std::size_t r = 0; r < m_; ++r) {
      if (done[r]) continue;
      active_[r] = false;
      if (std::abs(rhs(r)) > opt.certify_tol) consistent = false;
      for (std::size_t j = 0; j < n_; ++j)
        if (std::abs(at(r, j)) > opt.certify_tol) consistent = false;
    }
    return consistent;
  }

  Real reduced_cost(const std::vector<double>& cost, std::size_t j) const {
    Real d = cost[j];
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r]) d -= cost[basis_[r]] * at(r, j);
    return d;
  }

  bool primal_feasible(const Options& opt) const {
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r] && rhs(r) < -opt.certify_tol) return false;
    return true;
  }

  // Minimizes cost over columns [0, allowed). `certified` is set when termination happened
  // on a freshly refactored basis that is primal and dual feasible.
  Status optimize(const std::vector<double>& cost, std::size_t allowed, const Options& opt,
                  const Attempt& how, std::size_t& iterations, bool& certified) {
    certified = false;
    std::vector<bool> in_basis(w_, false);
    std::size_t degenerate = 0, since_refactor = 0;
    bool fresh = false;
    for (;;) {
      if (iterations >= opt.max_iterations) return Status::iteration_limit;
      if (since_refactor >= opt.refactor_every) {
        if (!refactor(opt)) return Status::optimal;
        since_refactor = 0;
      }
      std::fill(in_basis.begin(), in_basis.end(), false);
      for (std::size_t r = 0; r < m_; ++r)
        if (active_[r]) in_basis[basis_[r]] = true;
      const bool bland = how.bland || degenerate >= opt.degenerate_run;

      std::size_t enter = allowed;
      Real most = -opt.cost_tol;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (in_basis[j]) continue;
        const Real d = reduced_cost(cost, j);
        if (d < most) {
          most = d;
          enter = j;
          if (bland) break;
        }
      }
      if (enter == allowed) {
        if (fresh) {
          certified = primal_feasible(opt);
          return Status::optimal;
        }
        if (!refactor(opt)) return Status::optimal;
        since_refactor = 0;
        fresh = true;
        continue;
      }

      // Min ratio; ties go to the lowest basic index under Bland, else the largest pivot.
      std::size_t leave = m_;
      Real best = std::numeric_limits<Real>::infinity(), big = 0.0;
      bool skipped = false;
      for (std::size_t r = 0; r < m_; ++r) {
        if (!active_[r]) continue;
        const Real a = at(r, enter);
        if (a <= how.pivot_tol) {
          skipped = skipped || a > opt.zero_tol;
          continue;
        }
        const Real ratio = std::max(rhs(r), Real(0)) / a;
        bool take = ratio < best;
        if (ratio == best) take = bland ? basis_[r] < basis_[leave] : a > big;
        if (take) {
          best = ratio;
          big = a;
          leave = r;
        }
      }
      if (leave == m_) {
        certified = !skipped;  // a ray only counts if no tiny positive entry was ignored
        return Status::unbounded;
      }
      pivot(leave, enter);
      degenerate = best <= 0.0 ? degenerate + 1 : 0;
      fresh = false;
      ++since_refactor;
      ++iterations;
    }
  }

  double objective(const std::vector<double>& cost) const {
    Real z = 0.0;
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r]) z += cost[basis_[r]] * rhs(r);
    return static_cast<double>(z);
  }

  // Pivots zero-level artificials out of the basis; rows with no usable entry are redundant.
  void expel_artificials(const Options& opt) {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r] || basis_[r] < n_) continue;
      std::size_t col = n_;
      Real big = opt.zero_tol;
      for (std::size_t j = 0; j < n_; ++j)
        if (std::abs(at(r, j)) > big) {
          big = std::abs(at(r, j));
          col = j;
        }
      if (col < n_) pivot(r, col);
      else active_[r] = false;
    }
  }

  std::vector<double> solution() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (active_[r] && basis_[r] < n_)
        x[basis_[r]] = static_cast<double>(std::max(rhs(r), Real(0)));
    return x;
  }

 private:
  std::size_t m_, n_, w_;
  std::vector<Real> t_, orig_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
};

Result solve_once(const Problem& p, const Options& opt, const Attempt& how, bool& certified) {
  Result res;
  Tableau tab(p);
  const std::size_t n = p.num_vars, m = p.a_eq.size();

  std::vector<double> phase1(n + m, 0.0);
  for (std::size_t j = n; j < n + m; ++j) phase1[j] = 1.0;
  auto st = tab.optimize(phase1, n + m, opt, how, res.iterations, certified);
  if (st != Status::optimal) {
    res.status = st;
    return res;
  }
  res.infeasibility = std::max(tab.objective(phase1), 0.0);
  if (res.infeasibility > opt.feasibility_tol) {
    res.status = Status::infeasible;
    res.x = tab.solution();
    return res;
  }
  if (!certified) return res;
  tab.expel_artificials(opt);

  std::vector<double> cost(n + m, 0.0);
  for (std::size_t j = 0; j < p.cost.size(); ++j) cost[j] = p.cost[j];
  st = tab.optimize(cost, n, opt, how, res.iterations, certified);
  res.status = st;
  res.x = tab.solution();
  res.objective = 0.0;
  for (std::size_t j = 0; j < p.cost.size(); ++j) res.objective += p.cost[j] * res.x[j];
  return res;
}

}  // namespace

Result solve(const Problem& p, const Options& opt) {
  if (p.a_eq.size() != p.b_eq.size()) throw std::invalid_argument("lp: A/b size mismatch");
  if (!p.cost.empty() && p.cost.size() != p.num_vars)
    throw std::invalid_argument("lp: cost size != num_vars");

  // Pivot rules to try in order until the final basis certifies: tiny pivots risk error
  // growth, skipping them risks small primal infeasibility, so both directions are tried.
  const Attempt attempts[] = {{opt.pivot_tol, false}, {opt.zero_tol, false}, {opt.zero_tol, true},
                              {opt.pivot_tol, true},  {1e-7, true}};
  // A stuck attempt (numerical cycling) moves on to the next one after `cap` pivots.
  const std::size_t cap = std::max<std::size_t>(1000, 20 * (p.num_vars + 2 * p.a_eq.size()));
  Result last;
  std::size_t iterations = 0;
  for (const auto& how : attempts) {
    Options o = opt;
    o.max_iterations = std::min(cap, opt.max_iterations - std::min(iterations, opt.max_iterations));
    bool certified = false;
    last = solve_once(p, o, how, certified);
    iterations += last.iterations;
    last.iterations = iterations;
    if (certified) return last;
    if (iterations >= opt.max_iterations) {
      last.status = Status::iteration_limit;
      return last;
    }
  }
  last.status = Status::numerical_failure;
  return last;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
    case Status::numerical_failure: return "numerical_failure";
  }
  return "?";
}

}  // namespace macauth::lp
