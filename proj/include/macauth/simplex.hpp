#pragma once

// Dense two-phase primal simplex for   min c.x  s.t.  A x = b,  x >= 0.
// Dantzig pricing with Bland's rule after a run of degenerate pivots, so it cannot cycle.
// Termination requires a freshly refactored basis that is primal and dual feasible; if
// that certification fails the solve is retried with more conservative pivoting.

#include <cstddef>
#include <vector>

namespace macauth::lp {

struct Problem {
  std::size_t num_vars = 0;
  std::vector<std::vector<double>> a_eq;  // one row per constraint, num_vars wide
  std::vector<double> b_eq;
  std::vector<double> cost;  // empty = pure feasibility

  std::size_t add_row(std::vector<double> row, double rhs) {
    a_eq.push_back(std::move(row));
    b_eq.push_back(rhs);
    return a_eq.size() - 1;
  }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit, numerical_failure };

struct Options {
  double feasibility_tol = 1e-9;  // phase-1 objective accepted as zero
  double pivot_tol = 1e-9;       // smallest entry accepted by the ratio test
  double zero_tol = 1e-13;       // below this a row/column counts as linearly dependent
  double certify_tol = 1e-9;     // primal infeasibility tolerated in the final basis
  std::size_t degenerate_run = 50;
  std::size_t refactor_every = 32;
  double cost_tol = 1e-12;
  std::size_t max_iterations = 200000;
};

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  double infeasibility = 0.0;  // phase-1 optimum (sum of artificials)
  std::size_t iterations = 0;
};

Result solve(const Problem& p, const Options& opt = {});

const char* to_string(Status s);

}  // namespace macauth::lp
