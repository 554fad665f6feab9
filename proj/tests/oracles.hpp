#pragma once

// Brute-force references for the coupling analyzer. Everything here works on
// plain vectors so it shares no code with the LP or Frank-Wolfe paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "macauth/channel.hpp"
#include "macauth/rng.hpp"

namespace macauth::oracle {

inline constexpr int kGridSteps = 50;  // spacing 0.02

struct Instance {
  std::size_t nu = 0, nx = 0, nv = 0, ny = 0, silence = 0;
  std::vector<double> law;  // [(x * nv + v) * ny + y]
  std::vector<double> pu;
  std::vector<double> px;   // [u * nx + x]

  MacChannel channel() const {
    std::vector<std::vector<double>> rows(nx * nv);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].assign(law.begin() + i * ny, law.begin() + (i + 1) * ny);
    return MacChannel(nx, nv, silence, StochasticKernel::from_rows(rows));
  }
  EncoderSpec encoder() const {
    std::vector<std::vector<double>> rows(nu);
    for (std::size_t u = 0; u < nu; ++u) rows[u].assign(px.begin() + u * nx, px.begin() + (u + 1) * nx);
    return {Distribution(pu), StochasticKernel::from_rows(rows)};
  }
  // W(y | u, v) at [(u * nv + v) * ny + y].
  std::vector<double> uv_law() const {
    std::vector<double> w(nu * nv * ny, 0.0);
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t v = 0; v < nv; ++v)
        for (std::size_t x = 0; x < nx; ++x)
          for (std::size_t y = 0; y < ny; ++y) w[(u * nv + v) * ny + y] += px[u * nx + x] * law[(x * nv + v) * ny + y];
    return w;
  }
  std::vector<double> target(std::size_t u) const {
    const auto w = uv_law();
    return {w.begin() + (u * nv + silence) * ny, w.begin() + (u * nv + silence + 1) * ny};
  }
};

inline std::vector<double> random_simplex(Rng& rng, std::size_t k, double floor = 0.0) {
  std::vector<double> p(k);
  double s = 0.0;
  for (auto& v : p) s += (v = -std::log(1.0 - rng.uniform()));
  for (auto& v : p) v = floor + (1.0 - floor * k) * v / s;
  return p;
}

// Even indices are unstructured. Odd indices let active symbol v imitate the
// silent slice shifted by v (mod |X|), blended with noise of random strength,
// and mostly use deterministic encoders, so product-mode verdicts land on both
// sides of the threshold. Those use |Y| = 3 to keep the coupling polytopes small.
inline Instance random_instance(Rng& rng, int index) {
  const bool structured = index % 2 == 1;
  Instance in;
  do {
    in.nu = 2 + rng.below(2);
    in.nv = 2 + rng.below(2);
  } while (in.nu * in.nv > 6);
  in.nx = 2 + rng.below(2);
  in.ny = structured ? 3 : 2 + rng.below(2);
  in.law.assign(in.nx * in.nv * in.ny, 0.0);
  auto put = [&](std::size_t x, std::size_t v, const std::vector<double>& p) {
    std::copy(p.begin(), p.end(), in.law.begin() + (x * in.nv + v) * in.ny);
  };
  for (std::size_t x = 0; x < in.nx; ++x) put(x, 0, random_simplex(rng, in.ny));
  const double noise[] = {0.0, 0.0, 0.02, 0.1, 0.3};
  const double eps = noise[rng.below(5)];
  for (std::size_t v = 1; v < in.nv; ++v)
    for (std::size_t x = 0; x < in.nx; ++x) {
      auto p = random_simplex(rng, in.ny);
      if (structured) {
        const double* clean = &in.law[(((x + v) % in.nx) * in.nv + 0) * in.ny];
        for (std::size_t y = 0; y < in.ny; ++y) p[y] = (1.0 - eps) * clean[y] + eps * p[y];
      }
      put(x, v, p);
    }
  in.pu = random_simplex(rng, in.nu, 0.05);
  in.px.assign(in.nu * in.nx, 0.0);
  const bool deterministic = structured ? rng.below(3) != 0 : rng.below(3) == 0;
  for (std::size_t u = 0; u < in.nu; ++u) {
    if (deterministic) {
      in.px[u * in.nx + (u % in.nx)] = 1.0;
    } else {
      const auto r = random_simplex(rng, in.nx);
      std::copy(r.begin(), r.end(), in.px.begin() + u * in.nx);
    }
  }
  return in;
}

// Calls f(counts) for every composition of `total` into k non-negative parts.
template <typename F>
void compositions(int total, std::size_t k, F&& f) {
  std::vector<int> c(k, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == k) {
      c[i] = left;
      f(c);
      return;
    }
    for (int a = 0; a <= left; ++a) {
      c[i] = a;
      self(self, i + 1, left - a);
    }
  };
  rec(rec, 0, total);
}

inline double l1_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// Grid minimum of the L1 violation, rows u' handled separately.
// General: P(u, v | u') on the grid. Product: P(v | u', u) on the grid for each u.
inline double grid_residual(const Instance& in, bool product) {
  const auto w = in.uv_law();
  const std::size_t ny = in.ny;
  double total = 0.0;
  for (std::size_t up = 0; up < in.nu; ++up) {
    const auto t = in.target(up);
    double best = std::numeric_limits<double>::infinity();
    if (!product) {
      compositions(kGridSteps, in.nu * in.nv, [&](const std::vector<int>& c) {
        std::vector<double> y(ny, 0.0);
        for (std::size_t cell = 0; cell < c.size(); ++cell)
          if (c[cell])
            for (std::size_t k = 0; k < ny; ++k) y[k] += c[cell] * w[cell * ny + k];
        for (auto& v : y) v /= kGridSteps;
        best = std::min(best, l1_gap(y, t));
      });
    } else {
      // Per-u contributions to the Y law for every conditional P(v | u', u).
      std::vector<std::vector<std::vector<double>>> parts(in.nu);
      for (std::size_t u = 0; u < in.nu; ++u)
        compositions(kGridSteps, in.nv, [&](const std::vector<int>& c) {
          std::vector<double> y(ny, 0.0);
          for (std::size_t v = 0; v < in.nv; ++v)
            for (std::size_t k = 0; k < ny; ++k) y[k] += in.pu[u] * c[v] * w[(u * in.nv + v) * ny + k] / kGridSteps;
          parts[u].push_back(std::move(y));
        });
      std::vector<double> acc(ny, 0.0);
      auto rec = [&](auto&& self, std::size_t u) -> void {
        if (u == in.nu) {
          best = std::min(best, l1_gap(acc, t));
          return;
        }
        for (const auto& p : parts[u]) {
          for (std::size_t k = 0; k < ny; ++k) acc[k] += p[k];
          self(self, u + 1);
          for (std::size_t k = 0; k < ny; ++k) acc[k] -= p[k];
        }
      };
      rec(rec, 0);
    }
    total += in.pu[up] * best;
  }
  return total;
}

// Vertices of {q >= 0, sum q = 1, W q = target(u')} over cells (u, v):
// basic solutions of every column subset whose system has a unique solution.
inline std::vector<std::vector<double>> row_vertices(const Instance& in, std::size_t up) {
  const auto w = in.uv_law();
  const auto t = in.target(up);
  const std::size_t k = in.nu * in.nv, ny = in.ny;
  std::vector<std::vector<double>> out;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < k; ++c)
      if (mask >> c & 1u) cols.push_back(c);
    const std::size_t s = cols.size();
    if (s > ny) continue;
    // Gaussian elimination on the ny x s system (sum q = 1 is implied by the rows).
    std::vector<std::vector<long double>> a(ny, std::vector<long double>(s + 1));
    for (std::size_t r = 0; r < ny; ++r) {
      for (std::size_t j = 0; j < s; ++j) a[r][j] = w[cols[j] * ny + r];
      a[r][s] = t[r];
    }
    std::size_t rank = 0;
    for (std::size_t j = 0; j < s && rank < ny; ++j) {
      std::size_t piv = rank;
      for (std::size_t r = rank; r < ny; ++r)
        if (std::abs(a[r][j]) > std::abs(a[piv][j])) piv = r;
      if (std::abs(a[piv][j]) < 1e-12L) break;
      std::swap(a[piv], a[rank]);
      for (std::size_t r = 0; r < ny; ++r)
        if (r != rank) {
          const long double f = a[r][j] / a[rank][j];
          for (std::size_t c = j; c <= s; ++c) a[r][c] -= f * a[rank][c];
        }
      ++rank;
    }
    if (rank < s) continue;
    bool ok = true;
    for (std::size_t r = s; r < ny; ++r) ok = ok && std::abs(a[r][s]) < 1e-10L;
    std::vector<double> q(k, 0.0);
    for (std::size_t j = 0; j < s && ok; ++j) {
      const double v = static_cast<double>(a[j][s] / a[j][j]);
      ok = v > 1e-10;
      q[cols[j]] = v;
    }
    if (!ok) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& o) { return l1_gap(o, q) < 1e-9; });
    if (!dup) out.push_back(std::move(q));
  }
  return out;
}

inline double binomial(std::size_t n, std::size_t r) {
  double b = 1.0;
  for (std::size_t i = 1; i <= r; ++i) b = b * static_cast<double>(n - r + i) / static_cast<double>(i);
  return b;
}

// Number of points in the vertex-combination grid.
inline double confusion_grid_size(const std::vector<std::vector<std::vector<double>>>& verts) {
  double n = 1.0;
  for (const auto& v : verts) n *= binomial(kGridSteps + v.size() - 1, v.size() - 1);
  return n;
}

// min I(U'; U, V) in bits over spacing-0.02 convex combinations of each row's vertices.
inline double grid_min_confusion(const Instance& in, const std::vector<std::vector<std::vector<double>>>& verts) {
  const std::size_t k = in.nu * in.nv;
  struct Point {
    std::vector<double> q;
    double neg_entropy;
  };
  std::vector<std::vector<Point>> rows(in.nu);
  for (std::size_t up = 0; up < in.nu; ++up)
    compositions(kGridSteps, verts[up].size(), [&](const std::vector<int>& c) {
      Point p{std::vector<double>(k, 0.0), 0.0};
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < k; ++j) p.q[j] += c[i] * verts[up][i][j] / kGridSteps;
      for (double v : p.q)
        if (v > 0) p.neg_entropy += v * std::log2(v);
      rows[up].push_back(std::move(p));
    });
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> m(k, 0.0);
  auto rec = [&](auto&& self, std::size_t up, double acc) -> void {
    if (up == in.nu) {
      double hm = 0.0;
      for (double v : m)
        if (v > 0) hm -= v * std::log2(v);
      best = std::min(best, acc + hm);
      return;
    }
    for (const auto& p : rows[up]) {
      for (std::size_t j = 0; j < k; ++j) m[j] += in.pu[up] * p.q[j];
      self(self, up + 1, acc + in.pu[up] * p.neg_entropy);
      for (std::size_t j = 0; j < k; ++j) m[j] -= in.pu[up] * p.q[j];
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

}  // namespace macauth::oracle
