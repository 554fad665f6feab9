#include "macauth/prob.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace macauth {

namespace {

void check_mass(std::span<const double> m, double tol, const char* what) {
  double s = 0.0;
  for (double v : m) {
    if (!(v >= -tol)) throw std::invalid_argument(std::string(what) + ": negative mass");
    s += v;
  }
  if (std::abs(s - 1.0) > tol)
    throw std::invalid_argument(std::string(what) + ": mass sums to " + std::to_string(s));
}

// x log2(x / y) with 0 log 0 = 0.
double plogq(double x, double y) {
  if (x <= 0.0) return 0.0;
  return x * std::log2(x / y);
}

}  // namespace

Distribution::Distribution(std::vector<double> mass, double tol) : mass_(std::move(mass)) {
  if (mass_.empty()) throw std::invalid_argument("Distribution: empty alphabet");
  check_mass(mass_, tol, "Distribution");
  for (double& v : mass_) v = std::max(v, 0.0);
}

Distribution Distribution::uniform(std::size_t k) {
  return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Distribution Distribution::point_mass(std::size_t k, std::size_t at) {
  std::vector<double> m(k, 0.0);
  m.at(at) = 1.0;
  return Distribution(std::move(m));
}

StochasticKernel::StochasticKernel(std::size_t input_size, std::size_t output_size,
                                   std::vector<double> rows, double tol)
    : in_(input_size), out_(output_size), p_(std::move(rows)) {
  if (in_ == 0 || out_ == 0) throw std::invalid_argument("StochasticKernel: empty alphabet");
  if (p_.size() != in_ * out_) throw std::invalid_argument("StochasticKernel: size mismatch");
  for (std::size_t i = 0; i < in_; ++i) {
    try {
      check_mass(row(i), tol, "kernel row");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (input " + std::to_string(i) + ")");
    }
  }
  for (double& v : p_) v = std::max(v, 0.0);
}

StochasticKernel StochasticKernel::identity(std::size_t k) {
  std::vector<double> p(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) p[i * k + i] = 1.0;
  return {k, k, std::move(p)};
}

StochasticKernel StochasticKernel::from_rows(const std::vector<std::vector<double>>& rows,
                                             double tol) {
  if (rows.empty()) throw std::invalid_argument("StochasticKernel: no rows");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size())
      throw std::invalid_argument("StochasticKernel: ragged rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return {rows.size(), rows.front().size(), std::move(flat), tol};
}

Distribution StochasticKernel::row_distribution(std::size_t in) const {
  auto r = row(in);
  return Distribution(std::vector<double>(r.begin(), r.end()));
}

StochasticKernel StochasticKernel::then(const StochasticKernel& next) const {
  if (next.input_size() != out_) throw std::invalid_argument("kernel composition: size mismatch");
  const std::size_t z = next.output_size();
  std::vector<double> p(in_ * z, 0.0);
  for (std::size_t x = 0; x < in_; ++x)
    for (std::size_t y = 0; y < out_; ++y) {
      const double w = (*this)(y, x);
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < z; ++k) p[x * z + k] += w * next(k, y);
    }
  return {in_, z, std::move(p), 1e-9};
}

JointDistribution::JointDistribution(std::vector<std::size_t> dims, std::vector<double> mass,
                                     double tol)
    : dims_(std::move(dims)), mass_(std::move(mass)) {
  std::size_t total = 1;
  for (auto d : dims_) {
    if (d == 0) throw std::invalid_argument("JointDistribution: empty axis");
    total *= d;
  }
  if (dims_.empty() || total != mass_.size())
    throw std::invalid_argument("JointDistribution: size mismatch");
  check_mass(mass_, tol, "JointDistribution");
  for (double& v : mass_) v = std::max(v, 0.0);
}

JointDistribution JointDistribution::from_input_and_kernel(const Distribution& p,
                                                           const StochasticKernel& k) {
  if (p.size() != k.input_size()) throw std::invalid_argument("joint: size mismatch");
  std::vector<double> m(p.size() * k.output_size());
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = 0; b < k.output_size(); ++b) m[a * k.output_size() + b] = p[a] * k(b, a);
  return JointDistribution({p.size(), k.output_size()}, std::move(m), 1e-9);
}

double JointDistribution::at(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) flat = flat * dims_[i] + idx[i];
  return mass_[flat];
}

Distribution JointDistribution::marginal(std::size_t axis) const {
  auto m = marginal(std::vector<std::size_t>{axis});
  return Distribution(std::vector<double>(m.mass().begin(), m.mass().end()), 1e-9);
}

JointDistribution JointDistribution::marginal(const std::vector<std::size_t>& axes) const {
  std::vector<std::size_t> out_dims;
  for (auto a : axes) out_dims.push_back(dims_.at(a));
  std::size_t out_total = 1;
  for (auto d : out_dims) out_total *= d;
  std::vector<double> out(out_total, 0.0);
  std::vector<std::size_t> idx(dims_.size(), 0);
  for (std::size_t flat = 0; flat < mass_.size(); ++flat) {
    std::size_t o = 0;
    for (auto a : axes) o = o * dims_[a] + idx[a];
    out[o] += mass_[flat];
    for (std::size_t d = dims_.size(); d-- > 0;) {
      if (++idx[d] < dims_[d]) break;
      idx[d] = 0;
    }
  }
  return JointDistribution(std::move(out_dims), std::move(out), 1e-9);
}

JointDistribution JointDistribution::reshaped(std::vector<std::size_t> dims) const {
  return JointDistribution(std::move(dims), mass_, 1e-9);
}

Distribution EmpiricalType::frequencies() const {
  std::vector<double> f(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return Distribution(std::move(f), 1e-9);
}

TypicalityParams TypicalityParams::schedule(std::size_t n, double scale) {
  if (n == 0) throw std::invalid_argument("TypicalityParams: n must be positive");
  return {n, scale * std::pow(static_cast<double>(n), -1.0 / 3.0)};
}

double entropy(const Distribution& p) {
  double h = 0.0;
  for (double v : p.mass())
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

double mutual_information(const JointDistribution& j) {
  if (j.rank() != 2) throw std::invalid_argument("mutual_information: need 2 axes");
  const auto pa = j.marginal(0), pb = j.marginal(1);
  const std::size_t nb = pb.size();
  double i = 0.0;
  for (std::size_t a = 0; a < pa.size(); ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      const double pab = j.mass()[a * nb + b];
      i += plogq(pab, pa[a] * pb[b]);
    }
  return std::max(i, 0.0);
}

double conditional_mutual_information(const JointDistribution& j) {
  if (j.rank() != 3) throw std::invalid_argument("conditional_mutual_information: need 3 axes");
  const auto& d = j.dims();
  const auto pac = j.marginal(std::vector<std::size_t>{0, 2});
  const auto pbc = j.marginal(std::vector<std::size_t>{1, 2});
  const auto pc = j.marginal(2);
  double i = 0.0;
  for (std::size_t a = 0; a < d[0]; ++a)
    for (std::size_t b = 0; b < d[1]; ++b)
      for (std::size_t c = 0; c < d[2]; ++c) {
        const double pabc = j.mass()[(a * d[1] + b) * d[2] + c];
        if (pabc <= 0.0) continue;
        const double num = pabc * pc[c];
        const double den = pac.mass()[a * d[2] + c] * pbc.mass()[b * d[2] + c];
        i += pabc * std::log2(num / den);
      }
  return std::max(i, 0.0);
}

double mutual_information(const Distribution& p, const StochasticKernel& k) {
  return mutual_information(JointDistribution::from_input_and_kernel(p, k));
}

EmpiricalType empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size) {
  return empirical_type(std::vector<std::span<const Symbol>>{seq}, {alphabet_size});
}

EmpiricalType empirical_type(const std::vector<std::span<const Symbol>>& seqs,
                             const std::vector<std::size_t>& dims) {
  if (seqs.empty() || seqs.size() != dims.size())
    throw std::invalid_argument("empirical_type: sequences/alphabets mismatch");
  const std::size_t n = seqs.front().size();
  if (n == 0) throw std::invalid_argument("empirical_type: empty sequence");
  for (const auto& s : seqs)
    if (s.size() != n) throw std::invalid_argument("empirical_type: sequences not aligned");
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  EmpiricalType t{dims, std::vector<std::size_t>(total, 0), n};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      const Symbol s = seqs[k][i];
      if (s >= dims[k])
        throw std::invalid_argument("empirical_type: symbol " + std::to_string(s) +
                                    " out of range at position " + std::to_string(i));
      flat = flat * dims[k] + s;
    }
    ++t.counts[flat];
  }
  return t;
}

double type_distance(std::span<const std::size_t> counts, std::size_t n,
                     std::span<const double> p) {
  const double inv = 1.0 / static_cast<double>(n);
  double l1 = 0.0;
  for (std::size_t x = 0; x < counts.size(); ++x)
    l1 += std::abs(static_cast<double>(counts[x]) * inv - p[x]);
  return l1;
}

double cond_type_distance(std::span<const std::size_t> joint_counts, std::size_t n,
                          const StochasticKernel& k) {
  const std::size_t nu = k.input_size(), ny = k.output_size();
  const double inv = 1.0 / static_cast<double>(n);
  double l1 = 0.0;
  for (std::size_t u = 0; u < nu; ++u) {
    std::size_t nu_count = 0;
    for (std::size_t y = 0; y < ny; ++y) nu_count += joint_counts[u * ny + y];
    const double pu = static_cast<double>(nu_count) * inv;
    for (std::size_t y = 0; y < ny; ++y)
      l1 += std::abs(static_cast<double>(joint_counts[u * ny + y]) * inv - pu * k(y, u));
  }
  return l1;
}

bool is_typical(std::span<const Symbol> seq, const Distribution& p, const TypicalityParams& tp) {
  if (seq.size() != tp.n) throw std::invalid_argument("is_typical: length != n");
  const auto t = empirical_type(seq, p.size());
  return type_distance(t.counts, t.n, p.mass()) <= tp.delta + kProbTol;
}

bool is_cond_typical(std::span<const Symbol> y_seq, std::span<const Symbol> u_seq,
                     const StochasticKernel& k, const TypicalityParams& tp) {
  if (y_seq.size() != tp.n || u_seq.size() != tp.n)
    throw std::invalid_argument("is_cond_typical: length != n");
  const auto t = empirical_type({u_seq, y_seq}, {k.input_size(), k.output_size()});
  return cond_type_distance(t.counts, t.n, k) <= tp.delta + kProbTol;
}

double binary_entropy(double p) { return entropy(Distribution({p, 1.0 - p}, 1e-9)); }

}  // namespace macauth
