#pragma once

// Finite-alphabet probability: distributions, kernels, joint laws, empirical
// types, information measures (bits) and strong / conditional typicality.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace macauth {

using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;

/// Absolute tolerance used for every probability comparison.
inline constexpr double kProbTol = 1e-12;

class Distribution {
 public:
  Distribution() = default;
  /// Validates non-negativity and unit mass (within `tol`).
  explicit Distribution(std::vector<double> mass, double tol = kProbTol);

  static Distribution uniform(std::size_t k);
  static Distribution point_mass(std::size_t k, std::size_t at);

  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::span<const double> mass() const { return mass_; }

 private:
  std::vector<double> mass_;
};

/// Conditional law P(out | in). Stored row-major: row = input, entries over outputs.
class StochasticKernel {
 public:
  StochasticKernel() = default;
  StochasticKernel(std::size_t input_size, std::size_t output_size,
                   std::vector<double> rows, double tol = kProbTol);

  static StochasticKernel identity(std::size_t k);
  static StochasticKernel from_rows(const std::vector<std::vector<double>>& rows,
                                    double tol = kProbTol);

  std::size_t input_size() const { return in_; }
  std::size_t output_size() const { return out_; }
  double operator()(std::size_t out, std::size_t in) const { return p_[in * out_ + out]; }
  std::span<const double> row(std::size_t in) const {
    return {p_.data() + in * out_, out_};
  }
  Distribution row_distribution(std::size_t in) const;
  std::span<const double> data() const { return p_; }

  /// Sequential composition: P(z|x) = sum_y next(z|y) this(y|x).
  StochasticKernel then(const StochasticKernel& next) const;

 private:
  std::size_t in_ = 0, out_ = 0;
  std::vector<double> p_;
};

/// Dense joint pmf, row-major over `dims` (last axis fastest).
class JointDistribution {
 public:
  JointDistribution() = default;
  JointDistribution(std::vector<std::size_t> dims, std::vector<double> mass,
                    double tol = kProbTol);

  /// P(a, b) = p(a) k(b|a).
  static JointDistribution from_input_and_kernel(const Distribution& p,
                                                 const StochasticKernel& k);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::span<const double> mass() const { return mass_; }
  double at(std::span<const std::size_t> idx) const;

  Distribution marginal(std::size_t axis) const;
  /// Keeps `axes` (in the given order) and sums out the rest.
  JointDistribution marginal(const std::vector<std::size_t>& axes) const;
  /// Same mass, new shape (product of dims must match). Merges adjacent axes.
  JointDistribution reshaped(std::vector<std::size_t> dims) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> mass_;
};

/// Counts over a (possibly product) alphabet for sequences of length n.
struct EmpiricalType {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> counts;  // row-major over dims
  std::size_t n = 0;

  Distribution frequencies() const;
};

struct TypicalityParams {
  std::size_t n = 0;
  double delta = 0.0;

  /// delta(n) = scale * n^(-1/3); satisfies delta -> 0 and sqrt(n) delta -> inf.
  static TypicalityParams schedule(std::size_t n, double scale = 1.0);
};

double entropy(const Distribution& p);
/// I(A;B) for a two-axis joint.
double mutual_information(const JointDistribution& j);
/// I(A;B|C) for a three-axis joint over A x B x C.
double conditional_mutual_information(const JointDistribution& j);
/// I(X;Y) for input p through kernel k.
double mutual_information(const Distribution& p, const StochasticKernel& k);

EmpiricalType empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size);
/// Joint type of aligned sequences; dims[i] is the alphabet of seqs[i].
EmpiricalType empirical_type(const std::vector<std::span<const Symbol>>& seqs,
                             const std::vector<std::size_t>& dims);

/// sum_x |counts[x]/n - p(x)|.
double type_distance(std::span<const std::size_t> counts, std::size_t n,
                     std::span<const double> p);
/// sum_{u,y} |N(u,y)/n - N(u)/n k(y|u)|, joint counts row-major over (u, y).
double cond_type_distance(std::span<const std::size_t> joint_counts, std::size_t n,
                          const StochasticKernel& k);

bool is_typical(std::span<const Symbol> seq, const Distribution& p,
                const TypicalityParams& tp);
bool is_cond_typical(std::span<const Symbol> y_seq, std::span<const Symbol> u_seq,
                     const StochasticKernel& k, const TypicalityParams& tp);

double binary_entropy(double p);

}  // namespace macauth
