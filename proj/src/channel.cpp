#include "macauth/channel.hpp"

#include <string>

#include "macauth/rng.hpp"

namespace macauth {

MacChannel::MacChannel(std::size_t x_size, std::size_t v_size, std::size_t silence_index,
                       StochasticKernel law)
    : x_(x_size), v_(v_size), silence_(silence_index), law_(std::move(law)) {
  if (x_ == 0 || v_ == 0) throw std::invalid_argument("MacChannel: empty alphabet");
  if (silence_ >= v_)
    throw std::invalid_argument("MacChannel: silence index " + std::to_string(silence_) +
                                " out of range for |V| = " + std::to_string(v_));
  if (law_.input_size() != x_ * v_)
    throw std::invalid_argument("MacChannel: law input size != |X||V|");
}

std::size_t MacChannel::column_of(std::size_t x, std::size_t v) const {
  std::size_t block;
  if (v == silence_) block = 0;
  else block = v < silence_ ? v + 1 : v;
  return block * x_ + x;
}

MacChannel MacChannel::from_column_matrix(std::size_t x_size, std::size_t v_size,
                                          std::size_t silence_index,
                                          const std::vector<std::vector<double>>& y_by_col,
                                          double tol) {
  if (silence_index >= v_size)
    throw std::invalid_argument("silence index " + std::to_string(silence_index) +
                                " out of range for |V| = " + std::to_string(v_size));
  const std::size_t ny = y_by_col.size();
  const std::size_t cols = x_size * v_size;
  for (std::size_t r = 0; r < ny; ++r)
    if (y_by_col[r].size() != cols)
      throw std::invalid_argument("law row " + std::to_string(r) + " has " +
                                  std::to_string(y_by_col[r].size()) + " columns, expected " +
                                  std::to_string(cols));
  MacChannel shape(x_size, v_size, silence_index, StochasticKernel::identity(cols));
  std::vector<double> rows(cols * ny);
  for (std::size_t x = 0; x < x_size; ++x)
    for (std::size_t v = 0; v < v_size; ++v) {
      const std::size_t c = shape.column_of(x, v);
      double s = 0.0;
      for (std::size_t y = 0; y < ny; ++y) {
        rows[(x * v_size + v) * ny + y] = y_by_col[y][c];
        s += y_by_col[y][c];
      }
      if (std::abs(s - 1.0) > tol)
        throw std::invalid_argument("law column " + std::to_string(c) + " sums to " +
                                    std::to_string(s));
    }
  return {x_size, v_size, silence_index, StochasticKernel(cols, ny, std::move(rows), tol)};
}

std::vector<std::vector<double>> MacChannel::column_matrix() const {
  std::vector<std::vector<double>> m(y_size(), std::vector<double>(x_ * v_));
  for (std::size_t x = 0; x < x_; ++x)
    for (std::size_t v = 0; v < v_; ++v)
      for (std::size_t y = 0; y < y_size(); ++y) m[y][column_of(x, v)] = (*this)(y, x, v);
  return m;
}

void EncoderSpec::validate_against(const MacChannel& ch) const {
  if (px_given_u.input_size() != pu.size())
    throw std::invalid_argument("encoder: P_X|U input size != |U|");
  if (px_given_u.output_size() != ch.x_size())
    throw std::invalid_argument("encoder: P_X|U output size != channel |X|");
}

StochasticKernel clean_channel(const MacChannel& ch) {
  std::vector<double> p(ch.x_size() * ch.y_size());
  for (std::size_t x = 0; x < ch.x_size(); ++x)
    for (std::size_t y = 0; y < ch.y_size(); ++y) p[x * ch.y_size() + y] = ch(y, x, ch.silence());
  return {ch.x_size(), ch.y_size(), std::move(p)};
}

StochasticKernel effective_channel(const MacChannel& ch, const EncoderSpec& enc, std::size_t v) {
  enc.validate_against(ch);
  if (v >= ch.v_size()) throw std::invalid_argument("effective_channel: v out of range");
  const std::size_t nu = enc.u_size(), ny = ch.y_size();
  std::vector<double> p(nu * ny, 0.0);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t x = 0; x < ch.x_size(); ++x) {
      const double px = enc.px_given_u(x, u);
      if (px == 0.0) continue;
      for (std::size_t y = 0; y < ny; ++y) p[u * ny + y] += ch(y, x, v) * px;
    }
  return {nu, ny, std::move(p), 1e-9};
}

StochasticKernel effective_uv_channel(const MacChannel& ch, const EncoderSpec& enc) {
  enc.validate_against(ch);
  const std::size_t nu = enc.u_size(), nv = ch.v_size(), ny = ch.y_size();
  std::vector<double> p(nu * nv * ny, 0.0);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t x = 0; x < ch.x_size(); ++x) {
        const double px = enc.px_given_u(x, u);
        if (px == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) p[(u * nv + v) * ny + y] += ch(y, x, v) * px;
      }
  return {nu * nv, ny, std::move(p), 1e-9};
}

StochasticKernel attacked_channel(const MacChannel& ch, const EncoderSpec& enc,
                                  const Coupling& coupling) {
  const std::size_t nu = enc.u_size();
  if (coupling.output_size() != nu * ch.v_size())
    throw std::invalid_argument("attacked_channel: coupling output != |U||V|");
  const auto w = effective_uv_channel(ch, enc);
  return coupling.then(w);
}

Coupling silent_replay_coupling(const MacChannel& ch, std::size_t u_size) {
  const std::size_t nv = ch.v_size();
  std::vector<double> p(u_size * u_size * nv, 0.0);
  for (std::size_t u = 0; u < u_size; ++u) p[u * (u_size * nv) + u * nv + ch.silence()] = 1.0;
  return {u_size, u_size * nv, std::move(p)};
}

Sequence sample_output(const MacChannel& ch, std::span<const Symbol> x_seq,
                       std::span<const Symbol> v_seq, Rng& rng) {
  if (x_seq.size() != v_seq.size())
    throw std::invalid_argument("sample_output: sequences not aligned");
  Sequence y(x_seq.size());
  for (std::size_t i = 0; i < x_seq.size(); ++i) {
    if (x_seq[i] >= ch.x_size() || v_seq[i] >= ch.v_size())
      throw std::invalid_argument("sample_output: symbol out of range at position " +
                                  std::to_string(i));
    y[i] = rng.categorical(ch.law().row(x_seq[i] * ch.v_size() + v_seq[i]));
  }
  return y;
}

Sequence sample_output(const MacChannel& ch, std::span<const Symbol> x_seq,
                       std::span<const Symbol> v_seq, std::uint64_t seed) {
  Rng rng(seed);
  return sample_output(ch, x_seq, v_seq, rng);
}

MacChannel worked_example_channel() {
  // Columns (x, v): (0,0/), (1,0/), (0,0), (1,0), (0,1), (1,1).
  return MacChannel::from_column_matrix(2, 3, 0,
                                        {{.9, .1, .1, 0, 0, .9},
                                         {.1, .9, .9, 0, 0, .1},
                                         {0, 0, 0, 1, 1, 0}});
}

EncoderSpec crossover_encoder(double p, const Distribution& pu) {
  return {pu, StochasticKernel::from_rows({{1.0 - p, p}, {p, 1.0 - p}})};
}

}  // namespace macauth
