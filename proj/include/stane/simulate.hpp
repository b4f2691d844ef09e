#pragma once

// Ground-truth generation and Bernoulli sampling for the simulation studies.

#include "stane/likelihood.hpp"
#include "stane/optimizer.hpp"
#include "stane/random.hpp"
#include "stane/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace stane {

struct SimSpec {
  std::size_t n = 200;
  std::size_t t = 20;
  int k = 3;
  int r_s = 2;
  int r_d = 3;
  double s0 = 0.0;             // proportion of zero rows per U^(k)
  std::size_t min_group_size = 5;
  std::uint64_t seed = 1;

  std::size_t zero_rows() const {
    return static_cast<std::size_t>(std::llround(s0 * static_cast<double>(n)));
  }

  void validate() const {
    if (n < 2 || t < 1 || k < 1 || r_s < 0 || r_d < 0)
      throw ConfigError("simulation dimensions must be positive");
    if (static_cast<std::size_t>(k) * min_group_size > t)
      throw ConfigError("k * min_group_size exceeds the number of time points");
    if (static_cast<std::size_t>(k) > t) throw ConfigError("more groups than time points");
    if (!(s0 >= 0.0 && s0 < 1.0)) throw ConfigError("s0 must lie in [0, 1)");
    if (n - zero_rows() < static_cast<std::size_t>(r_d))
      throw ConfigError("sparsity leaves fewer nonzero rows than R_D");
    if (static_cast<std::size_t>(r_s + r_d) > n) throw ConfigError("R_S + R_D exceeds N");
  }
};

/// Labels with at least `min_size` slots per group, remaining slots uniform,
/// in random temporal order.
inline GroupLabels random_labels(std::size_t t, int k, std::size_t min_size, Rng& rng) {
  std::vector<int> l;
  l.reserve(t);
  for (int g = 1; g <= k; ++g) l.insert(l.end(), min_size, g);
  std::uniform_int_distribution<int> pick(1, k);
  while (l.size() < t) l.push_back(pick(rng));
  std::shuffle(l.begin(), l.end(), rng);
  return GroupLabels(std::move(l), k);
}

/// Entries Uniform(lo, hi), optionally `zero_rows` random rows cleared, then
/// projected so U^T U = N I over the nonzero rows.
inline Matrix random_group_embedding(std::size_t n, int r_d, std::size_t zero_rows, Rng& rng,
                                     double lo = 0.3, double hi = 0.8) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix u(static_cast<Eigen::Index>(n), r_d);
  for (Eigen::Index j = 0; j < u.cols(); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, j) = unif(rng);
  if (zero_rows > 0) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t r = 0; r < zero_rows; ++r) u.row(static_cast<Eigen::Index>(idx[r])).setZero();
  }
  return project_orthonormal(u).u;
}

inline ModelParams gen_truth(const SimSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, 0, Stream::truth);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> vdist(2.5, 3.0);

  ModelParams p;
  p.z.resize(static_cast<Eigen::Index>(spec.n), spec.r_s);
  for (Eigen::Index j = 0; j < p.z.cols(); ++j)
    for (Eigen::Index i = 0; i < p.z.rows(); ++i) p.z(i, j) = normal(rng);
  for (int k = 0; k < spec.k; ++k)
    p.u.push_back(random_group_embedding(spec.n, spec.r_d, spec.zero_rows(), rng));
  p.v.resize(spec.t);
  for (auto& vt : p.v) {
    vt.resize(spec.r_d);
    for (Eigen::Index r = 0; r < vt.size(); ++r) vt(r) = vdist(rng);
  }
  Rng lrng = make_rng(spec.seed, 0, Stream::labels);
  p.groups = random_labels(spec.t, spec.k, spec.min_group_size, lrng);
  p.validate();
  return p;
}

/// sigma(Theta^(t)) for every slice, diagonal zero.
inline std::vector<Matrix> probabilities(const ModelParams& p) {
  const Matrix s = shared_gram(p.z);
  std::vector<Matrix> out;
  out.reserve(p.n_times());
  for (std::size_t t = 0; t < p.n_times(); ++t) {
    Matrix th = theta_from(s, p.u_at(t), p.v[t]);
    Matrix pr = th.unaryExpr([](double x) { return sigmoid(x); });
    pr.diagonal().setZero();
    out.push_back(std::move(pr));
  }
  return out;
}

/// One Bernoulli draw per unordered pair i < j per slice, mirrored.
inline AdjacencyTensor sample_adjacency(const ModelParams& truth, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0, Stream::adjacency);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(truth.n_nodes());
  const Matrix s = shared_gram(truth.z);
  std::vector<Matrix> slices;
  slices.reserve(truth.n_times());
  for (std::size_t t = 0; t < truth.n_times(); ++t) {
    const Matrix th = theta_from(s, truth.u_at(t), truth.v[t]);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index j = 1; j < n; ++j)
      for (Eigen::Index i = 0; i < j; ++i)
        if (unif(rng) < sigmoid(th(i, j))) a(i, j) = a(j, i) = 1.0;
    slices.push_back(std::move(a));
  }
  return AdjacencyTensor(truth.n_nodes(), std::move(slices));
}

}  // namespace stane
