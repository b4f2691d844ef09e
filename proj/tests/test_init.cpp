#include "stane/eval.hpp"
#include "stane/init.hpp"
#include "stane/simulate.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

using namespace stane;
using stane::testing::random_params;
using stane::testing::random_tensor;

namespace {

double gram_deviation(const Matrix& u) {
  const double n = static_cast<double>(u.rows());
  return ((u.transpose() * u) / n - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

// Orthogonal projector onto the column space of u.
Matrix projector(const Matrix& u) { return u * (u.transpose() * u).inverse() * u.transpose(); }

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi, c = b - g * (b - a), d = a + g * (b - a);
  while (b - a > 1e-11) {
    if (f(c) < f(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(KMeans, SingleClusterIsAllOnes) {
  const AdjacencyTensor a = random_tensor(10, 5, 0.3, 1);
  EXPECT_EQ(kmeans_labels(a, 1, 1).labels, std::vector<int>(5, 1));
}

TEST(KMeans, DuplicateBlocksSeparateExactly) {
  const AdjacencyTensor base = random_tensor(15, 2, 0.4, 2);
  std::vector<Matrix> slices;
  const std::vector<int> truth = {1, 2, 2, 1, 1, 2, 1, 2};
  for (int g : truth) slices.push_back(base.slice(static_cast<std::size_t>(g - 1)));
  const AdjacencyTensor a(15, slices);
  const GroupLabels l = kmeans_labels(a, 2, 7);
  EXPECT_EQ(nmi(l.labels, truth), 1.0);
  EXPECT_EQ(l.labels.front(), 1);  // relabeled by first occurrence
}

TEST(KMeans, KEqualsTSeparatesDistinctSlices) {
  const AdjacencyTensor a = random_tensor(12, 5, 0.5, 3);
  const GroupLabels l = kmeans_labels(a, 5, 3);
  EXPECT_EQ(l.labels, (std::vector<int>{1, 2, 3, 4, 5}));
}

TEST(KMeans, TooManyClustersIsAnError) {
  EXPECT_THROW(kmeans_labels(random_tensor(6, 3, 0.5, 4), 4, 1), ConfigError);
}

TEST(KMeans, DeterministicGivenSeed) {
  const AdjacencyTensor a = random_tensor(20, 9, 0.3, 5);
  EXPECT_EQ(kmeans_labels(a, 3, 11).labels, kmeans_labels(a, 3, 11).labels);
}

TEST(KMeans, PermutationEquivariant) {
  SimSpec spec;
  spec.n = 60;
  spec.t = 12;
  spec.k = 3;
  spec.min_group_size = 3;
  spec.seed = 6;
  const AdjacencyTensor a = sample_adjacency(gen_truth(spec), 6);
  const std::vector<std::size_t> perm = {5, 2, 11, 0, 7, 9, 1, 3, 10, 4, 8, 6};
  std::vector<Matrix> shuffled;
  for (std::size_t i : perm) shuffled.push_back(a.slice(i));
  const GroupLabels orig = kmeans_labels(a, 3, 1);
  const GroupLabels perm_labels = kmeans_labels(AdjacencyTensor(60, shuffled), 3, 1);
  std::vector<int> back(12);
  for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = perm_labels.labels[i];
  EXPECT_EQ(nmi(back, orig.labels), 1.0);
}

TEST(FitSimplified, NullDynamicPartStaysSmall) {
  SimSpec spec;
  spec.n = 100;
  spec.t = 5;
  spec.k = 1;
  spec.r_d = 1;
  spec.min_group_size = 1;
  spec.seed = 7;
  ModelParams truth = gen_truth(spec);
  for (auto& v : truth.v) v.setZero();
  const AdjacencyTensor a = sample_adjacency(truth, 7);
  FitConfig cfg = FitConfig::simplified_defaults();
  cfg.seed = 7;
  const SimplifiedFit sf = fit_simplified(a, 2, 1, cfg);
  const double shared = (sf.params.z * sf.params.z.transpose()).norm() / 100.0;
  for (std::size_t t = 0; t < 5; ++t) {
    const double dyn = dynamic_part(sf.params.u_per_time[t], sf.params.v_per_time[t]).norm() / 100.0;
    EXPECT_LT(dyn, 0.1 * shared) << "slice " << t;
  }
}

TEST(FitSimplified, SingleSliceMatchesGroupModel) {
  const AdjacencyTensor a = random_tensor(15, 1, 0.4, 8);
  FitConfig cfg = FitConfig::simplified_defaults();
  cfg.max_iter = 50;
  const SimplifiedFit sf = fit_simplified(a, 2, 2, cfg);
  ModelParams one = sf.params.as_model();
  one.groups = GroupLabels::constant(1, 1);
  EXPECT_EQ(neg_log_lik(a, sf.params.as_model()), neg_log_lik(a, one));
}

TEST(FitSimplified, RecoversSimplifiedTruth) {
  const ModelParams truth = random_simplified_start(200, 10, 2, 3, 99);
  const AdjacencyTensor a = sample_adjacency(truth, 9);
  FitConfig cfg = FitConfig::simplified_defaults();
  cfg.seed = 9;
  const SimplifiedFit sf = fit_simplified(a, 2, 3, cfg);
  EXPECT_LT(p_error(probabilities(sf.params.as_model()), probabilities(truth)), 0.01);
  for (const Matrix& u : sf.params.u_per_time) EXPECT_LT(gram_deviation(u), 1e-6);
}

TEST(FitSimplified, InfeasibleDimensions) {
  EXPECT_THROW(fit_simplified(random_tensor(4, 2, 0.5, 1), 3, 2, FitConfig::simplified_defaults()), ConfigError);
}

TEST(BuildInit, SingleTimePerGroupRecoversFactors) {
  ModelParams per_time = random_simplified_start(30, 3, 2, 3, 10);
  per_time.v[0] << 3.0, -1.0, 2.0;
  per_time.v[1] << 0.5, 1.5, -2.5;
  per_time.v[2] << 1.0, 2.0, 4.0;
  const SimplifiedParams sp = SimplifiedParams::from_model(per_time);
  const ModelParams p = build_init(sp, GroupLabels({1, 2, 3}, 3));
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_LT((projector(p.u[t]) - projector(sp.u_per_time[t])).cwiseAbs().maxCoeff(), 1e-9);
    std::vector<double> got(p.v[t].data(), p.v[t].data() + 3), want(sp.v_per_time[t].data(),
                                                                     sp.v_per_time[t].data() + 3);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(got[static_cast<std::size_t>(r)], want[static_cast<std::size_t>(r)], 1e-9);
  }
  EXPECT_EQ(p.z, sp.z);
}

TEST(BuildInit, ZeroDynamicGivesZeroV) {
  ModelParams per_time = random_simplified_start(12, 4, 1, 2, 11);
  for (auto& v : per_time.v) v.setZero();
  const ModelParams p = build_init(SimplifiedParams::from_model(per_time), GroupLabels({1, 2, 1, 2}, 2));
  for (const Vector& v : p.v) EXPECT_LT(v.cwiseAbs().maxCoeff(), 1e-12);
  for (const Matrix& u : p.u) EXPECT_LT(gram_deviation(u), 1e-9);
}

TEST(BuildInit, EqualLabelsUseGlobalMean) {
  const ModelParams per_time = random_simplified_start(16, 4, 1, 2, 12);
  const SimplifiedParams sp = SimplifiedParams::from_model(per_time);
  const ModelParams p = build_init(sp, GroupLabels::constant(4, 1));
  Matrix mean = Matrix::Zero(16, 16);
  for (std::size_t t = 0; t < 4; ++t) mean += dynamic_part(sp.u_per_time[t], sp.v_per_time[t]) / 4.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(mean);
  // largest two |eigenvalues| of a mean of positive-v parts are the top two
  const Matrix top = es.eigenvectors().rightCols(2) * 4.0;
  EXPECT_LT((projector(p.u[0]) - projector(top)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(gram_deviation(p.u[0]), 1e-9);
}

TEST(BuildInit, EmptyGroupFallsBackToGlobalMean) {
  const ModelParams per_time = random_simplified_start(16, 4, 1, 2, 13);
  const SimplifiedParams sp = SimplifiedParams::from_model(per_time);
  const ModelParams all = build_init(sp, GroupLabels::constant(4, 1));
  const ModelParams p = build_init(sp, GroupLabels({1, 1, 1, 1}, 2));
  EXPECT_LT((projector(p.u[1]) - projector(all.u[0])).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(BuildInit, LeastSquaresDiagonalMatchesBruteForce) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ModelParams per_time = random_simplified_start(10, 2, 1, 2, 20 + s);
    const SimplifiedParams sp = SimplifiedParams::from_model(per_time);
    const ModelParams p = build_init(sp, GroupLabels::constant(2, 1));
    const Matrix& u = p.u[0];
    for (std::size_t t = 0; t < 2; ++t) {
      const Matrix d = dynamic_part(sp.u_per_time[t], sp.v_per_time[t]);
      Vector v = p.v[t];
      for (Eigen::Index r = 0; r < v.size(); ++r) {
        auto f = [&](double x) {
          Vector w = v;
          w(r) = x;
          return (d - u * w.asDiagonal() * u.transpose()).squaredNorm();
        };
        EXPECT_NEAR(golden_min(f, -20.0, 20.0), p.v[t](r), 1e-6) << "seed " << s << " t " << t << " r " << r;
      }
    }
  }
}

TEST(Initialize, EndToEndShapesAndConstraint) {
  SimSpec spec;
  spec.n = 60;
  spec.t = 8;
  spec.k = 2;
  spec.min_group_size = 3;
  spec.seed = 14;
  const AdjacencyTensor a = sample_adjacency(gen_truth(spec), 14);
  FitConfig pre = FitConfig::simplified_defaults();
  pre.max_iter = 200;
  pre.seed = 14;
  const InitResult ir = initialize(a, 2, 3, 2, pre);
  EXPECT_NO_THROW(ir.params.validate());
  EXPECT_EQ(ir.params.n_groups(), 2u);
  EXPECT_EQ(ir.params.groups, ir.kmeans);
  for (const Matrix& u : ir.params.u) EXPECT_LT(gram_deviation(u), 1e-9);
}
