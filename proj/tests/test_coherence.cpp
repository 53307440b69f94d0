#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "grlol/coherence.hpp"
#include "grlol/errors.hpp"

namespace {
using namespace grlol;

Matrix gaussian(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      m(i, j) = z(rng);
  return m;
}

Matrix two_by_two(double c) {
  Matrix g(2, 2);
  g << 1, c, c, 1;
  return g;
}

Partition random_partition(Index k, std::mt19937_64& rng) {
  std::vector<Index> order(k);
  for (Index l = 0; l < k; ++l)
    order[l] = l;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<IndexSet> groups;
  std::uniform_int_distribution<int> size(1, 4);
  for (Index at = 0; at < k;) {
    Index t = std::min<Index>(size(rng), k - at);
    groups.emplace_back(order.begin() + at, order.begin() + at + t);
    at += t;
  }
  return Partition::from_groups(groups, k);
}

TEST(Coherence, IdentityGram) {
  auto c = block_coherences(Matrix::Identity(5, 5), Partition::from_groups({{0, 1}, {2, 3, 4}}, 5));
  EXPECT_EQ(c.gamma, 0.0);
  EXPECT_EQ(c.gamma_bt, 0.0);
  EXPECT_EQ(c.gamma_bg, 0.0);
}

TEST(Coherence, TwoSingletons) {
  auto c = block_coherences(two_by_two(-0.3), Partition::singletons(2));
  EXPECT_EQ(c.gamma_bt, 0.0);
  EXPECT_EQ(c.gamma_bg, 0.3);
  EXPECT_EQ(c.gamma, 0.3);
}

TEST(Coherence, OneGroupOfTwo) {
  auto c = block_coherences(two_by_two(-0.3), Partition::from_groups({{0, 1}}, 2));
  EXPECT_EQ(c.gamma_bt, 0.3);
  EXPECT_EQ(c.gamma_bg, 0.0);
}

TEST(Coherence, MultiTaskBlockDiagonal) {
  // T = 3 tasks, 4 predictors per task; group j collects predictor j of every task.
  const Index tasks = 3, per = 4, rows = 10;
  Matrix x = Matrix::Zero(tasks * rows, tasks * per);
  for (Index t = 0; t < tasks; ++t)
    x.block(t * rows, t * per, rows, per) = gaussian(rows, per, 10 + t);
  NormalizedDesign nd = normalize(DesignMatrix(x));
  std::vector<IndexSet> groups(per);
  for (Index j = 0; j < per; ++j)
    for (Index t = 0; t < tasks; ++t)
      groups[j].push_back(t * per + j);
  auto c = block_coherences(nd.gram, Partition::from_groups(groups, tasks * per));
  EXPECT_EQ(c.gamma_bt, 0.0);
  EXPECT_GT(c.gamma_bg, 0.0);
}

TEST(Coherence, GammaIsBruteForceMaxForAnyPartition) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix g = normalize(DesignMatrix(gaussian(15, 20, 100 + trial))).gram;
    double brute = 0;
    for (Index a = 0; a < 20; ++a)
      for (Index b = 0; b < 20; ++b)
        if (a != b)
          brute = std::max(brute, std::abs(g(a, b)));
    Partition part = random_partition(20, rng);
    auto c = block_coherences(g, part);
    EXPECT_EQ(c.gamma, brute);
    EXPECT_EQ(std::max(c.gamma_bt, c.gamma_bg), c.gamma);

    double bt = 0, bg = 0;
    for (Index a = 0; a < 20; ++a)
      for (Index b = 0; b < 20; ++b) {
        if (a == b)
          continue;
        if (part.rank_of()[a] != part.rank_of()[b])
          bt = std::max(bt, std::abs(g(a, b)));
        else if (part.group_of()[a] != part.group_of()[b])
          bg = std::max(bg, std::abs(g(a, b)));
      }
    EXPECT_EQ(c.gamma_bt, bt);
    EXPECT_EQ(c.gamma_bg, bg);
  }
}

TEST(Coherence, SingletonPartitionHasNoBetweenRankPairs) {
  Matrix g = normalize(DesignMatrix(gaussian(12, 9, 3))).gram;
  auto r = coherence_report(g, Partition::singletons(9), 0.5);
  EXPECT_EQ(r.gamma_bt, 0.0);
  EXPECT_EQ(r.gamma_bg, r.gamma);
  EXPECT_EQ(r.tau_star, r.gamma_bg);
  EXPECT_DOUBLE_EQ(r.r_star, r.tau_star * r.tau_star);
}

TEST(Coherence, DimensionMismatch) {
  EXPECT_THROW(block_coherences(Matrix::Identity(3, 3), Partition::singletons(4)), Error);
}

TEST(Coherence, TauOfSet) {
  Partition part = Partition::from_groups({{0, 1, 2}, {3, 4}, {5}}, 6);
  EXPECT_EQ(tau_of_set({}, part, 0.1, 0.2), 0.0);
  std::vector<Index> set{0, 1, 3, 4};
  EXPECT_NEAR(tau_of_set(set, part, 0.1, 0.2), 0.8, 1e-15);
  EXPECT_NEAR(r_of_set(set, part, 0.1, 0.2), 0.12, 1e-15);
}

TEST(Coherence, GroupTausBoundedByStar) {
  Matrix g = normalize(DesignMatrix(gaussian(30, 16, 4))).gram;
  std::mt19937_64 rng(5);
  Partition part = random_partition(16, rng);
  auto r = coherence_report(g, part, 0.5);
  EXPECT_EQ(r.t_star, part.t_star());
  EXPECT_DOUBLE_EQ(r.tau_star, r.t_star * r.gamma_bt + r.gamma_bg);
  EXPECT_DOUBLE_EQ(r.r_star, r.t_star * r.gamma_bt * r.gamma_bt + r.gamma_bg * r.gamma_bg);
  for (Index j = 0; j < part.p(); ++j) {
    EXPECT_LE(tau_of_set(part.group(j), part, r.gamma_bt, r.gamma_bg), r.tau_star);
    EXPECT_LE(r_of_set(part.group(j), part, r.gamma_bt, r.gamma_bg), r.r_star);
  }
}

TEST(Coherence, LeaderBudget) {
  CoherenceReport r;
  r.nu = 0.5;
  r.tau_star = 0.1;
  EXPECT_EQ(leader_budget(r, 100), 5);
  r.tau_star = 0.0;
  EXPECT_EQ(leader_budget(r, 7), 7);
  r.tau_star = 0.7;
  EXPECT_EQ(leader_budget(r, 100), 1);
  r.tau_star = 0.001;
  EXPECT_EQ(leader_budget(r, 100), 100);
}

TEST(Coherence, RipIdentity) {
  Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(10, 4, 6)).householderQ() * Matrix::Identity(10, 4);
  NormalizedDesign nd = normalize(DesignMatrix(q));
  std::vector<Index> set{0, 2, 3};
  auto cert = rip_certificate(nd, set, Partition::singletons(4), 0.1);
  EXPECT_TRUE(cert.certified);
  EXPECT_NEAR(cert.lambda_min, 1.0, 1e-12);
  EXPECT_NEAR(cert.lambda_max, 1.0, 1e-12);
}

TEST(Coherence, RipTwoByTwo) {
  std::vector<Index> set{0, 1};
  for (double c : {0.25, -0.2, 0.4}) {
    Matrix x(2, 2);
    x << 1, c, 0, std::sqrt(1 - c * c);
    NormalizedDesign nd = normalize(DesignMatrix(x));
    auto cert = rip_certificate(nd, set, Partition::singletons(2), 0.5);
    // two singletons: tau = 2 |c|
    EXPECT_NEAR(cert.tau, 2 * std::abs(c), 1e-12);
    EXPECT_EQ(cert.certified, 2 * std::abs(c) <= 0.5);
    EXPECT_NEAR(cert.lambda_min, 1 - std::abs(c), 1e-12);
    EXPECT_NEAR(cert.lambda_max, 1 + std::abs(c), 1e-12);
  }
  NormalizedDesign nd = normalize(DesignMatrix(Matrix::Identity(2, 2)));
  EXPECT_THROW(rip_certificate(nd, std::vector<Index>{}, Partition::singletons(2), 0.5), Error);
}

TEST(Coherence, RipOnRandomAdmissibleSets) {
  NormalizedDesign nd = normalize(DesignMatrix(gaussian(200, 50, 7)));
  Partition part = Partition::singletons(50);
  auto c = block_coherences(nd.gram, part);
  std::mt19937_64 rng(8);
  const double nu = 0.5;
  int certified = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Index> order(50);
    for (Index l = 0; l < 50; ++l)
      order[l] = l;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> set;
    for (Index l : order) {
      set.push_back(l);
      if (tau_of_set(set, part, c.gamma_bt, c.gamma_bg) > nu) {
        set.pop_back();
        break;
      }
    }
    ASSERT_FALSE(set.empty());
    auto cert = rip_certificate(nd, set, part, nu);
    ASSERT_TRUE(cert.certified);
    ++certified;
    Matrix sub(set.size(), set.size());
    for (std::size_t a = 0; a < set.size(); ++a)
      for (std::size_t b = 0; b < set.size(); ++b)
        sub(a, b) = nd.gram(set[a], set[b]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
    EXPECT_NEAR(cert.lambda_min, es.eigenvalues().minCoeff(), 1e-10);
    EXPECT_NEAR(cert.lambda_max, es.eigenvalues().maxCoeff(), 1e-10);
    EXPECT_GE(cert.lambda_min, 1 - nu - 1e-8);
    EXPECT_LE(cert.lambda_max, 1 + nu + 1e-8);
  }
  EXPECT_EQ(certified, 50);
}
} // namespace
