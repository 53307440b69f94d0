#include <gtest/gtest.h>

#include <random>

#include "grlol/kernels.hpp"

namespace {
using namespace grlol;

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      m(i, j) = z(rng);
  return m;
}

TEST(Kernels, GramMatchesSerial) {
  Matrix x = random_matrix(37, 23, 1);
  Matrix g = kernels::gram(x);
  Matrix s = kernels::gram_serial(x);
  ASSERT_EQ(g.rows(), 23);
  EXPECT_LT((g - s).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(g, g.transpose());
}

TEST(Kernels, XtyMatchesSerial) {
  Matrix x = random_matrix(41, 13, 2);
  Vector y = random_matrix(41, 1, 3).col(0);
  EXPECT_LT((kernels::xty(x, y) - kernels::xty_serial(x, y)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernels, RowAbsMax) {
  Matrix a(3, 3);
  a << 1, -0.5, 0.2,
      -0.5, 1, 0.7,
      0.2, 0.7, 1;
  Vector m = kernels::offdiag_row_absmax(a);
  EXPECT_EQ(m(0), 0.5);
  EXPECT_EQ(m(1), 0.7);
  EXPECT_EQ(m(2), 0.7);
  EXPECT_EQ(m, kernels::offdiag_row_absmax_serial(a));

  Vector u = kernels::upper_row_absmax(a);
  EXPECT_EQ(u(0), 0.5);
  EXPECT_EQ(u(1), 0.7);
  EXPECT_EQ(u(2), 0.0);

  Matrix one(1, 1);
  one << 1;
  EXPECT_EQ(kernels::offdiag_row_absmax(one)(0), 0.0);
}

TEST(Kernels, BlockAbsMaxMatchesSerial) {
  Matrix g = kernels::gram(random_matrix(30, 12, 4));
  std::vector<Index> group_of{0, 0, 0, 1, 1, 2, 2, 2, 2, 3, 4, 4};
  std::vector<Index> rank_of{0, 1, 2, 0, 1, 0, 1, 2, 3, 0, 0, 1};
  auto p = kernels::block_absmax(g, group_of, rank_of);
  auto s = kernels::block_absmax_serial(g, group_of, rank_of);
  EXPECT_EQ(p.all, s.all);
  EXPECT_EQ(p.across_ranks, s.across_ranks);
  EXPECT_EQ(p.same_rank, s.same_rank);
  EXPECT_EQ(p.all, std::max(p.across_ranks, p.same_rank));
}

TEST(Kernels, WorkerCountDoesNotChangeBits) {
  Matrix x = random_matrix(64, 40, 5);
  Vector y = random_matrix(64, 1, 6).col(0);
  int before = kernels::worker_count();
  kernels::set_worker_count(1);
  Matrix g1 = kernels::gram(x);
  Vector r1 = kernels::xty(x, y);
  kernels::set_worker_count(4);
  Matrix g4 = kernels::gram(x);
  Vector r4 = kernels::xty(x, y);
  kernels::set_worker_count(before);
  EXPECT_EQ(g1, g4);
  EXPECT_EQ(r1, r4);
}
} // namespace
