#pragma once

#include <span>

#include "grlol/types.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP version (the one the
// library uses) and a plain serial reference kept for tests and benchmarks.
//
// The OpenMP versions compute every output entry with the same instruction
// sequence regardless of the thread count, so results are bitwise identical
// for any worker count. The serial references use naive summation and agree
// with them only up to rounding.
namespace grlol::kernels {

/// Sets the number of OpenMP workers used by the parallel kernels and the
/// replication runner. Values < 1 select the OpenMP default.
void set_worker_count(int workers);
int worker_count();

/// Gram matrix x^T x.
Matrix gram(const Matrix& x);
Matrix gram_serial(const Matrix& x);

/// x^T y.
Vector xty(const Matrix& x, const Vector& y);
Vector xty_serial(const Matrix& x, const Vector& y);

/// For every row i, max_{j != i} |a(i, j)| (0 for a 1x1 matrix).
Vector offdiag_row_absmax(const Matrix& a);
Vector offdiag_row_absmax_serial(const Matrix& a);

/// For every row i, max_{j > i} |a(i, j)| (0 for the last row).
Vector upper_row_absmax(const Matrix& a);

struct BlockMaxima
{
    double all = 0.0;          // every off-diagonal pair
    double across_ranks = 0.0; // pairs with different within-group rank
    double same_rank = 0.0;    // same rank, different group
};

/// Maxima of |g(l, l')| over l != l', split by the (group, rank) labels.
BlockMaxima block_absmax(const Matrix& g,
                         std::span<const Index> group_of,
                         std::span<const Index> rank_of);
BlockMaxima block_absmax_serial(const Matrix& g,
                                std::span<const Index> group_of,
                                std::span<const Index> rank_of);

} // namespace grlol::kernels
