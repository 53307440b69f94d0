#include "grlol/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace grlol::kernels {

void set_worker_count(int workers)
{
    if (workers < 1) workers = omp_get_num_procs();
    omp_set_num_threads(workers);
}

int worker_count() { return omp_get_max_threads(); }

Matrix gram(const Matrix& x)
{
    const Index k = x.cols();
    Matrix g(k, k);
    #pragma omp parallel for schedule(dynamic, 4)
    for (Index i = 0; i < k; ++i) {
        for (Index j = i; j < k; ++j) {
            const double v = x.col(i).dot(x.col(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

Matrix gram_serial(const Matrix& x)
{
    const Index n = x.rows();
    const Index k = x.cols();
    Matrix g(k, k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = i; j < k; ++j) {
            double s = 0.0;
            for (Index r = 0; r < n; ++r) s += x(r, i) * x(r, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

Vector xty(const Matrix& x, const Vector& y)
{
    const Index k = x.cols();
    Vector out(k);
    #pragma omp parallel for schedule(static)
    for (Index i = 0; i < k; ++i) out(i) = x.col(i).dot(y);
    return out;
}

Vector xty_serial(const Matrix& x, const Vector& y)
{
    Vector out = Vector::Zero(x.cols());
    for (Index i = 0; i < x.cols(); ++i) {
        double s = 0.0;
        for (Index r = 0; r < x.rows(); ++r) s += x(r, i) * y(r);
        out(i) = s;
    }
    return out;
}

Vector offdiag_row_absmax(const Matrix& a)
{
    const Index k = a.rows();
    Vector out = Vector::Zero(k);
    #pragma omp parallel for schedule(static)
    for (Index i = 0; i < k; ++i) {
        double m = 0.0;
        for (Index j = 0; j < k; ++j) {
            if (j != i) m = std::max(m, std::abs(a(i, j)));
        }
        out(i) = m;
    }
    return out;
}

Vector offdiag_row_absmax_serial(const Matrix& a)
{
    const Index k = a.rows();
    Vector out = Vector::Zero(k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
            if (j == i) continue;
            out(i) = std::max(out(i), std::abs(a(i, j)));
        }
    }
    return out;
}

Vector upper_row_absmax(const Matrix& a)
{
    const Index k = a.rows();
    Vector out = Vector::Zero(k);
    #pragma omp parallel for schedule(dynamic, 16)
    for (Index i = 0; i < k; ++i) {
        double m = 0.0;
        for (Index j = i + 1; j < k; ++j) m = std::max(m, std::abs(a(i, j)));
        out(i) = m;
    }
    return out;
}

BlockMaxima block_absmax(const Matrix& g,
                         std::span<const Index> group_of,
                         std::span<const Index> rank_of)
{
    const Index k = g.rows();
    double all = 0.0, across = 0.0, same = 0.0;
    #pragma omp parallel for schedule(dynamic, 16) reduction(max : all, across, same)
    for (Index i = 0; i < k; ++i) {
        for (Index j = i + 1; j < k; ++j) {
            const double v = std::abs(g(i, j));
            all = std::max(all, v);
            if (rank_of[i] != rank_of[j]) {
                across = std::max(across, v);
            } else if (group_of[i] != group_of[j]) {
                same = std::max(same, v);
            }
        }
    }
    return {all, across, same};
}

BlockMaxima block_absmax_serial(const Matrix& g,
                                std::span<const Index> group_of,
                                std::span<const Index> rank_of)
{
    BlockMaxima out;
    const Index k = g.rows();
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) {
            if (i == j) continue;
            const double v = std::abs(g(i, j));
            out.all = std::max(out.all, v);
            if (rank_of[i] != rank_of[j]) out.across_ranks = std::max(out.across_ranks, v);
            if (rank_of[i] == rank_of[j] && group_of[i] != group_of[j])
                out.same_rank = std::max(out.same_rank, v);
        }
    }
    return out;
}

} // namespace grlol::kernels
