#pragma once

#include <span>

#include "grlol/types.hpp"

namespace grlol {

/// Raw regression design: n observations (rows) by k predictors (columns).
/// Entries are finite; n, k >= 1.
class DesignMatrix
{
public:
    explicit DesignMatrix(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    Index n() const noexcept { return values_.rows(); }
    Index k() const noexcept { return values_.cols(); }

    /// Copy of the selected observations, in the given order.
    DesignMatrix rows(std::span<const Index> which) const;

private:
    Matrix values_;
};

/// Response observations; length must match the design it is used with.
class ResponseVector
{
public:
    explicit ResponseVector(Vector values);

    const Vector& values() const noexcept { return values_; }
    Index size() const noexcept { return values_.size(); }

    ResponseVector rows(std::span<const Index> which) const;

private:
    Vector values_;
};

/// Design with unit-norm columns and its Gram matrix.
///
/// col_norm_sq holds the squared column norms n_l of the raw design, so that
/// normalized = raw * diag(n_l)^{-1/2} and gram = normalized^T normalized has
/// a unit diagonal. v_n is the geometric mean of the n_l; a_ratio and
/// b_ratio are min and max of n_l / v_n (reported, never enforced).
///
/// The Gram matrix is dense: k = 5000 needs 200 MB.
struct NormalizedDesign
{
    DesignMatrix raw;
    Vector col_norm_sq;
    Matrix normalized;
    Matrix gram;
    double v_n = 0.0;
    double a_ratio = 0.0;
    double b_ratio = 0.0;

    Index n() const noexcept { return raw.n(); }
    Index k() const noexcept { return raw.k(); }
};

/// Throws Errc::zero_column when a column has zero norm.
NormalizedDesign normalize(const DesignMatrix& x);

/// alpha_l = sqrt(n_l) * beta_l.
Vector beta_to_alpha(const Vector& beta, const NormalizedDesign& nd);
Vector alpha_to_beta(const Vector& alpha, const NormalizedDesign& nd);

/// X * beta on the raw design.
Vector predict(const DesignMatrix& x, const Vector& beta);

} // namespace grlol
