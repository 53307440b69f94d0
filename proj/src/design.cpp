#include "grlol/design.hpp"

#include <cmath>
#include <string>

#include "grlol/errors.hpp"
#include "grlol/kernels.hpp"

namespace grlol {

DesignMatrix::DesignMatrix(Matrix values)
    : values_(std::move(values))
{
    if (values_.rows() < 1 || values_.cols() < 1)
        throw Error(Errc::invalid_input, "design matrix must have at least one row and one column");
    if (!values_.allFinite())
        throw Error(Errc::invalid_input, "design matrix has non-finite entries");
}

DesignMatrix DesignMatrix::rows(std::span<const Index> which) const
{
    Matrix out(static_cast<Index>(which.size()), k());
    for (std::size_t i = 0; i < which.size(); ++i) out.row(static_cast<Index>(i)) = values_.row(which[i]);
    return DesignMatrix(std::move(out));
}

ResponseVector::ResponseVector(Vector values)
    : values_(std::move(values))
{
    if (values_.size() < 1)
        throw Error(Errc::invalid_input, "response vector is empty");
    if (!values_.allFinite())
        throw Error(Errc::invalid_input, "response vector has non-finite entries");
}

ResponseVector ResponseVector::rows(std::span<const Index> which) const
{
    Vector out(static_cast<Index>(which.size()));
    for (std::size_t i = 0; i < which.size(); ++i) out(static_cast<Index>(i)) = values_(which[i]);
    return ResponseVector(std::move(out));
}

NormalizedDesign normalize(const DesignMatrix& x)
{
    const Index k = x.k();
    Vector norm_sq = x.values().colwise().squaredNorm().transpose();
    for (Index l = 0; l < k; ++l) {
        if (!(norm_sq(l) > 0.0))
            throw Error(Errc::zero_column, "column " + std::to_string(l) + " has zero norm");
    }

    Matrix normalized = x.values();
    for (Index l = 0; l < k; ++l) normalized.col(l) /= std::sqrt(norm_sq(l));

    const double v_n = std::exp(norm_sq.array().log().mean());
    NormalizedDesign nd{x, norm_sq, std::move(normalized), Matrix(), v_n, 0.0, 0.0};
    nd.gram = kernels::gram(nd.normalized);
    nd.a_ratio = norm_sq.minCoeff() / v_n;
    nd.b_ratio = norm_sq.maxCoeff() / v_n;
    return nd;
}

Vector beta_to_alpha(const Vector& beta, const NormalizedDesign& nd)
{
    if (beta.size() != nd.k())
        throw Error(Errc::length_mismatch, "coefficient vector length " + std::to_string(beta.size()) +
                                               " does not match k = " + std::to_string(nd.k()));
    return (beta.array() * nd.col_norm_sq.array().sqrt()).matrix();
}

Vector alpha_to_beta(const Vector& alpha, const NormalizedDesign& nd)
{
    if (alpha.size() != nd.k())
        throw Error(Errc::length_mismatch, "coefficient vector length " + std::to_string(alpha.size()) +
                                               " does not match k = " + std::to_string(nd.k()));
    return (alpha.array() / nd.col_norm_sq.array().sqrt()).matrix();
}

Vector predict(const DesignMatrix& x, const Vector& beta)
{
    if (beta.size() != x.k())
        throw Error(Errc::dimension_mismatch, "coefficient vector length " + std::to_string(beta.size()) +
                                                  " does not match k = " + std::to_string(x.k()));
    return x.values() * beta;
}

} // namespace grlol
