#include "grlol/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "grlol/errors.hpp"
#include "grlol/kernels.hpp"

namespace grlol {

namespace {

Index groups_touched(std::span<const Index> set, const Partition& part)
{
    std::unordered_set<Index> seen;
    for (Index l : set) {
        if (l < 0 || l >= part.k())
            throw Error(Errc::invalid_input, "index " + std::to_string(l) + " out of range");
        seen.insert(part.group_of()[static_cast<std::size_t>(l)]);
    }
    return static_cast<Index>(seen.size());
}

void check_nu(double nu)
{
    if (!(nu > 0.0 && nu < 1.0))
        throw Error(Errc::invalid_input, "nu must lie in (0, 1)");
}

} // namespace

BlockCoherences block_coherences(const Matrix& gram, const Partition& part)
{
    if (gram.rows() != gram.cols() || gram.rows() != part.k())
        throw Error(Errc::dimension_mismatch, "Gram matrix is " + std::to_string(gram.rows()) + "x" +
                                                  std::to_string(gram.cols()) + " but the partition covers " +
                                                  std::to_string(part.k()) + " predictors");
    const auto m = kernels::block_absmax(gram, part.group_of(), part.rank_of());
    return {m.all, m.across_ranks, m.same_rank};
}

double tau_of_set(std::span<const Index> set, const Partition& part, double gamma_bt, double gamma_bg)
{
    const auto groups = groups_touched(set, part);
    return static_cast<double>(set.size()) * gamma_bt + static_cast<double>(groups) * gamma_bg;
}

double r_of_set(std::span<const Index> set, const Partition& part, double gamma_bt, double gamma_bg)
{
    const auto groups = groups_touched(set, part);
    return static_cast<double>(set.size()) * gamma_bt * gamma_bt +
           static_cast<double>(groups) * gamma_bg * gamma_bg;
}

CoherenceReport coherence_report(const Matrix& gram, const Partition& part, double nu)
{
    check_nu(nu);
    const auto bc = block_coherences(gram, part);
    CoherenceReport rep;
    rep.gamma = bc.gamma;
    rep.gamma_bt = bc.gamma_bt;
    rep.gamma_bg = bc.gamma_bg;
    rep.nu = nu;
    rep.t_star = part.t_star();
    const double t = static_cast<double>(rep.t_star);
    rep.tau_star = t * bc.gamma_bt + bc.gamma_bg;
    rep.r_star = t * bc.gamma_bt * bc.gamma_bt + bc.gamma_bg * bc.gamma_bg;
    rep.mean_group_size = part.mean_group_size();
    rep.tau_mean = rep.mean_group_size * bc.gamma_bt + bc.gamma_bg;
    rep.r_mean = rep.mean_group_size * bc.gamma_bt * bc.gamma_bt + bc.gamma_bg * bc.gamma_bg;
    rep.n_star = leader_budget(rep, part.p());
    return rep;
}

Index leader_budget(const CoherenceReport& report, Index p)
{
    check_nu(report.nu);
    if (p < 1) throw Error(Errc::bad_group_count, "leader budget needs p >= 1");
    if (report.tau_star <= 0.0) return p;
    const double raw = std::floor(report.nu / report.tau_star);
    if (raw >= static_cast<double>(p)) return p;
    return std::max<Index>(1, static_cast<Index>(raw));
}

RipCertificate rip_certificate(const NormalizedDesign& nd, std::span<const Index> set,
                               const Partition& part, double nu)
{
    check_nu(nu);
    if (set.empty()) throw Error(Errc::empty_set, "RIP certificate needs a non-empty index set");
    const auto bc = block_coherences(nd.gram, part);

    const auto m = static_cast<Index>(set.size());
    Matrix sub(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) sub(a, b) = nd.gram(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub, Eigen::EigenvaluesOnly);

    RipCertificate cert;
    cert.tau = tau_of_set(set, part, bc.gamma_bt, bc.gamma_bg);
    cert.lambda_min = eig.eigenvalues().minCoeff();
    cert.lambda_max = eig.eigenvalues().maxCoeff();
    cert.certified = cert.tau <= nu;
    return cert;
}

} // namespace grlol
