#pragma once

#include <span>
#include <string>
#include <vector>

#include <random>

#include <Eigen/Cholesky>

#include "grlol/coherence.hpp"
#include "grlol/design.hpp"
#include "grlol/partition.hpp"

namespace grlol::theory {

/// Orthogonal projection onto the span of the columns X̃_I.
///
/// Applied matrix-free as X̃_I Γ_I⁻¹ X̃_Iᵗ x with a Cholesky factor of Γ_I.
/// Throws Errc::singular_gram when Γ_I is not numerically positive definite.
class ProjectionContext
{
public:
    ProjectionContext(const NormalizedDesign& nd, IndexSet set);

    const IndexSet& set() const noexcept { return set_; }
    Index dim() const noexcept { return static_cast<Index>(set_.size()); }

    /// P x.
    Vector project(const Vector& x) const;
    /// X̃_Iᵗ x.
    Vector correlations(const Vector& x) const;
    /// Γ_I⁻¹ X̃_Iᵗ x, the coordinates of P x in the I columns.
    Vector coefficients(const Vector& x) const;
    /// Dense n×n projector.
    Matrix materialize() const;

private:
    IndexSet set_;
    Matrix cols_;
    Eigen::LLT<Matrix> llt_;
};

/// ᾱ(I): coordinates of P_I[X̃ α].
Vector alpha_bar(const ProjectionContext& ctx, const NormalizedDesign& nd, const Vector& alpha);
/// α̂(I): coordinates of P_I[Y].
Vector alpha_hat(const ProjectionContext& ctx, const Vector& y);

/// Outcome of one checker. An inequality lhs <= rhs counts as violated when
/// (lhs - rhs) / max(1, rhs) > slack.
struct CheckReport
{
    std::string name;
    long instances = 0;   // inequalities evaluated
    long violations = 0;
    double worst_ratio = 0.0; // max lhs / rhs seen (0/0 counts as 0)
    double observed_min = 0.0; // checker-specific normalized quantity, see each checker
    double observed_max = 0.0;
    std::vector<std::string> failures; // first few violations, human readable

    bool passed() const noexcept { return violations == 0; }
    void merge(const CheckReport& other);
};

inline constexpr double kSlack = 1e-8;

/// (1-nu)^-1 v 6(1-nu)^-3 v 4(2nu^2-nu+2)(1-nu)^-4.
double kappa_projection(double nu);

/// Random predictor set with tau(I) <= nu: predictors in random order are
/// added while the budget allows, stopping at a random target size.
/// Empty when no single predictor is admissible.
IndexSet sample_admissible_set(const Partition& part, double gamma_bt, double gamma_bg, double nu,
                               std::mt19937_64& rng);

/// RIP sandwich on Γ_I, its inverse, and ‖X̃_I x‖² for random admissible I
/// and random x. observed_min/max track xᵗΓ_I x / ‖x‖².
/// Throws Errc::not_admissible when no set satisfies tau(I) <= nu.
CheckReport check_rip_family(const NormalizedDesign& nd, const Partition& part, double nu, int trials, Seed seed);

/// (1+nu)^-1 ‖X̃_Iᵗx‖² <= ‖P_I x‖² <= (1-nu)^-1 ‖X̃_Iᵗx‖² on random x.
/// observed_min/max track ‖P_I x‖² / ‖X̃_Iᵗx‖². Throws Errc::not_admissible
/// when tau(I) > nu.
CheckReport check_projobis(const NormalizedDesign& nd, const Partition& part, std::span<const Index> set,
                           double nu, int trials, Seed seed);

/// ‖B(C)‖²_I <= 2 ‖α‖²_{C,1} r(I), B(C)_l = sum_{l' in C, l' != l} Γ_{ll'} α_{l'}.
CheckReport check_normB(const NormalizedDesign& nd, const Partition& part, const Vector& alpha,
                        std::span<const Index> set_i, std::span<const Index> set_c);

/// For Y = X̃α + W and every group j:
/// (‖R‖_{G_j} - ‖α‖_{G_j})² <= 4 M² v_n r(G_j) + 2(1+nu) ‖P_{G_j} W‖².
/// Throws Errc::a3_violated when sum_j ‖α‖_{G_j,1}^q > M^q v_n^(q/2), and
/// Errc::not_admissible when tau* > nu.
CheckReport check_concR(const NormalizedDesign& nd, const Partition& part, const Vector& alpha, const Vector& noise,
                        double nu, double M, double q = 1.0);

/// ‖α̂ - α‖²_I <= kappa (‖α‖₁² r(I) + ‖P_I W‖² + ‖P_{G_B} W‖² r(I)), with
/// α̂ the least-squares coordinates of Y on the leader columns G_B and kappa
/// from kappa_projection. Throws Errc::not_subset_of_leaders unless
/// I ⊆ G_B, and Errc::not_admissible when tau(G_B) > nu.
CheckReport check_projection_bound(const NormalizedDesign& nd, const Partition& part, const Vector& alpha,
                                   const Vector& noise, std::span<const Index> leaders, std::span<const Index> set_i,
                                   double nu);

/// Monte Carlo frequency of ‖P_I W‖²/σ² >= z² against exp(-z²/16) at
/// z² = 8 #I. Advisory only.
struct Chi2Smoke
{
    double z_sq = 0.0;
    double frequency = 0.0;
    double bound = 0.0;
    bool within_bound = false;
};
Chi2Smoke chi2_smoke(const NormalizedDesign& nd, std::span<const Index> set, int draws, Seed seed);

/// Runs every checker over `trials` random admissible instances.
/// Reports are returned in a fixed order: rip_family, projobis, normB,
/// concR, projection.
std::vector<CheckReport> run_verification_suite(int trials, Seed seed);

} // namespace grlol::theory
