#pragma once

#include <span>

#include "grlol/design.hpp"
#include "grlol/partition.hpp"

namespace grlol {

struct BlockCoherences
{
    double gamma = 0.0;    // max |Gamma_{ll'}| over l != l'
    double gamma_bt = 0.0; // pairs at different ranks (any groups)
    double gamma_bg = 0.0; // pairs at the same rank in different groups
};

/// Coherence split by the partition. Maxima over empty pair sets are 0.
/// Comparisons are exact on the stored doubles.
BlockCoherences block_coherences(const Matrix& gram, const Partition& part);

/// tau(I) = #I * gamma_bt + #{groups touched by I} * gamma_bg.
double tau_of_set(std::span<const Index> set, const Partition& part, double gamma_bt, double gamma_bg);
/// Same with squared coherences.
double r_of_set(std::span<const Index> set, const Partition& part, double gamma_bt, double gamma_bg);

/// Coherence summary of a (design, partition) pair.
///
/// t_star is the largest group size and tau_star/r_star use it. The
/// *_mean fields use the average group size k/p instead, which is the
/// convention of the reference coherence tables.
struct CoherenceReport
{
    double gamma = 0.0;
    double gamma_bt = 0.0;
    double gamma_bg = 0.0;
    Index t_star = 1;
    double tau_star = 0.0;
    double r_star = 0.0;
    Index n_star = 1;
    double nu = 0.5;
    double mean_group_size = 1.0;
    double tau_mean = 0.0;
    double r_mean = 0.0;
};

CoherenceReport coherence_report(const Matrix& gram, const Partition& part, double nu);

/// N* = floor(nu / tau_star) clamped to [1, p]; p when tau_star == 0.
Index leader_budget(const CoherenceReport& report, Index p);

struct RipCertificate
{
    double tau = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool certified = false; // tau <= nu
};

/// Extreme eigenvalues of the principal submatrix Gamma_I. When certified,
/// they lie in [1 - nu, 1 + nu].
RipCertificate rip_certificate(const NormalizedDesign& nd, std::span<const Index> set,
                               const Partition& part, double nu);

} // namespace grlol
