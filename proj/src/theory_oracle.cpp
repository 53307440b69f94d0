#include "grlol/theory_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "grlol/errors.hpp"

namespace grlol::theory {

namespace {

constexpr std::size_t kMaxFailures = 8;

std::mt19937_64 derived_rng(Seed seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

Vector gaussian(Index len, std::mt19937_64& rng)
{
    std::normal_distribution<double> z;
    Vector v(len);
    for (Index i = 0; i < len; ++i) v(i) = z(rng);
    return v;
}

Matrix gram_block(const Matrix& gram, std::span<const Index> set)
{
    const Index m = static_cast<Index>(set.size());
    Matrix g(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) g(a, b) = gram(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]);
    return g;
}

Matrix columns_of(const Matrix& x, std::span<const Index> set)
{
    Matrix out(x.rows(), static_cast<Index>(set.size()));
    for (std::size_t c = 0; c < set.size(); ++c) out.col(static_cast<Index>(c)) = x.col(set[c]);
    return out;
}

double l1_over(const Vector& v, std::span<const Index> set)
{
    double s = 0.0;
    for (Index l : set) s += std::abs(v(l));
    return s;
}

double l2sq_over(const Vector& v, std::span<const Index> set)
{
    double s = 0.0;
    for (Index l : set) s += v(l) * v(l);
    return s;
}

// Records lhs <= rhs.
void assert_le(CheckReport& rep, double lhs, double rhs, const char* what)
{
    ++rep.instances;
    double ratio = 0.0;
    if (rhs > 0.0)
        ratio = lhs / rhs;
    else if (lhs > 0.0)
        ratio = std::numeric_limits<double>::infinity();
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if ((lhs - rhs) / std::max(1.0, rhs) > kSlack) {
        ++rep.violations;
        if (rep.failures.size() < kMaxFailures) {
            std::ostringstream os;
            os.precision(17);
            os << what << ": lhs=" << lhs << " rhs=" << rhs;
            rep.failures.push_back(os.str());
        }
    }
}

void observe(CheckReport& rep, double value)
{
    rep.observed_min = std::min(rep.observed_min, value);
    rep.observed_max = std::max(rep.observed_max, value);
}

CheckReport fresh(const char* name)
{
    CheckReport r;
    r.name = name;
    r.observed_min = std::numeric_limits<double>::infinity();
    r.observed_max = -std::numeric_limits<double>::infinity();
    return r;
}

void require_admissible(double tau, double nu, const char* what)
{
    if (tau > nu)
        throw Error(Errc::not_admissible, std::string(what) + ": tau = " + std::to_string(tau) +
                                              " exceeds nu = " + std::to_string(nu));
}

} // namespace

ProjectionContext::ProjectionContext(const NormalizedDesign& nd, IndexSet set)
    : set_(std::move(set))
{
    if (set_.empty()) throw Error(Errc::empty_set, "projection onto an empty set of columns");
    for (Index l : set_)
        if (l < 0 || l >= nd.k()) throw Error(Errc::invalid_input, "predictor index out of range");
    cols_ = columns_of(nd.normalized, set_);
    llt_.compute(gram_block(nd.gram, set_));
    if (llt_.info() != Eigen::Success || !(llt_.rcond() > 1e-12))
        throw Error(Errc::singular_gram, "Gram submatrix of " + std::to_string(set_.size()) +
                                             " columns is not positive definite");
}

Vector ProjectionContext::correlations(const Vector& x) const
{
    if (x.size() != cols_.rows()) throw Error(Errc::length_mismatch, "vector length differs from n");
    return cols_.transpose() * x;
}

Vector ProjectionContext::coefficients(const Vector& x) const { return llt_.solve(correlations(x)); }

Vector ProjectionContext::project(const Vector& x) const { return cols_ * coefficients(x); }

Matrix ProjectionContext::materialize() const
{
    return cols_ * llt_.solve(cols_.transpose());
}

Vector alpha_bar(const ProjectionContext& ctx, const NormalizedDesign& nd, const Vector& alpha)
{
    if (alpha.size() != nd.k()) throw Error(Errc::length_mismatch, "alpha length differs from k");
    return ctx.coefficients(nd.normalized * alpha);
}

Vector alpha_hat(const ProjectionContext& ctx, const Vector& y) { return ctx.coefficients(y); }

void CheckReport::merge(const CheckReport& other)
{
    instances += other.instances;
    violations += other.violations;
    worst_ratio = std::max(worst_ratio, other.worst_ratio);
    observed_min = std::min(observed_min, other.observed_min);
    observed_max = std::max(observed_max, other.observed_max);
    for (const auto& f : other.failures)
        if (failures.size() < kMaxFailures) failures.push_back(f);
}

double kappa_projection(double nu)
{
    const double a = 1.0 - nu;
    return std::max({1.0 / a, 6.0 / (a * a * a), 4.0 * (2.0 * nu * nu - nu + 2.0) / (a * a * a * a)});
}

IndexSet sample_admissible_set(const Partition& part, double gamma_bt, double gamma_bg, double nu,
                               std::mt19937_64& rng)
{
    std::vector<Index> order(static_cast<std::size_t>(part.k()));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t target = std::uniform_int_distribution<std::size_t>(1, order.size())(rng);
    IndexSet set;
    for (Index l : order) {
        set.push_back(l);
        if (tau_of_set(set, part, gamma_bt, gamma_bg) > nu) set.pop_back();
        if (set.size() == target) break;
    }
    std::sort(set.begin(), set.end());
    return set;
}

CheckReport check_rip_family(const NormalizedDesign& nd, const Partition& part, double nu, int trials, Seed seed)
{
    const auto bc = block_coherences(nd.gram, part);
    CheckReport rep = fresh("rip_family");
    auto rng = derived_rng(seed, 0);
    for (int t = 0; t < trials; ++t) {
        const IndexSet set = sample_admissible_set(part, bc.gamma_bt, bc.gamma_bg, nu, rng);
        if (set.empty())
            throw Error(Errc::not_admissible, "no predictor set satisfies tau(I) <= nu");
        const Matrix g = gram_block(nd.gram, set);
        const Vector x = gaussian(static_cast<Index>(set.size()), rng);
        const double nx = x.squaredNorm();
        const double quad = x.dot(g * x);
        const double inv = x.dot(g.fullPivLu().solve(x));
        const double synth = (columns_of(nd.normalized, set) * x).squaredNorm();
        observe(rep, quad / nx);
        assert_le(rep, (1.0 - nu) * nx, quad, "rip lower");
        assert_le(rep, quad, (1.0 + nu) * nx, "rip upper");
        assert_le(rep, nx / (1.0 + nu), inv, "inverse lower");
        assert_le(rep, inv, nx / (1.0 - nu), "inverse upper");
        assert_le(rep, (1.0 - nu) * nx, synth, "synthesis lower");
        assert_le(rep, synth, (1.0 + nu) * nx, "synthesis upper");
    }
    return rep;
}

CheckReport check_projobis(const NormalizedDesign& nd, const Partition& part, std::span<const Index> set,
                           double nu, int trials, Seed seed)
{
    const auto bc = block_coherences(nd.gram, part);
    require_admissible(tau_of_set(set, part, bc.gamma_bt, bc.gamma_bg), nu, "projobis");
    const ProjectionContext ctx(nd, IndexSet(set.begin(), set.end()));
    CheckReport rep = fresh("projobis");
    auto rng = derived_rng(seed, 1);
    for (int t = 0; t < trials; ++t) {
        const Vector x = gaussian(nd.n(), rng);
        const double corr = ctx.correlations(x).squaredNorm();
        const double proj = ctx.project(x).squaredNorm();
        if (corr > 0.0) observe(rep, proj / corr);
        assert_le(rep, corr / (1.0 + nu), proj, "projobis lower");
        assert_le(rep, proj, corr / (1.0 - nu), "projobis upper");
    }
    return rep;
}

CheckReport check_normB(const NormalizedDesign& nd, const Partition& part, const Vector& alpha,
                        std::span<const Index> set_i, std::span<const Index> set_c)
{
    if (alpha.size() != nd.k()) throw Error(Errc::length_mismatch, "alpha length differs from k");
    const auto bc = block_coherences(nd.gram, part);
    double lhs = 0.0;
    for (Index l : set_i) {
        double b = 0.0;
        for (Index lp : set_c)
            if (lp != l) b += nd.gram(l, lp) * alpha(lp);
        lhs += b * b;
    }
    const double a1 = l1_over(alpha, set_c);
    const double rhs = 2.0 * a1 * a1 * r_of_set(set_i, part, bc.gamma_bt, bc.gamma_bg);
    CheckReport rep = fresh("normB");
    if (rhs > 0.0) observe(rep, lhs / rhs);
    assert_le(rep, lhs, rhs, "normB");
    return rep;
}

CheckReport check_concR(const NormalizedDesign& nd, const Partition& part, const Vector& alpha, const Vector& noise,
                        double nu, double M, double q)
{
    if (alpha.size() != nd.k() || noise.size() != nd.n())
        throw Error(Errc::length_mismatch, "alpha or noise length does not match the design");
    if (!(q > 0.0 && q <= 1.0)) throw Error(Errc::invalid_constants, "q must lie in (0, 1]");
    double a3 = 0.0;
    for (Index j = 0; j < part.p(); ++j) a3 += std::pow(l1_over(alpha, part.group(j)), q);
    const double a3_bound = std::pow(M, q) * std::pow(nd.v_n, q / 2.0);
    if (a3 > a3_bound * (1.0 + 1e-12))
        throw Error(Errc::a3_violated, "sum of group l1 norms^q = " + std::to_string(a3) + " exceeds M^q v_n^(q/2) = " +
                                           std::to_string(a3_bound));
    const auto rep_coh = coherence_report(nd.gram, part, nu);
    require_admissible(rep_coh.tau_star, nu, "concR");

    const Vector y = nd.normalized * alpha + noise;
    const Vector r = nd.normalized.transpose() * y;
    CheckReport rep = fresh("concR");
    for (Index j = 0; j < part.p(); ++j) {
        const auto& g = part.group(j);
        const double d = std::sqrt(l2sq_over(r, g)) - std::sqrt(l2sq_over(alpha, g));
        const double pw = ProjectionContext(nd, g).project(noise).squaredNorm();
        const double rhs = 4.0 * M * M * nd.v_n * r_of_set(g, part, rep_coh.gamma_bt, rep_coh.gamma_bg) +
                           2.0 * (1.0 + nu) * pw;
        if (rhs > 0.0) observe(rep, d * d / rhs);
        assert_le(rep, d * d, rhs, "concR");
    }
    return rep;
}

CheckReport check_projection_bound(const NormalizedDesign& nd, const Partition& part, const Vector& alpha,
                                   const Vector& noise, std::span<const Index> leaders, std::span<const Index> set_i,
                                   double nu)
{
    if (alpha.size() != nd.k() || noise.size() != nd.n())
        throw Error(Errc::length_mismatch, "alpha or noise length does not match the design");
    const IndexSet gb = part.members(std::vector<Index>(leaders.begin(), leaders.end()));
    std::vector<Index> pos(static_cast<std::size_t>(nd.k()), -1);
    for (std::size_t c = 0; c < gb.size(); ++c) pos[static_cast<std::size_t>(gb[c])] = static_cast<Index>(c);
    for (Index l : set_i)
        if (l < 0 || l >= nd.k() || pos[static_cast<std::size_t>(l)] < 0)
            throw Error(Errc::not_subset_of_leaders, "predictor " + std::to_string(l) + " is not in a leader group");
    const auto bc = block_coherences(nd.gram, part);
    require_admissible(tau_of_set(gb, part, bc.gamma_bt, bc.gamma_bg), nu, "projection");

    const Vector y = nd.normalized * alpha + noise;
    const ProjectionContext leader_ctx(nd, gb);
    const Vector ahat = leader_ctx.coefficients(y);
    double lhs = 0.0;
    for (Index l : set_i) {
        const double d = ahat(pos[static_cast<std::size_t>(l)]) - alpha(l);
        lhs += d * d;
    }
    CheckReport rep = fresh("projection");
    if (set_i.empty()) {
        assert_le(rep, 0.0, 0.0, "projection");
        return rep;
    }
    const double ri = r_of_set(set_i, part, bc.gamma_bt, bc.gamma_bg);
    const double a1 = alpha.cwiseAbs().sum();
    const double pi_w = ProjectionContext(nd, IndexSet(set_i.begin(), set_i.end())).project(noise).squaredNorm();
    const double pb_w = leader_ctx.project(noise).squaredNorm();
    const double rhs = kappa_projection(nu) * (a1 * a1 * ri + pi_w + pb_w * ri);
    if (rhs > 0.0) observe(rep, lhs / rhs);
    assert_le(rep, lhs, rhs, "projection");
    return rep;
}

Chi2Smoke chi2_smoke(const NormalizedDesign& nd, std::span<const Index> set, int draws, Seed seed)
{
    if (draws < 1) throw Error(Errc::invalid_input, "chi2_smoke needs at least one draw");
    const ProjectionContext ctx(nd, IndexSet(set.begin(), set.end()));
    Chi2Smoke out;
    out.z_sq = 8.0 * static_cast<double>(ctx.dim());
    out.bound = std::exp(-out.z_sq / 16.0);
    auto rng = derived_rng(seed, 2);
    long hits = 0;
    for (int d = 0; d < draws; ++d)
        if (ctx.project(gaussian(nd.n(), rng)).squaredNorm() >= out.z_sq) ++hits;
    out.frequency = static_cast<double>(hits) / draws;
    out.within_bound = out.frequency <= out.bound;
    return out;
}

namespace {

struct Instance
{
    NormalizedDesign nd;
    Partition part;
    CoherenceReport coh;
    double nu;
};

Partition random_partition(Index k, std::mt19937_64& rng)
{
    std::vector<Index> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const Index max_size = std::uniform_int_distribution<Index>(1, 3)(rng);
    std::vector<IndexSet> groups;
    std::size_t at = 0;
    while (at < order.size()) {
        const auto len = static_cast<std::size_t>(std::uniform_int_distribution<Index>(1, max_size)(rng));
        const std::size_t end = std::min(order.size(), at + len);
        groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at), order.begin() + static_cast<std::ptrdiff_t>(end));
        at = end;
    }
    return Partition::from_groups(std::move(groups), k);
}

Instance random_instance(std::mt19937_64& rng)
{
    for (;;) {
        const Index n = std::uniform_int_distribution<Index>(500, 2000)(rng);
        const Index k = std::uniform_int_distribution<Index>(12, 36)(rng);
        Matrix x(n, k);
        std::normal_distribution<double> z;
        for (Index c = 0; c < k; ++c)
            for (Index i = 0; i < n; ++i) x(i, c) = z(rng);
        // Some instances share a weak common factor so coherences are not
        // all of the pure-noise size.
        if (std::bernoulli_distribution(0.5)(rng)) {
            const double w = std::uniform_real_distribution<double>(0.0, 0.12)(rng);
            const Vector f = gaussian(n, rng);
            for (Index c = 0; c < k; ++c) x.col(c) += w * f;
        }
        // Heterogeneous column scales exercise the n_l bookkeeping.
        for (Index c = 0; c < k; ++c) x.col(c) *= std::uniform_real_distribution<double>(0.5, 2.0)(rng);
        NormalizedDesign nd = normalize(DesignMatrix(std::move(x)));
        Partition part = random_partition(k, rng);
        CoherenceReport coh = coherence_report(nd.gram, part, 0.5);
        if (coh.tau_star >= 0.9) continue;
        const double nu = std::uniform_real_distribution<double>(std::max(0.3, coh.tau_star), 0.95)(rng);
        coh = coherence_report(nd.gram, part, nu);
        return Instance{std::move(nd), std::move(part), coh, nu};
    }
}

Vector random_alpha(Index k, std::mt19937_64& rng)
{
    Vector a = Vector::Zero(k);
    const Index s = std::uniform_int_distribution<Index>(1, k)(rng);
    std::vector<Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-1.0, 2.0)(rng));
    std::normal_distribution<double> z;
    for (Index i = 0; i < s; ++i) a(idx[static_cast<std::size_t>(i)]) = scale * z(rng);
    return a;
}

IndexSet random_subset(std::span<const Index> pool, std::mt19937_64& rng)
{
    IndexSet out;
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.1, 0.9)(rng));
    for (Index l : pool)
        if (coin(rng)) out.push_back(l);
    if (out.empty() && !pool.empty())
        out.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
    return out;
}

} // namespace

std::vector<CheckReport> run_verification_suite(int trials, Seed seed)
{
    if (trials < 1) throw Error(Errc::invalid_input, "verification needs at least one trial");
    std::vector<CheckReport> total{fresh("rip_family"), fresh("projobis"), fresh("normB"), fresh("concR"),
                                   fresh("projection")};
    for (int t = 0; t < trials; ++t) {
        auto rng = derived_rng(seed, static_cast<std::uint64_t>(t) + 1000);
        const Instance in = random_instance(rng);
        const Index k = in.nd.k();
        const auto bc = block_coherences(in.nd.gram, in.part);
        const Seed sub = rng();

        total[0].merge(check_rip_family(in.nd, in.part, in.nu, 1, sub));

        const IndexSet adm = sample_admissible_set(in.part, bc.gamma_bt, bc.gamma_bg, in.nu, rng);
        total[1].merge(check_projobis(in.nd, in.part, adm, in.nu, 1, sub));

        std::vector<Index> all(static_cast<std::size_t>(k));
        std::iota(all.begin(), all.end(), Index{0});
        const Vector alpha = random_alpha(k, rng);
        total[2].merge(check_normB(in.nd, in.part, alpha, random_subset(all, rng), random_subset(all, rng)));

        const double sigma = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
        const Vector noise = sigma * gaussian(in.nd.n(), rng);
        const double q = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
        double a3 = 0.0;
        for (Index j = 0; j < in.part.p(); ++j) a3 += std::pow(l1_over(alpha, in.part.group(j)), q);
        // Smallest radius compatible with the sparsity assumption.
        const double M = std::pow(a3, 1.0 / q) / std::sqrt(in.nd.v_n) * (1.0 + 1e-10);
        total[3].merge(check_concR(in.nd, in.part, alpha, noise, in.nu, M, q));

        std::vector<Index> group_order(static_cast<std::size_t>(in.part.p()));
        std::iota(group_order.begin(), group_order.end(), Index{0});
        std::shuffle(group_order.begin(), group_order.end(), rng);
        std::vector<Index> leaders;
        for (Index j : group_order) {
            leaders.push_back(j);
            if (tau_of_set(in.part.members(leaders), in.part, bc.gamma_bt, bc.gamma_bg) > in.nu) leaders.pop_back();
        }
        const IndexSet gb = in.part.members(leaders);
        total[4].merge(check_projection_bound(in.nd, in.part, alpha, noise, leaders, random_subset(gb, rng), in.nu));
    }
    return total;
}

} // namespace grlol::theory
