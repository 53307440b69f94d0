#include "grlol/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "grlol/errors.hpp"
#include "grlol/grouping.hpp"

namespace grlol {

namespace {

constexpr double kPivotTolerance = 1e-12;
constexpr double kCvTieTolerance = 1e-10;

Matrix gather_columns(const Matrix& x, std::span<const Index> cols)
{
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Index>(c)) = x.col(cols[c]);
    return out;
}

double group_norm(const Vector& beta, const IndexSet& members)
{
    double s = 0.0;
    for (Index l : members) s += beta(l) * beta(l);
    return std::sqrt(s);
}

void check_fit_inputs(Index n, Index k, const ResponseVector& y, const Partition& part)
{
    if (y.size() != n)
        throw Error(Errc::length_mismatch, "response has " + std::to_string(y.size()) +
                                               " observations, design has " + std::to_string(n));
    if (part.k() != k)
        throw Error(Errc::dimension_mismatch, "partition covers " + std::to_string(part.k()) +
                                                  " predictors, design has " + std::to_string(k));
}

} // namespace

double kappa_theorem(double nu)
{
    const double a = 1.0 - nu;
    return std::max({1.0 / a, 4.0 / (a * a), 2.0 * (2.0 * nu * nu - nu + 3.0) / (a * a * a)});
}

void validate_theory_params(const TheoryParams& tp, double nu)
{
    if (!(nu > 0.0 && nu < 1.0)) throw Error(Errc::invalid_constants, "nu must lie in (0, 1)");
    if (!(tp.sigma > 0.0)) throw Error(Errc::invalid_constants, "sigma must be positive");
    if (!(tp.M > 0.0)) throw Error(Errc::invalid_constants, "M must be positive");
    if (!(tp.q > 0.0 && tp.q <= 1.0)) throw Error(Errc::invalid_constants, "q must lie in (0, 1]");
    const double c2_min = 5.0 * std::sqrt(kappa_theorem(nu));
    if (tp.c2 < c2_min)
        throw Error(Errc::invalid_constants, "c2 = " + std::to_string(tp.c2) + " is below 5 sqrt(kappa) = " +
                                                 std::to_string(c2_min));
    const double c1_min = 4.0 + std::pow(nu, -1.0 / tp.q);
    if (tp.c1 < c1_min)
        throw Error(Errc::invalid_constants, "c1 = " + std::to_string(tp.c1) + " is below 4 + nu^(-1/q) = " +
                                                 std::to_string(c1_min));
    if (!(tp.c1 > tp.c2)) throw Error(Errc::invalid_constants, "c1 must exceed c2");
}

double lambda_star(double sigma, double M, const CoherenceReport& report, double v_n, Index p)
{
    if (p < 1) throw Error(Errc::bad_group_count, "p must be >= 1");
    const double t_star = static_cast<double>(report.t_star);
    const double size_term = std::max(t_star, std::log(static_cast<double>(p))) * (1.0 + report.nu);
    const double coherence_term = M * M * v_n * report.r_star;
    return sigma * std::sqrt(std::max(coherence_term, size_term));
}

LambdaSet theoretical_lambdas(const TheoryParams& tp, const CoherenceReport& report, double v_n, Index p)
{
    const double nu = report.nu;
    validate_theory_params(tp, nu);

    LambdaSet out;
    out.kappa = kappa_theorem(nu);
    out.lambda_star = lambda_star(tp.sigma, tp.M, report, v_n, p);
    out.lambda2 = tp.c2 * out.lambda_star;
    out.lambda1 = std::max(tp.c1 * out.lambda_star, 2.0 * tp.M * std::sqrt(v_n) * report.tau_star / nu);
    return out;
}

Vector rho_stats(const Vector& r, const Partition& part)
{
    if (r.size() != part.k())
        throw Error(Errc::length_mismatch, "correlation vector length does not match the partition");
    Vector rho = Vector::Zero(part.p());
    for (Index j = 0; j < part.p(); ++j)
        for (Index l : part.group(j)) rho(j) += r(l) * r(l);
    return rho;
}

std::vector<Index> rank_groups(const Vector& rho_sq)
{
    std::vector<Index> order(static_cast<std::size_t>(rho_sq.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return rho_sq(a) > rho_sq(b); });
    return order;
}

std::vector<Index> select_leaders_theoretical(const Vector& rho_sq, Index n_star, double lambda1)
{
    if (n_star < 1) throw Error(Errc::invalid_input, "leader budget must be >= 1");
    const auto order = rank_groups(rho_sq);
    if (order.empty()) return {};
    const Index budget = std::min<Index>(n_star, rho_sq.size());
    const double cutoff = std::max(rho_sq(order[static_cast<std::size_t>(budget - 1)]), lambda1 * lambda1);
    std::vector<Index> leaders;
    for (Index j : order)
        if (rho_sq(j) >= cutoff) leaders.push_back(j);
    return leaders;
}

EmpiricalLeaders select_leaders_empirical(const Vector& rho_sq, const Partition& part, Index n)
{
    if (rho_sq.size() != part.p())
        throw Error(Errc::length_mismatch, "rho^2 length does not match the number of groups");
    const auto order = rank_groups(rho_sq);
    EmpiricalLeaders out;
    Index total = 0;
    for (Index j : order) {
        if (total + part.size_of(j) >= n) break;
        total += part.size_of(j);
        out.leaders.push_back(j);
    }
    if (out.leaders.empty())
        throw Error(Errc::no_feasible_leader, "the top-ranked group has " + std::to_string(part.size_of(order.front())) +
                                                  " members, not fewer than n = " + std::to_string(n));
    out.p0 = static_cast<Index>(out.leaders.size());
    return out;
}

OlsOnLeaders ols_on_leaders(const DesignMatrix& x, const ResponseVector& y, const Partition& part,
                            std::span<const Index> leaders)
{
    check_fit_inputs(x.n(), x.k(), y, part);
    OlsOnLeaders out;
    out.beta = Vector::Zero(x.k());
    out.used_groups.assign(leaders.begin(), leaders.end());
    if (out.used_groups.empty()) return out;

    const IndexSet all_cols = part.members(out.used_groups);
    if (static_cast<Index>(all_cols.size()) >= x.n())
        throw Error(Errc::no_feasible_leader, "leader groups hold " + std::to_string(all_cols.size()) +
                                                  " predictors, OLS needs fewer than n = " + std::to_string(x.n()));

    while (!out.used_groups.empty()) {
        const IndexSet cols = part.members(out.used_groups);
        Eigen::ColPivHouseholderQR<Matrix> qr(gather_columns(x.values(), cols));
        qr.setThreshold(kPivotTolerance);
        if (qr.rank() == static_cast<Index>(cols.size())) {
            const Vector coef = qr.solve(y.values());
            for (std::size_t c = 0; c < cols.size(); ++c) out.beta(cols[c]) = coef(static_cast<Index>(c));
            return out;
        }
        out.dropped_groups.push_back(out.used_groups.back());
        out.used_groups.pop_back();
    }
    return out;
}

Vector block_threshold(const Vector& beta_prelim, const Partition& part, double lambda2, const Vector& col_norm_sq)
{
    if (beta_prelim.size() != part.k() || col_norm_sq.size() != part.k())
        throw Error(Errc::length_mismatch, "block_threshold inputs do not match the partition size");
    if (lambda2 < 0.0) throw Error(Errc::invalid_input, "lambda2 must be non-negative");
    Vector out = Vector::Zero(beta_prelim.size());
    for (Index j = 0; j < part.p(); ++j) {
        const double norm = group_norm(beta_prelim, part.group(j));
        for (Index l : part.group(j))
            if (norm >= lambda2 / std::sqrt(col_norm_sq(l))) out(l) = beta_prelim(l);
    }
    return out;
}

std::vector<int> make_folds(Index n, int folds, Seed seed)
{
    if (folds < 2 || folds > n)
        throw Error(Errc::invalid_config, "fold count " + std::to_string(folds) + " must lie in [2, n]");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = static_cast<int>(i * folds / n);
    return fold_of;
}

CvThreshold block_threshold_cv(const DesignMatrix& x, const ResponseVector& y, const Vector& beta_prelim,
                               const Partition& part, std::span<const Index> leaders, std::span<const int> fold_of,
                               int folds)
{
    check_fit_inputs(x.n(), x.k(), y, part);
    if (folds < 2) throw Error(Errc::invalid_config, "cross-validation needs at least 2 folds");
    if (static_cast<Index>(fold_of.size()) != x.n())
        throw Error(Errc::length_mismatch, "fold labels do not cover every observation");

    CvThreshold out;
    out.beta_final = Vector::Zero(x.k());
    if (leaders.empty()) return out;

    out.ranked_groups.assign(leaders.begin(), leaders.end());
    std::sort(out.ranked_groups.begin(), out.ranked_groups.end());
    std::vector<double> norms(static_cast<std::size_t>(part.p()), 0.0);
    for (Index j : out.ranked_groups) norms[static_cast<std::size_t>(j)] = group_norm(beta_prelim, part.group(j));
    std::stable_sort(out.ranked_groups.begin(), out.ranked_groups.end(), [&](Index a, Index b) {
        return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
    });

    const IndexSet cols = part.members(out.ranked_groups);
    std::vector<Index> prefix_end;
    Index acc = 0;
    for (Index j : out.ranked_groups) prefix_end.push_back(acc += part.size_of(j));

    const std::size_t p0 = out.ranked_groups.size();
    std::vector<double> error_sum(p0, 0.0);
    std::vector<int> valid(p0, 0);
    out.skipped_folds.assign(p0, 0);
    const Matrix xs = gather_columns(x.values(), cols);

    for (int f = 0; f < folds; ++f) {
        IndexSet train, test;
        for (Index i = 0; i < x.n(); ++i) (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        if (test.empty() || train.empty()) {
            for (auto& s : out.skipped_folds) ++s;
            continue;
        }
        Matrix a_train(static_cast<Index>(train.size()), xs.cols());
        Vector y_train(static_cast<Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            a_train.row(static_cast<Index>(i)) = xs.row(train[i]);
            y_train(static_cast<Index>(i)) = y.values()(train[i]);
        }
        Matrix a_test(static_cast<Index>(test.size()), xs.cols());
        Vector y_test(static_cast<Index>(test.size()));
        for (std::size_t i = 0; i < test.size(); ++i) {
            a_test.row(static_cast<Index>(i)) = xs.row(test[i]);
            y_test(static_cast<Index>(i)) = y.values()(test[i]);
        }

        // One unpivoted QR serves every nested prefix: the first m columns
        // factor as Q[:, :m] R[:m, :m].
        Eigen::HouseholderQR<Matrix> qr(a_train);
        Vector qty = y_train;
        qty.applyOnTheLeft(qr.householderQ().adjoint());
        const Matrix& packed = qr.matrixQR();
        const Index rank_cap = std::min(a_train.rows(), a_train.cols());

        double diag_max = 0.0, diag_min = std::numeric_limits<double>::infinity();
        Index scanned = 0;
        for (std::size_t j = 0; j < p0; ++j) {
            const Index m = prefix_end[j];
            if (m > rank_cap) {
                for (std::size_t jj = j; jj < p0; ++jj) ++out.skipped_folds[jj];
                break;
            }
            for (; scanned < m; ++scanned) {
                const double d = std::abs(packed(scanned, scanned));
                diag_max = std::max(diag_max, d);
                diag_min = std::min(diag_min, d);
            }
            if (!(diag_min > kPivotTolerance * diag_max)) {
                ++out.skipped_folds[j];
                continue;
            }
            const Vector coef = packed.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(qty.head(m));
            const double err = (y_test - a_test.leftCols(m) * coef).squaredNorm();
            error_sum[j] += err;
            ++valid[j];
        }
    }

    out.mean_error.resize(p0);
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p0; ++j) {
        out.mean_error[j] = valid[j] > 0 ? error_sum[j] / valid[j] : std::numeric_limits<double>::infinity();
        lowest = std::min(lowest, out.mean_error[j]);
    }
    // Errors within rounding of the minimum count as ties, otherwise a
    // noiseless fit picks up groups that only shave off 1e-30.
    const double tie = kCvTieTolerance * y.values().squaredNorm() / folds;
    std::size_t best = 0;
    while (best + 1 < p0 && !(out.mean_error[best] <= lowest + tie)) ++best;
    out.p1 = static_cast<Index>(best + 1);
    for (std::size_t j = 0; j <= best; ++j)
        for (Index l : part.group(out.ranked_groups[j])) out.beta_final(l) = beta_prelim(l);
    return out;
}

CvThreshold block_threshold_cv(const DesignMatrix& x, const ResponseVector& y, const Vector& beta_prelim,
                               const Partition& part, std::span<const Index> leaders, int folds, Seed seed)
{
    const auto fold_of = make_folds(x.n(), folds, seed);
    return block_threshold_cv(x, y, beta_prelim, part, leaders, fold_of, folds);
}

GrLolFit fit_grlol(const NormalizedDesign& nd, const ResponseVector& y, const Partition& part,
                   const ThresholdConfig& cfg)
{
    check_fit_inputs(nd.n(), nd.k(), y, part);

    GrLolFit fit{.partition = part, .diagnostics = coherence_report(nd.gram, part, cfg.nu), .R = {}, .rho_sq = {},
                 .leaders = {}, .leader_order = {}, .dropped_groups = {}, .beta_prelim = {}, .beta_final = {},
                 .p0 = 0, .p1 = 0, .retained_groups = {}, .rho_sq_cutoff = 0.0, .group_norm_cutoff = 0.0,
                 .lambdas = {}, .cv_error = {}, .cv_skipped = {}};
    fit.R = correlations_with_target(nd, y);
    fit.rho_sq = rho_stats(fit.R, part);

    std::vector<Index> candidates;
    if (cfg.mode == ThresholdMode::theoretical) {
        if (cfg.lambdas.has_value() == cfg.theory.has_value())
            throw Error(Errc::invalid_config, "theoretical mode needs exactly one of explicit lambdas or theory constants");
        LambdaSet ls;
        if (cfg.lambdas) {
            if (cfg.lambdas->lambda1 < 0.0 || cfg.lambdas->lambda2 < 0.0)
                throw Error(Errc::invalid_constants, "thresholds must be non-negative");
            ls.lambda1 = cfg.lambdas->lambda1;
            ls.lambda2 = cfg.lambdas->lambda2;
            ls.kappa = kappa_theorem(cfg.nu);
        } else {
            ls = theoretical_lambdas(*cfg.theory, fit.diagnostics, nd.v_n, part.p());
        }
        fit.lambdas = ls;
        candidates = select_leaders_theoretical(fit.rho_sq, fit.diagnostics.n_star, ls.lambda1);
        // #B <= N*, and OLS needs fewer unknowns than observations.
        while (static_cast<Index>(candidates.size()) > fit.diagnostics.n_star ||
               (!candidates.empty() && static_cast<Index>(part.members(candidates).size()) >= nd.n())) {
            fit.dropped_groups.push_back(candidates.back());
            candidates.pop_back();
        }
    } else {
        if (cfg.cv_train_fraction &&
            std::abs(*cfg.cv_train_fraction - (1.0 - 1.0 / cfg.cv_folds)) > 1e-9)
            throw Error(Errc::invalid_config, "cv_train_fraction must equal 1 - 1/cv_folds");
        candidates = select_leaders_empirical(fit.rho_sq, part, nd.n()).leaders;
    }

    auto ols = ols_on_leaders(nd.raw, y, part, candidates);
    fit.dropped_groups.insert(fit.dropped_groups.end(), ols.dropped_groups.begin(), ols.dropped_groups.end());
    fit.leader_order = ols.used_groups;
    fit.leaders = ols.used_groups;
    std::sort(fit.leaders.begin(), fit.leaders.end());
    fit.p0 = static_cast<Index>(fit.leaders.size());
    fit.beta_prelim = std::move(ols.beta);
    if (!fit.leader_order.empty()) fit.rho_sq_cutoff = fit.rho_sq(fit.leader_order.back());

    if (cfg.mode == ThresholdMode::theoretical) {
        fit.beta_final = block_threshold(fit.beta_prelim, part, fit.lambdas->lambda2, nd.col_norm_sq);
        for (Index j : fit.leaders) {
            bool kept = false;
            for (Index l : part.group(j)) kept = kept || fit.beta_final(l) != 0.0;
            if (kept) fit.retained_groups.push_back(j);
        }
        fit.group_norm_cutoff = fit.lambdas->lambda2;
    } else {
        auto cv = block_threshold_cv(nd.raw, y, fit.beta_prelim, part, fit.leader_order, cfg.cv_folds, cfg.seed);
        fit.beta_final = std::move(cv.beta_final);
        fit.retained_groups.assign(cv.ranked_groups.begin(), cv.ranked_groups.begin() + cv.p1);
        std::sort(fit.retained_groups.begin(), fit.retained_groups.end());
        if (cv.p1 > 0)
            fit.group_norm_cutoff = group_norm(fit.beta_prelim, part.group(cv.ranked_groups[static_cast<std::size_t>(cv.p1 - 1)]));
        fit.cv_error = std::move(cv.mean_error);
        fit.cv_skipped = std::move(cv.skipped_folds);
    }
    fit.p1 = static_cast<Index>(fit.retained_groups.size());
    return fit;
}

GrLolFit fit_grlol(const DesignMatrix& x, const ResponseVector& y, const Partition& part,
                   const ThresholdConfig& cfg)
{
    return fit_grlol(normalize(x), y, part, cfg);
}

GrLolFit fit_lol(const NormalizedDesign& nd, const ResponseVector& y, const ThresholdConfig& cfg)
{
    return fit_grlol(nd, y, Partition::singletons(nd.k()), cfg);
}

GrLolFit fit_lol(const DesignMatrix& x, const ResponseVector& y, const ThresholdConfig& cfg)
{
    return fit_lol(normalize(x), y, cfg);
}

double plugin_sigma(const DesignMatrix& x, const ResponseVector& y, const Partition& part, const Vector& rho_sq)
{
    check_fit_inputs(x.n(), x.k(), y, part);
    const auto order = rank_groups(rho_sq);
    const Index top = order.front();
    const Index t = part.size_of(top);
    if (t >= x.n())
        throw Error(Errc::no_feasible_leader, "top group is too large for a residual variance estimate");
    const Matrix a = gather_columns(x.values(), part.group(top));
    const Vector coef = a.colPivHouseholderQr().solve(y.values());
    const double rss = (y.values() - a * coef).squaredNorm();
    return std::sqrt(rss / static_cast<double>(x.n() - t));
}

} // namespace grlol
