// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here, not tuned to the results.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "grlol/coherence.hpp"
#include "grlol/design.hpp"
#include "grlol/estimator.hpp"
#include "grlol/grouping.hpp"
#include "grlol/kernels.hpp"
#include "grlol/simulation.hpp"
#include "grlol/theory_oracle.hpp"

using namespace grlol;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail)
{
    std::printf("[%s] #%d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::mt19937_64 rep_rng(Seed base, int rep)
{
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(rep)};
    return std::mt19937_64(seq);
}

struct TableOneSample
{
    double gamma = 0.0;
    CoherenceReport bg, gg;
};

// One design of the coherence table: BRG grouping and the gathered grouping
// with the same number of groups, both filled at random.
TableOneSample table_one_sample(double pi, double rho, Seed base, int rep)
{
    auto rng = rep_rng(base, rep);
    const DesignMatrix x = sim::gen_design(200, 1000, pi, rho, rng);
    const Vector beta = sim::gen_beta(1000, 10, sim::SupportPlacement::random, rng);
    const auto resp = sim::gen_response(x, beta, 5.0, rng);
    const NormalizedDesign nd = normalize(x);
    const Vector r = correlations_with_target(nd, resp.y);
    const auto brg = brg_grouping(nd, r, FillMode::random, static_cast<Seed>(rep));
    const Partition gg = gathered_grouping(r, brg.plan.p_star, FillMode::random, static_cast<Seed>(rep));
    TableOneSample s;
    s.bg = coherence_report(nd.gram, brg.partition, 0.5);
    s.gg = coherence_report(nd.gram, gg, 0.5);
    s.gamma = s.bg.gamma;
    return s;
}

void criterion_1()
{
    std::vector<double> t, g, tau;
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = table_one_sample(0.0, 0.0, 101, rep);
        t.push_back(s.bg.mean_group_size);
        g.push_back(s.gamma);
        tau.push_back(s.bg.tau_mean);
    }
    const bool pass = std::abs(mean(t) - 1.40) <= 0.15 && std::abs(mean(g) - 0.327) <= 0.03 &&
                      std::abs(mean(tau) - 0.655) <= 0.07;
    report(1, "coherence table, independent design (BGr)", pass,
           "mean t*=" + fmt("%.3f", mean(t)) + " (1.40+-0.15), gamma=" + fmt("%.4f", mean(g)) +
               " (0.327+-0.03), tau*=" + fmt("%.4f", mean(tau)) + " (0.655+-0.07)");
}

void criterion_2()
{
    std::vector<double> bt_bg, bt_gg, tau_bg, tau_gg;
    int ordered = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = table_one_sample(0.2, 0.6, 202, rep);
        bt_bg.push_back(s.bg.gamma_bt);
        bt_gg.push_back(s.gg.gamma_bt);
        tau_bg.push_back(s.bg.tau_mean);
        tau_gg.push_back(s.gg.tau_mean);
        if (s.bg.tau_mean < s.gg.tau_mean) ++ordered;
    }
    const bool pass = std::abs(mean(bt_bg) - 0.260) <= 0.04 && std::abs(mean(bt_gg) - 0.73) <= 0.05 && ordered == 20;
    report(2, "coherence table, pi=0.2 rho=0.6 (BGr vs GGr)", pass,
           "gamma_BT BG=" + fmt("%.4f", mean(bt_bg)) + " (0.260+-0.04), GG=" + fmt("%.4f", mean(bt_gg)) +
               " (0.73+-0.05); tau* BG=" + fmt("%.3f", mean(tau_bg)) + " GG=" + fmt("%.3f", mean(tau_gg)) +
               "; BG<GG in " + std::to_string(ordered) + "/20");
}

void criteria_3_4()
{
    sim::SimConfig cfg;
    cfg.sparsity = {10, 30, 50};
    cfg.pi = {0.4};
    cfg.rho = {0.8};
    cfg.replications = 20;
    cfg.master_seed = 303;
    for (Strategy s : {Strategy::GGr, Strategy::GGc, Strategy::GGa, Strategy::BGa, Strategy::LOL})
        cfg.strategies.push_back(sim::StrategySpec::of(s));
    const auto rows = sim::summarize(sim::run_experiment(cfg));

    auto median = [&](const std::string& strat, Index S) {
        for (const auto& r : rows)
            if (r.strategy == strat && r.S == S) return r.median;
        return std::nan("");
    };
    bool pass3 = true;
    std::string detail3;
    for (Index S : {10, 30, 50}) {
        const double bga = median("BGa", S);
        double best_gg = std::numeric_limits<double>::infinity();
        for (const char* gg : {"GGr", "GGc", "GGa"}) best_gg = std::min(best_gg, median(gg, S));
        pass3 = pass3 && bga < best_gg;
        detail3 += "S=" + std::to_string(S) + ": BGa=" + fmt("%.4f", bga) + " best GG=" + fmt("%.4f", best_gg) + "; ";
    }
    report(3, "prediction error, BGa below every GG at pi=0.4 rho=0.8", pass3, detail3);

    const double ratio = median("LOL", 10) / median("BGa", 10);
    report(4, "LOL / GR-LOL(BGa) error ratio at pi=0.4 rho=0.8 S=10", ratio > 1.5,
           "ratio=" + fmt("%.3f", ratio) + " (> 1.5)");
}

void criterion_5()
{
    int below = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto rng = rep_rng(505, rep);
        const NormalizedDesign nd = normalize(sim::gen_design(200, 1000, 0.2, 0.5, rng));
        const auto plan = brg_plan(nd);
        if (plan.u2 < plan.u1) ++below;
    }
    report(5, "group-count plan has u2 < u1 at pi=0.2 rho=0.5", below >= 16,
           std::to_string(below) + "/20 replications (>= 16)");
}

void criterion_6()
{
    sim::SeparationConfig cfg;
    cfg.seed = 606;
    const auto res = sim::separation_experiment(cfg);
    report(6, "grouped vs ungrouped estimation, t*=16 q=0.5", res.ratio >= 2.0,
           "LOL mse=" + fmt("%.5f", res.lol_mse) + " GR-LOL mse=" + fmt("%.5f", res.grlol_mse) +
               " ratio=" + fmt("%.2f", res.ratio) + " (>= 2, predicted " + fmt("%.1f", std::pow(16.0, 0.5)) + ")");
}

void criteria_7_8()
{
    const auto reports = theory::run_verification_suite(200, 707);
    const auto& rip = reports[0];
    report(7, "RIP sandwich (direct, inverse, synthesis)", rip.passed(),
           std::to_string(rip.violations) + " violations in " + std::to_string(rip.instances) +
               " inequalities, worst lhs/rhs=" + fmt("%.4f", rip.worst_ratio));
    bool pass = true;
    std::string detail;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        pass = pass && reports[i].passed();
        detail += reports[i].name + ": " + std::to_string(reports[i].violations) + "/" +
                  std::to_string(reports[i].instances) + " worst " + fmt("%.4f", reports[i].worst_ratio) + "; ";
    }
    report(8, "projobis, normB, concR, projection bounds", pass, detail);
}

bool bitwise_equal(const Vector& a, const Vector& b)
{
    return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

void criterion_9()
{
    int equal = 0;
    for (int rep = 0; rep < 50; ++rep) {
        auto rng = rep_rng(909, rep);
        const Index n = std::uniform_int_distribution<Index>(30, 80)(rng);
        const Index k = std::uniform_int_distribution<Index>(10, 120)(rng);
        const DesignMatrix x = sim::gen_design(n, k, 0.3, 0.5, rng);
        const Vector beta = sim::gen_beta(k, std::min<Index>(k, 5), sim::SupportPlacement::random, rng);
        const auto resp = sim::gen_response(x, beta, 5.0, rng);
        ThresholdConfig cfg;
        cfg.seed = static_cast<Seed>(rep);
        if (rep % 2) {
            cfg.mode = ThresholdMode::theoretical;
            cfg.lambdas = ExplicitLambdas{1.0, 0.5};
        }
        const auto a = fit_lol(x, resp.y, cfg);
        const auto b = fit_grlol(x, resp.y, Partition::singletons(k), cfg);
        if (bitwise_equal(a.beta_final, b.beta_final) && bitwise_equal(a.beta_prelim, b.beta_prelim) &&
            a.leaders == b.leaders && a.p1 == b.p1)
            ++equal;
    }
    report(9, "LOL equals GR-LOL with singleton groups", equal == 50, std::to_string(equal) + "/50 bitwise equal");
}

void criterion_10()
{
    double worst = 0.0;
    int cases = 0;
    for (int rep = 0; rep < 40; ++rep) {
        auto rng = rep_rng(1010, rep);
        const Index n = 120, k = 60;
        Matrix g(n, k);
        std::normal_distribution<double> z;
        for (Index c = 0; c < k; ++c)
            for (Index i = 0; i < n; ++i) g(i, c) = z(rng);
        const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(n, k);
        const DesignMatrix x(q);
        const Index S = std::uniform_int_distribution<Index>(1, 5)(rng);
        const Vector beta = sim::gen_beta(k, S, sim::SupportPlacement::random, rng);
        const ResponseVector y(q * beta);

        // Random partition with group sizes 1..6; it covers every predictor,
        // hence the support.
        std::vector<Index> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<IndexSet> groups;
        for (std::size_t at = 0; at < order.size();) {
            const std::size_t len = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
            const std::size_t end = std::min(order.size(), at + len);
            groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at), order.begin() + static_cast<std::ptrdiff_t>(end));
            at = end;
        }
        const Partition part = Partition::from_groups(groups, k);
        ThresholdConfig cfg;
        cfg.seed = static_cast<Seed>(rep);
        for (const Partition& p : {part, Partition::singletons(k)}) {
            worst = std::max(worst, (fit_grlol(x, y, p, cfg).beta_final - beta).norm());
            ++cases;
        }
    }
    report(10, "noiseless recovery on orthonormal designs", worst < 1e-8,
           std::to_string(cases) + " fits, max ||beta_hat - beta||=" + fmt("%.3e", worst) + " (< 1e-8)");
}

void criterion_11()
{
    sim::SimConfig cfg;
    cfg.n = 80;
    cfg.k = 150;
    cfg.sparsity = {5, 10};
    cfg.pi = {0.0, 0.3};
    cfg.rho = {0.6};
    cfg.replications = 4;
    cfg.master_seed = 1111;
    auto run = [&](int workers) {
        kernels::set_worker_count(workers);
        const auto res = sim::run_experiment(cfg);
        return sim::format_results(sim::summarize(res)) + sim::format_raw(res);
    };
    const std::string a = run(1), b = run(1), c = run(3);
    kernels::set_worker_count(0);
    report(11, "simulation output is byte-identical across runs and worker counts", a == b && a == c,
           "1 worker twice: " + std::string(a == b ? "same" : "different") + ", 1 vs 3 workers: " +
               (a == c ? "same" : "different") + " (" + std::to_string(a.size()) + " bytes)");
}

void criterion_12()
{
    long checks = 0, broken = 0;
    for (int rep = 0; rep < 60; ++rep) {
        auto rng = rep_rng(1212, rep);
        const Index n = 100, k = 80;
        const DesignMatrix x = sim::gen_design(n, k, 0.3, 0.6, rng);
        const Vector beta = sim::gen_beta(k, 8, sim::SupportPlacement::random, rng);
        const auto resp = sim::gen_response(x, beta, 5.0, rng);
        const NormalizedDesign nd = normalize(x);
        const Vector r = correlations_with_target(nd, resp.y);
        const Partition part = gathered_grouping(r, 20, FillMode::absolute, 0);
        ThresholdConfig cfg;
        cfg.mode = ThresholdMode::theoretical;
        cfg.nu = 0.9;
        cfg.lambdas = ExplicitLambdas{0.0, 0.0};
        const auto fit = fit_grlol(nd, resp.y, part, cfg);
        std::vector<double> grid;
        for (int i = 0; i <= 40; ++i) grid.push_back(0.25 * i * std::uniform_real_distribution<double>(0.5, 1.5)(rng));
        std::sort(grid.begin(), grid.end());
        Vector prev = block_threshold(fit.beta_prelim, part, grid.front(), nd.col_norm_sq);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const Vector cur = block_threshold(fit.beta_prelim, part, grid[i], nd.col_norm_sq);
            for (Index l = 0; l < k; ++l) {
                ++checks;
                if (cur(l) != 0.0 && prev(l) == 0.0) ++broken;
            }
            prev = cur;
        }
    }
    report(12, "block-threshold survivors shrink as lambda2 grows", broken == 0,
           std::to_string(broken) + " violations over " + std::to_string(checks) + " coordinate comparisons");
}


// Not one of the numbered criteria: the reference absolute error level at
// pi=0, rho=0, S=10 for GGa (2.97e-2). Run on its own so its outcome is
// visible without masking the directional criteria.
void reference_error_scale()
{
    sim::SimConfig cfg;
    cfg.sparsity = {10};
    cfg.replications = 20;
    cfg.master_seed = 404;
    cfg.strategies = {sim::StrategySpec::of(Strategy::GGa)};
    const auto rows = sim::summarize(sim::run_experiment(cfg));
    const double med = rows.front().median;
    const double reference = 2.97e-2;
    report(0, "absolute E_Y of GGa at pi=0 rho=0 S=10 within a factor 2 of 2.97e-2",
           med >= reference / 2 && med <= reference * 2, "median=" + fmt("%.4g", med));
}

} // namespace

int main(int argc, char** argv)
{
    if (argc > 1 && std::string(argv[1]) == "--reference-error-scale") {
        reference_error_scale();
        return failures == 0 ? 0 : 1;
    }
    const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criteria_3_4, criterion_5,
                                                      criterion_6, criteria_7_8, criterion_9,  criterion_10,
                                                      criterion_11, criterion_12};
    for (const auto& c : criteria) c();
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
