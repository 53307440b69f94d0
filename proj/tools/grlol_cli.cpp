// grlol command-line front end.
//
//   grlol fit       --design X.csv --response y.csv (--partition P.csv | --strategy BGa) --out beta.csv
//   grlol group     --design X.csv --response y.csv --strategy BGa --out P.csv [--plan plan.csv]
//   grlol coherence --design X.csv [--partition P.csv] --out report.txt
//   grlol simulate  --config sim.ini --out results.csv [--raw raw.csv] [--ratio ratio.csv]
//   grlol verify    --trials 200 --seed 7
//   grlol ratio     --numer a.csv --denom b.csv --out ratio.csv
//
// Exit status: 0 success, 1 computation error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "grlol/coherence.hpp"
#include "grlol/design.hpp"
#include "grlol/errors.hpp"
#include "grlol/estimator.hpp"
#include "grlol/grouping.hpp"
#include "grlol/io.hpp"
#include "grlol/kernels.hpp"
#include "grlol/simulation.hpp"
#include "grlol/theory_oracle.hpp"

using namespace grlol;

namespace {

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::string f(double v) { return io::format_double(v); }

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Strategy strategy_or_usage(const std::string& name)
{
    const auto s = parse_strategy(name);
    if (!s) throw UsageError("unknown strategy '" + name + "' (GGr, GGc, GGa, BGr, BGc, BGa, LOL)");
    return *s;
}

// Partition for a named strategy; BRG strategies also hand back their plan.
Partition build_partition(const NormalizedDesign& nd, const ResponseVector& y, Strategy s, Seed seed,
                          std::optional<BrgPlan>& plan)
{
    if (s == Strategy::LOL) return Partition::singletons(nd.k());
    const Vector r = correlations_with_target(nd, y);
    plan = brg_plan(nd);
    if (is_boosting(s)) return brg_partition(*plan, r, fill_mode_of(s), seed);
    return gathered_grouping(r, plan->p_star, fill_mode_of(s), seed);
}

void append_coherence(io::Record& rec, const CoherenceReport& c)
{
    rec.emplace_back("gamma", f(c.gamma));
    rec.emplace_back("gamma_bt", f(c.gamma_bt));
    rec.emplace_back("gamma_bg", f(c.gamma_bg));
    rec.emplace_back("t_star", std::to_string(c.t_star));
    rec.emplace_back("tau_star", f(c.tau_star));
    rec.emplace_back("r_star", f(c.r_star));
    rec.emplace_back("n_star", std::to_string(c.n_star));
    rec.emplace_back("nu", f(c.nu));
    rec.emplace_back("mean_group_size", f(c.mean_group_size));
    rec.emplace_back("tau_mean", f(c.tau_mean));
    rec.emplace_back("r_mean", f(c.r_mean));
}

std::string plan_table(const BrgPlan& plan, double u_max, int points)
{
    std::ostringstream os;
    os << "u,g,p,p_log_p\n";
    for (const auto& s : sample_plan(plan, u_max, points))
        os << f(s.u) << ',' << f(s.g) << ',' << f(s.p) << ',' << f(s.p_log_p) << '\n';
    return os.str();
}

std::string fmt_fixed(double v, int prec)
{
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Group-sparse regression with two-step block thresholding and automatic grouping"};
    app.require_subcommand(1);
    int threads = 0;
    if (const char* env = std::getenv("GRLOL_THREADS")) threads = std::atoi(env);
    app.add_option("--threads", threads, "Worker threads (default: GRLOL_THREADS, else all cores)");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit GR-LOL on a design and response");
    std::string fit_design, fit_response, fit_partition, fit_strategy, fit_out, fit_report, fit_mode = "empirical";
    double fit_nu = 0.5;
    std::optional<double> fit_l1, fit_l2;
    TheoryParams tp;
    bool fit_theory = false;
    int fit_folds = 5;
    Seed fit_seed = 0;
    fit->add_option("--design", fit_design, "Design matrix file (rows = observations)")->required();
    fit->add_option("--response", fit_response, "Response file (one value per row)")->required();
    auto* fit_part_opt = fit->add_option("--partition", fit_partition, "Partition file (group,predictor,rank)");
    fit->add_option("--strategy", fit_strategy, "Group inline with GGr|GGc|GGa|BGr|BGc|BGa|LOL")->excludes(fit_part_opt);
    fit->add_option("--mode", fit_mode, "Threshold mode")->check(CLI::IsMember({"empirical", "theoretical"}));
    fit->add_option("--nu", fit_nu, "RIP budget nu in (0, 1)");
    fit->add_option("--lambda1", fit_l1, "Explicit leader threshold (theoretical mode)");
    fit->add_option("--lambda2", fit_l2, "Explicit block threshold (theoretical mode)");
    fit->add_flag("--theory", fit_theory, "Derive lambdas from --sigma --M --q --c1 --c2 (theoretical mode)");
    auto* sigma_opt = fit->add_option("--sigma", tp.sigma,
                                      "Noise level for the derived lambdas (default: residual plug-in estimate)");
    fit->add_option("--M", tp.M, "Sparsity radius for the derived lambdas");
    fit->add_option("--q", tp.q, "Between-group exponent for the derived lambdas");
    fit->add_option("--c1", tp.c1, "Leader constant for the derived lambdas");
    fit->add_option("--c2", tp.c2, "Block constant for the derived lambdas");
    fit->add_option("--cv-folds", fit_folds, "Cross-validation folds (empirical mode)");
    fit->add_option("--seed", fit_seed, "Seed for folds and random fills");
    fit->add_option("--out", fit_out, "Coefficient output file (index,value)")->required();
    fit->add_option("--report", fit_report, "Optional key=value fit report");

    // group
    auto* grp = app.add_subcommand("group", "Build a partition with a grouping strategy");
    std::string grp_design, grp_response, grp_strategy = "BGa", grp_out, grp_plan;
    double grp_nu = 0.5, grp_umax = 0.0;
    int grp_points = 200;
    Seed grp_seed = 0;
    grp->add_option("--design", grp_design, "Design matrix file")->required();
    grp->add_option("--response", grp_response, "Response file")->required();
    grp->add_option("--strategy", grp_strategy, "GGr|GGc|GGa|BGr|BGc|BGa|LOL");
    grp->add_option("--nu", grp_nu, "nu used for the coherence summary");
    grp->add_option("--seed", grp_seed, "Seed for random fills");
    grp->add_option("--out", grp_out, "Partition output file")->required();
    grp->add_option("--plan", grp_plan, "Optional table of u, k/u, p(u), p(u) log p(u)");
    grp->add_option("--plan-points", grp_points, "Rows in the plan table");
    grp->add_option("--u-max", grp_umax, "Largest u in the plan table (default 2 u*)");

    // coherence
    auto* coh = app.add_subcommand("coherence", "Coherence report of a design and partition");
    std::string coh_design, coh_partition, coh_out, coh_gram;
    double coh_nu = 0.5;
    coh->add_option("--design", coh_design, "Design matrix file")->required();
    coh->add_option("--partition", coh_partition, "Partition file (default: singletons)");
    coh->add_option("--nu", coh_nu, "RIP budget nu in (0, 1)");
    coh->add_option("--out", coh_out, "Report output file (key=value)")->required();
    coh->add_option("--gram", coh_gram, "Optional Gram matrix output file");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a simulation experiment");
    std::string sim_config, sim_out, sim_raw, sim_ratio;
    sim->add_option("--config", sim_config, "Experiment INI file")->required();
    sim->add_option("--out", sim_out, "Results table (strategy,S,pi,rho,median_EY,std_EY,K)")->required();
    sim->add_option("--raw", sim_raw, "Optional per-replication errors");
    sim->add_option("--ratio", sim_ratio, "Optional ratio table against the configured reference");

    // verify
    auto* ver = app.add_subcommand("verify", "Check the projection and coherence inequalities numerically");
    int ver_trials = 200, ver_chi2 = 0;
    Seed ver_seed = 7;
    std::string ver_out;
    ver->add_option("--trials", ver_trials, "Random instances per checker");
    ver->add_option("--seed", ver_seed, "Seed");
    ver->add_option("--chi2-draws", ver_chi2, "Advisory Monte Carlo tail check draws (0 = skip)");
    ver->add_option("--out", ver_out, "Optional copy of the table");

    // ratio
    auto* rat = app.add_subcommand("ratio", "Cellwise ratio of medians between two result tables");
    std::string rat_numer, rat_denom, rat_out, rat_ref;
    rat->add_option("--numer", rat_numer, "Numerator results table")->required();
    rat->add_option("--denom", rat_denom, "Denominator results table")->required();
    rat->add_option("--reference", rat_ref, "Divide every row by this strategy's row instead of matching strategies");
    rat->add_option("--out", rat_out, "Ratio table output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        kernels::set_worker_count(threads);

        if (*fit) {
            ThresholdConfig cfg;
            cfg.mode = fit_mode == "empirical" ? ThresholdMode::empirical : ThresholdMode::theoretical;
            cfg.nu = fit_nu;
            cfg.cv_folds = fit_folds;
            cfg.seed = fit_seed;
            if (cfg.mode == ThresholdMode::theoretical) {
                if (fit_theory == (fit_l1 || fit_l2))
                    throw UsageError("theoretical mode needs either --lambda1/--lambda2 or --theory");
                if (fit_theory) cfg.theory = tp;
                else {
                    if (!fit_l1 || !fit_l2) throw UsageError("--lambda1 and --lambda2 go together");
                    cfg.lambdas = ExplicitLambdas{*fit_l1, *fit_l2};
                }
            } else if (fit_theory || fit_l1 || fit_l2) {
                throw UsageError("lambdas are only used in theoretical mode");
            }
            if (fit_partition.empty() && fit_strategy.empty()) throw UsageError("give --partition or --strategy");
            const std::optional<Strategy> strat =
                fit_strategy.empty() ? std::nullopt : std::optional<Strategy>(strategy_or_usage(fit_strategy));

            const DesignMatrix x = io::read_design(fit_design);
            const ResponseVector y = io::read_response(fit_response);
            if (y.size() != x.n())
                throw Error(Errc::length_mismatch, "response has " + std::to_string(y.size()) + " rows, design has " +
                                                       std::to_string(x.n()));
            const NormalizedDesign nd = normalize(x);
            std::optional<BrgPlan> plan;
            const Partition part =
                strat ? build_partition(nd, y, *strat, fit_seed, plan) : io::read_partition(fit_partition, x.k());
            std::string sigma_source;
            if (cfg.theory) {
                sigma_source = "given";
                if (sigma_opt->count() == 0) {
                    cfg.theory->sigma = plugin_sigma(x, y, part, rho_stats(correlations_with_target(nd, y), part));
                    sigma_source = "plugin";
                }
            }
            const GrLolFit fr = fit_grlol(nd, y, part, cfg);

            io::write_coefficients(fit_out, fr.beta_final);
            io::Record manifest{{"command", "fit"},
                                {"design", fit_design},
                                {"response", fit_response},
                                {"grouping", strat ? "strategy:" + fit_strategy : "partition:" + fit_partition},
                                {"mode", fit_mode},
                                {"nu", f(fit_nu)},
                                {"cv_folds", std::to_string(fit_folds)},
                                {"seed", std::to_string(fit_seed)}};
            if (cfg.lambdas) {
                manifest.emplace_back("lambda1", f(cfg.lambdas->lambda1));
                manifest.emplace_back("lambda2", f(cfg.lambdas->lambda2));
            }
            if (cfg.theory) {
                manifest.emplace_back("sigma", f(cfg.theory->sigma));
                manifest.emplace_back("sigma_source", sigma_source);
                manifest.emplace_back("M", f(cfg.theory->M));
                manifest.emplace_back("q", f(cfg.theory->q));
                manifest.emplace_back("c1", f(cfg.theory->c1));
                manifest.emplace_back("c2", f(cfg.theory->c2));
            }
            io::write_manifest(fit_out, manifest);
            if (!fit_report.empty()) {
                io::Record rep{{"n", std::to_string(x.n())}, {"k", std::to_string(x.k())},
                               {"p", std::to_string(part.p())}, {"mode", fit_mode}};
                append_coherence(rep, fr.diagnostics);
                rep.emplace_back("v_n", f(nd.v_n));
                rep.emplace_back("p0", std::to_string(fr.p0));
                rep.emplace_back("p1", std::to_string(fr.p1));
                rep.emplace_back("leaders", io::format_indices(fr.leaders));
                rep.emplace_back("dropped_groups", io::format_indices(fr.dropped_groups));
                rep.emplace_back("retained_groups", io::format_indices(fr.retained_groups));
                rep.emplace_back("rho_sq_cutoff", f(fr.rho_sq_cutoff));
                rep.emplace_back("group_norm_cutoff", f(fr.group_norm_cutoff));
                if (fr.lambdas) {
                    rep.emplace_back("lambda_star", f(fr.lambdas->lambda_star));
                    rep.emplace_back("lambda1", f(fr.lambdas->lambda1));
                    rep.emplace_back("lambda2", f(fr.lambdas->lambda2));
                    rep.emplace_back("kappa", f(fr.lambdas->kappa));
                }
                io::write_record(fit_report, rep);
                io::write_manifest(fit_report, manifest);
            }
            std::cout << "p0=" << fr.p0 << " p1=" << fr.p1 << " nonzero=" << (fr.beta_final.array() != 0.0).count()
                      << '\n';
        } else if (*grp) {
            const Strategy s = strategy_or_usage(grp_strategy);
            const DesignMatrix x = io::read_design(grp_design);
            const ResponseVector y = io::read_response(grp_response);
            if (y.size() != x.n()) throw Error(Errc::length_mismatch, "response and design row counts differ");
            const NormalizedDesign nd = normalize(x);
            std::optional<BrgPlan> plan;
            const Partition part = build_partition(nd, y, s, grp_seed, plan);
            io::write_partition(grp_out, part);
            const io::Record manifest{{"command", "group"}, {"design", grp_design}, {"response", grp_response},
                                      {"strategy", grp_strategy}, {"seed", std::to_string(grp_seed)},
                                      {"nu", f(grp_nu)}};
            io::write_manifest(grp_out, manifest);
            if (!grp_plan.empty()) {
                if (!plan) throw UsageError("--plan needs a strategy that runs the group-count plan (not LOL)");
                const double umax = grp_umax > 0.0 ? grp_umax : 2.0 * plan->u_star;
                write_text(grp_plan, plan_table(*plan, umax, grp_points));
                io::write_manifest(grp_plan, manifest);
            }
            const auto c = coherence_report(nd.gram, part, grp_nu);
            std::cout << "p=" << part.p() << " t_star=" << c.t_star << " gamma_bt=" << f(c.gamma_bt)
                      << " gamma_bg=" << f(c.gamma_bg) << " tau_star=" << f(c.tau_star);
            if (plan) std::cout << " u1=" << f(plan->u1) << " u2=" << f(plan->u2) << " p_star=" << plan->p_star;
            std::cout << '\n';
        } else if (*coh) {
            const DesignMatrix x = io::read_design(coh_design);
            const NormalizedDesign nd = normalize(x);
            const Partition part = coh_partition.empty() ? Partition::singletons(x.k())
                                                         : io::read_partition(coh_partition, x.k());
            io::Record rep{{"n", std::to_string(x.n())}, {"k", std::to_string(x.k())}, {"p", std::to_string(part.p())}};
            append_coherence(rep, coherence_report(nd.gram, part, coh_nu));
            rep.emplace_back("v_n", f(nd.v_n));
            rep.emplace_back("a_ratio", f(nd.a_ratio));
            rep.emplace_back("b_ratio", f(nd.b_ratio));
            io::write_record(coh_out, rep);
            const io::Record manifest{{"command", "coherence"}, {"design", coh_design},
                                      {"partition", coh_partition.empty() ? "singletons" : coh_partition},
                                      {"nu", f(coh_nu)}};
            io::write_manifest(coh_out, manifest);
            if (!coh_gram.empty()) {
                io::write_gram(coh_gram, nd.gram);
                io::write_manifest(coh_gram, manifest);
            }
            for (const auto& [k, v] : rep) std::cout << k << '=' << v << '\n';
        } else if (*sim) {
            const sim::SimConfig cfg = sim::load_config(sim_config);
            const auto res = sim::run_experiment(cfg);
            const auto rows = sim::summarize(res);
            io::Record manifest{{"command", "simulate"}, {"config", sim_config}};
            for (const auto& kv : sim::describe(cfg)) manifest.push_back(kv);
            write_text(sim_out, sim::format_results(rows));
            io::write_manifest(sim_out, manifest);
            if (!sim_raw.empty()) {
                write_text(sim_raw, sim::format_raw(res));
                io::write_manifest(sim_raw, manifest);
            }
            if (!sim_ratio.empty()) {
                write_text(sim_ratio, sim::format_ratios(sim::ratio_to_reference(rows, cfg.reference)));
                io::write_manifest(sim_ratio, manifest);
            }
            std::cout << sim::format_results(rows);
        } else if (*ver) {
            const auto reports = theory::run_verification_suite(ver_trials, ver_seed);
            std::ostringstream os;
            os << std::left << std::setw(12) << "checker" << std::setw(12) << "instances" << std::setw(12)
               << "violations" << std::setw(14) << "worst_ratio" << "result\n";
            bool ok = true;
            for (const auto& r : reports) {
                os << std::setw(12) << r.name << std::setw(12) << r.instances << std::setw(12) << r.violations
                   << std::setw(14) << fmt_fixed(r.worst_ratio, 6) << (r.passed() ? "PASS" : "FAIL") << '\n';
                for (const auto& msg : r.failures) os << "  " << msg << '\n';
                ok = ok && r.passed();
            }
            if (ver_chi2 > 0) {
                // Advisory: a large admissible set of a fresh random design.
                std::mt19937_64 rng(ver_seed);
                Matrix g(400, 20);
                std::normal_distribution<double> z;
                for (Index c = 0; c < g.cols(); ++c)
                    for (Index i = 0; i < g.rows(); ++i) g(i, c) = z(rng);
                const NormalizedDesign nd = normalize(DesignMatrix(std::move(g)));
                IndexSet set{0, 1, 2, 3, 4};
                const auto c2 = theory::chi2_smoke(nd, set, ver_chi2, ver_seed);
                os << "chi2 (advisory) z^2=" << f(c2.z_sq) << " frequency=" << f(c2.frequency)
                   << " bound=" << fmt_fixed(c2.bound, 6) << (c2.within_bound ? " ok" : " above bound") << '\n';
            }
            std::cout << os.str();
            if (!ver_out.empty()) {
                write_text(ver_out, os.str());
                io::write_manifest(ver_out, {{"command", "verify"},
                                             {"trials", std::to_string(ver_trials)},
                                             {"seed", std::to_string(ver_seed)}});
            }
            return ok ? 0 : 1;
        } else if (*rat) {
            const auto numer = sim::parse_results(read_text(rat_numer));
            const auto denom = sim::parse_results(read_text(rat_denom));
            std::vector<sim::RatioRow> rows;
            if (rat_ref.empty()) {
                rows = sim::error_ratio(numer, denom);
            } else {
                auto all = numer;
                all.insert(all.end(), denom.begin(), denom.end());
                rows = sim::ratio_to_reference(all, rat_ref);
            }
            write_text(rat_out, sim::format_ratios(rows));
            io::write_manifest(rat_out, {{"command", "ratio"}, {"numer", rat_numer}, {"denom", rat_denom},
                                         {"reference", rat_ref}});
            std::cout << sim::format_ratios(rows);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << errc_name(e.code()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
