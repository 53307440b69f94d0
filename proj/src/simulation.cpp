#include "grlol/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "grlol/errors.hpp"
#include "grlol/io.hpp"
#include "grlol/kernels.hpp"

namespace grlol::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::mt19937_64 replication_rng(Seed master, std::uint64_t cell, std::uint64_t rep)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(rep)};
    return std::mt19937_64(seq);
}

double relative_error(const DesignMatrix& x, const ResponseVector& y, const Vector& beta)
{
    const double denom = y.values().squaredNorm();
    const double num = (y.values() - predict(x, beta)).squaredNorm();
    return denom > 0.0 ? num / denom : kNaN;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Error(Errc::invalid_config, "'" + key + "' expects a number, got '" + v + "'");
    }
}

long long to_integer(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw Error(Errc::invalid_config, "'" + key + "' expects an integer, got '" + v + "'");
    return static_cast<long long>(d);
}

std::string join_numbers(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + io::format_double(v[i]);
    return out;
}

} // namespace

StrategySpec StrategySpec::of(Strategy s) { return StrategySpec{std::string(strategy_name(s)), s, std::nullopt}; }

std::vector<StrategySpec> effective_strategies(const SimConfig& cfg)
{
    if (!cfg.strategies.empty()) return cfg.strategies;
    std::vector<StrategySpec> all;
    for (Strategy s : {Strategy::GGr, Strategy::GGc, Strategy::GGa, Strategy::BGr, Strategy::BGc, Strategy::BGa,
                       Strategy::LOL})
        all.push_back(StrategySpec::of(s));
    return all;
}

void validate(const SimConfig& cfg)
{
    auto fail = [](const std::string& msg) { throw Error(Errc::invalid_config, msg); };
    if (cfg.n < 4) fail("n must be at least 4");
    if (cfg.k < 1) fail("k must be at least 1");
    if (cfg.sparsity.empty() || cfg.pi.empty() || cfg.rho.empty()) fail("sparsity, pi and rho lists must be non-empty");
    for (Index s : cfg.sparsity)
        if (s < 0 || s > cfg.k) fail("sparsity " + std::to_string(s) + " outside [0, k]");
    for (double p : cfg.pi)
        if (!(p >= 0.0 && p < 1.0)) fail("pi must lie in [0, 1)");
    for (double r : cfg.rho)
        if (!(r >= 0.0 && r < 1.0)) fail("rho must lie in [0, 1)");
    for (double p : cfg.pi)
        for (double r : cfg.rho)
            if (r > 0.0 && p > 0.0 && static_cast<Index>(std::floor(p * static_cast<double>(cfg.k))) < 2)
                fail("floor(pi k) must be at least 2 when rho > 0");
    if (!(cfg.snr > 0.0)) fail("snr must be positive");
    if (cfg.replications < 1) fail("replications must be at least 1");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
    const Index n_train = static_cast<Index>(std::llround(cfg.train_fraction * static_cast<double>(cfg.n)));
    if (n_train < 2 || n_train >= cfg.n) fail("the split leaves an empty or trivial part");
    if (cfg.threshold.mode == ThresholdMode::empirical && cfg.threshold.cv_folds > n_train)
        fail("more folds than training observations");
    std::set<std::string> labels;
    for (const auto& s : effective_strategies(cfg)) {
        if (!labels.insert(s.label).second) fail("duplicate strategy '" + s.label + "'");
        if (s.given && s.given->k() != cfg.k) fail("partition for '" + s.label + "' does not cover k predictors");
        if (!s.given && !s.named) fail("strategy '" + s.label + "' has no rule");
    }
}

DesignMatrix gen_design(Index n, Index k, double pi, double rho, std::mt19937_64& rng)
{
    if (n < 2 || k < 1) throw Error(Errc::invalid_config, "design needs n >= 2 and k >= 1");
    if (!(pi >= 0.0 && pi < 1.0) || !(rho >= 0.0 && rho < 1.0))
        throw Error(Errc::invalid_config, "pi and rho must lie in [0, 1)");
    const Index pd = static_cast<Index>(std::floor(pi * static_cast<double>(k)));
    if (rho > 0.0 && pi > 0.0 && pd < 2) throw Error(Errc::invalid_config, "floor(pi k) must be at least 2 when rho > 0");

    std::normal_distribution<double> z;
    Matrix x(n, k);
    for (Index c = 0; c < k; ++c)
        for (Index i = 0; i < n; ++i) x(i, c) = z(rng);

    if (pd >= 1) {
        std::vector<Index> cols(static_cast<std::size_t>(k));
        std::iota(cols.begin(), cols.end(), Index{0});
        std::shuffle(cols.begin(), cols.end(), rng);
        cols.resize(static_cast<std::size_t>(pd));

        // M_rho = V D V^t with eigenvalue 1 + (pd-1) rho on the constant
        // vector and 1 - rho on a Helmert basis of its complement. Each row
        // of Z D^{1/2} V^t is V (sqrt(d) .* z), evaluated with suffix sums.
        const double pdd = static_cast<double>(pd);
        const double s0 = std::sqrt(1.0 + (pdd - 1.0) * rho);
        const double s1 = std::sqrt(1.0 - rho);
        std::vector<double> w(static_cast<std::size_t>(pd)), h(static_cast<std::size_t>(pd));
        for (Index j = 1; j < pd; ++j) h[static_cast<std::size_t>(j)] = 1.0 / std::sqrt(static_cast<double>(j * (j + 1)));
        for (Index i = 0; i < n; ++i) {
            w[0] = s0 * z(rng);
            for (Index j = 1; j < pd; ++j) w[static_cast<std::size_t>(j)] = s1 * z(rng);
            double suffix = 0.0;
            for (Index c = pd - 1; c >= 0; --c) {
                const auto uc = static_cast<std::size_t>(c);
                double v = w[0] / std::sqrt(pdd) + suffix;
                if (c >= 1) v -= static_cast<double>(c) * h[uc] * w[uc];
                x(i, cols[uc]) = v;
                if (c >= 1) suffix += h[uc] * w[uc];
            }
        }
    }

    for (Index c = 0; c < k; ++c) {
        x.col(c).array() -= x.col(c).mean();
        const double norm = x.col(c).norm();
        if (!(norm > 0.0)) throw Error(Errc::zero_column, "generated column " + std::to_string(c + 1) + " is constant");
        x.col(c) /= norm;
    }
    return DesignMatrix(std::move(x));
}

Vector gen_beta(Index k, Index S, SupportPlacement placement, std::mt19937_64& rng)
{
    if (S < 0 || S > k) throw Error(Errc::invalid_config, "sparsity must lie in [0, k]");
    Vector beta = Vector::Zero(k);
    std::vector<Index> support(static_cast<std::size_t>(k));
    std::iota(support.begin(), support.end(), Index{0});
    if (placement == SupportPlacement::random) std::shuffle(support.begin(), support.end(), rng);
    std::normal_distribution<double> z(5.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < S; ++i) {
        const double mag = std::abs(z(rng));
        beta(support[static_cast<std::size_t>(i)]) = coin(rng) ? -mag : mag;
    }
    return beta;
}

Response gen_response(const DesignMatrix& x, const Vector& beta, double snr, std::mt19937_64& rng)
{
    if (!(snr > 0.0)) throw Error(Errc::invalid_config, "snr must be positive");
    const Vector s = predict(x, beta);
    const double mean = s.mean();
    const double var = (s.array() - mean).square().sum() / static_cast<double>(std::max<Index>(1, s.size() - 1));
    double sigma = 1.0;
    if (!beta.isZero(0.0)) {
        if (!(var > 0.0)) throw Error(Errc::zero_signal, "signal X beta has zero variance");
        sigma = std::isinf(snr) ? 0.0 : std::sqrt(var / snr);
    }
    std::normal_distribution<double> z;
    Vector y = s;
    for (Index i = 0; i < y.size(); ++i) y(i) += sigma * z(rng);
    return Response{ResponseVector(std::move(y)), sigma};
}

Split train_test_split(Index n, double train_fraction, std::mt19937_64& rng)
{
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    Split sp;
    sp.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    sp.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(sp.train.begin(), sp.train.end());
    std::sort(sp.test.begin(), sp.test.end());
    return sp;
}

std::vector<Cell> cells_of(const SimConfig& cfg)
{
    std::vector<Cell> cells;
    for (double p : cfg.pi)
        for (double r : cfg.rho)
            for (Index s : cfg.sparsity) cells.push_back(Cell{s, p, r});
    return cells;
}

ReplicationRecord run_replication(const SimConfig& cfg, const Cell& cell, std::size_t cell_index, int rep)
{
    const auto strategies = effective_strategies(cfg);
    ReplicationRecord rec;
    rec.errors.assign(strategies.size(), kNaN);
    rec.messages.assign(strategies.size(), std::string());

    auto rng = replication_rng(cfg.master_seed, cell_index, static_cast<std::uint64_t>(rep));
    const DesignMatrix x = gen_design(cfg.n, cfg.k, cell.pi, cell.rho, rng);
    const Vector beta = gen_beta(cfg.k, cell.S, cfg.support, rng);
    const Response resp = gen_response(x, beta, cfg.snr, rng);
    rec.sigma = resp.sigma;
    const Split split = train_test_split(cfg.n, cfg.train_fraction, rng);
    const Seed fill_seed = rng();
    ThresholdConfig tc = cfg.threshold;
    tc.seed = rng();

    const DesignMatrix x_train = x.rows(split.train), x_test = x.rows(split.test);
    const ResponseVector y_train = resp.y.rows(split.train), y_test = resp.y.rows(split.test);

    auto fail_all = [&](const Error& e) {
        for (auto& m : rec.messages) m = std::string(errc_name(e.code())) + ": " + e.what();
        return rec;
    };

    std::optional<NormalizedDesign> nd;
    try {
        nd = normalize(x_train);
    } catch (const Error& e) {
        return fail_all(e);
    }
    const Vector r = correlations_with_target(*nd, y_train);

    std::optional<BrgPlan> plan;
    std::string plan_error;
    try {
        plan = brg_plan(*nd);
        rec.p_star = plan->p_star;
    } catch (const Error& e) {
        plan_error = std::string(errc_name(e.code())) + ": " + e.what();
    }

    for (std::size_t s = 0; s < strategies.size(); ++s) {
        const auto& spec = strategies[s];
        try {
            std::optional<Partition> part;
            if (spec.given) {
                part = *spec.given;
            } else if (*spec.named == Strategy::LOL) {
                rec.errors[s] = relative_error(x_test, y_test, fit_lol(*nd, y_train, tc).beta_final);
                continue;
            } else {
                if (!plan) {
                    rec.messages[s] = plan_error;
                    continue;
                }
                const FillMode mode = fill_mode_of(*spec.named);
                part = is_boosting(*spec.named) ? brg_partition(*plan, r, mode, fill_seed)
                                                : gathered_grouping(r, plan->p_star, mode, fill_seed);
            }
            rec.errors[s] = relative_error(x_test, y_test, fit_grlol(*nd, y_train, *part, tc).beta_final);
        } catch (const Error& e) {
            rec.messages[s] = std::string(errc_name(e.code())) + ": " + e.what();
        }
    }
    return rec;
}

ExperimentResult run_experiment(const SimConfig& cfg)
{
    validate(cfg);
    ExperimentResult res;
    for (const auto& s : effective_strategies(cfg)) res.strategies.push_back(s.label);
    res.cells = cells_of(cfg);
    const std::size_t n_cells = res.cells.size(), n_strat = res.strategies.size();
    const auto reps = static_cast<std::size_t>(cfg.replications);
    res.raw.assign(n_cells, std::vector<std::vector<double>>(n_strat, std::vector<double>(reps, kNaN)));

    const long tasks = static_cast<long>(n_cells * reps);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::worker_count())
    for (long t = 0; t < tasks; ++t) {
        const auto c = static_cast<std::size_t>(t) / reps;
        const auto rep = static_cast<std::size_t>(t) % reps;
        try {
            const auto rec = run_replication(cfg, res.cells[c], c, static_cast<int>(rep));
            for (std::size_t s = 0; s < n_strat; ++s) res.raw[c][s][rep] = rec.errors[s];
        } catch (...) {
            errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return res;
}

double median_of(std::vector<double> values)
{
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double sample_std(const std::vector<double>& values)
{
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<SummaryRow> summarize(const ExperimentResult& res)
{
    std::vector<SummaryRow> rows;
    for (std::size_t c = 0; c < res.cells.size(); ++c)
        for (std::size_t s = 0; s < res.strategies.size(); ++s) {
            std::vector<double> valid;
            for (double v : res.raw[c][s])
                if (!std::isnan(v)) valid.push_back(v);
            SummaryRow row;
            row.strategy = res.strategies[s];
            row.S = res.cells[c].S;
            row.pi = res.cells[c].pi;
            row.rho = res.cells[c].rho;
            row.median = median_of(valid);
            row.std_dev = sample_std(valid);
            row.valid = static_cast<int>(valid.size());
            rows.push_back(row);
        }
    return rows;
}

std::string format_results(const std::vector<SummaryRow>& rows)
{
    std::ostringstream os;
    os << "strategy,S,pi,rho,median_EY,std_EY,K\n";
    for (const auto& r : rows)
        os << r.strategy << ',' << r.S << ',' << io::format_double(r.pi) << ',' << io::format_double(r.rho) << ','
           << (r.valid ? io::format_double(r.median) : "NA") << ',' << io::format_double(r.std_dev) << ',' << r.valid
           << '\n';
    return os.str();
}

std::vector<SummaryRow> parse_results(const std::string& text)
{
    std::vector<SummaryRow> rows;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("strategy,", 0) == 0) continue;
        }
        const auto f = split_list(line);
        if (f.size() != 7) throw Error(Errc::invalid_input, "result row needs 7 fields: '" + line + "'");
        SummaryRow r;
        r.strategy = f[0];
        r.S = static_cast<Index>(to_integer("S", f[1]));
        r.pi = to_double("pi", f[2]);
        r.rho = to_double("rho", f[3]);
        r.median = f[4] == "NA" ? kNaN : to_double("median_EY", f[4]);
        r.std_dev = to_double("std_EY", f[5]);
        r.valid = static_cast<int>(to_integer("K", f[6]));
        rows.push_back(r);
    }
    return rows;
}

std::string format_raw(const ExperimentResult& res)
{
    std::ostringstream os;
    os << "strategy,S,pi,rho,rep,EY\n";
    for (std::size_t c = 0; c < res.cells.size(); ++c)
        for (std::size_t s = 0; s < res.strategies.size(); ++s)
            for (std::size_t rep = 0; rep < res.raw[c][s].size(); ++rep) {
                const double v = res.raw[c][s][rep];
                os << res.strategies[s] << ',' << res.cells[c].S << ',' << io::format_double(res.cells[c].pi) << ','
                   << io::format_double(res.cells[c].rho) << ',' << rep + 1 << ','
                   << (std::isnan(v) ? "NA" : io::format_double(v)) << '\n';
            }
    return os.str();
}

namespace {

bool same_cell(const SummaryRow& a, const SummaryRow& b) { return a.S == b.S && a.pi == b.pi && a.rho == b.rho; }

RatioRow ratio_row(const SummaryRow& num, const SummaryRow& den)
{
    return RatioRow{num.strategy, den.strategy, num.S, num.pi, num.rho, num.median / den.median};
}

} // namespace

std::vector<RatioRow> error_ratio(const std::vector<SummaryRow>& numer, const std::vector<SummaryRow>& denom)
{
    std::vector<RatioRow> out;
    for (const auto& a : numer)
        for (const auto& b : denom)
            if (a.strategy == b.strategy && same_cell(a, b)) {
                out.push_back(ratio_row(a, b));
                break;
            }
    return out;
}

std::vector<RatioRow> ratio_to_reference(const std::vector<SummaryRow>& rows, const std::string& reference)
{
    std::vector<RatioRow> out;
    for (const auto& a : rows)
        for (const auto& b : rows)
            if (b.strategy == reference && same_cell(a, b)) {
                out.push_back(ratio_row(a, b));
                break;
            }
    return out;
}

std::string format_ratios(const std::vector<RatioRow>& rows)
{
    std::ostringstream os;
    os << "strategy,reference,S,pi,rho,ratio\n";
    for (const auto& r : rows)
        os << r.strategy << ',' << r.reference << ',' << r.S << ',' << io::format_double(r.pi) << ','
           << io::format_double(r.rho) << ',' << (std::isnan(r.ratio) ? "NA" : io::format_double(r.ratio)) << '\n';
    return os.str();
}

SimConfig load_config(const std::string& path)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::io_error, e.what());
    }
    SimConfig cfg;
    std::vector<std::string> given_paths;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw Error(Errc::invalid_config, "key '" + section + "' must sit inside a section");
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            const std::string where = section + "." + key;
            if (section == "experiment") {
                if (key == "n") cfg.n = static_cast<Index>(to_integer(where, v));
                else if (key == "k") cfg.k = static_cast<Index>(to_integer(where, v));
                else if (key == "sparsity") {
                    cfg.sparsity.clear();
                    for (const auto& s : split_list(v)) cfg.sparsity.push_back(static_cast<Index>(to_integer(where, s)));
                } else if (key == "pi") {
                    cfg.pi.clear();
                    for (const auto& s : split_list(v)) cfg.pi.push_back(to_double(where, s));
                } else if (key == "rho") {
                    cfg.rho.clear();
                    for (const auto& s : split_list(v)) cfg.rho.push_back(to_double(where, s));
                } else if (key == "snr") cfg.snr = to_double(where, v);
                else if (key == "replications") cfg.replications = static_cast<int>(to_integer(where, v));
                else if (key == "seed") cfg.master_seed = static_cast<Seed>(to_integer(where, v));
                else if (key == "support") {
                    if (v == "random") cfg.support = SupportPlacement::random;
                    else if (v == "first") cfg.support = SupportPlacement::first;
                    else throw Error(Errc::invalid_config, where + " must be random or first");
                } else if (key == "strategies") {
                    cfg.strategies.clear();
                    for (const auto& s : split_list(v)) {
                        if (s.rfind("given:", 0) == 0) {
                            given_paths.push_back(s.substr(6));
                            continue;
                        }
                        const auto st = parse_strategy(s);
                        if (!st) throw Error(Errc::invalid_config, "unknown strategy '" + s + "'");
                        cfg.strategies.push_back(StrategySpec::of(*st));
                    }
                } else if (key == "reference") cfg.reference = v;
                else if (key == "train_fraction") cfg.train_fraction = to_double(where, v);
                else throw Error(Errc::invalid_config, "unknown key '" + where + "'");
            } else if (section == "threshold") {
                if (key == "mode") {
                    if (v == "empirical") cfg.threshold.mode = ThresholdMode::empirical;
                    else if (v == "theoretical") cfg.threshold.mode = ThresholdMode::theoretical;
                    else throw Error(Errc::invalid_config, where + " must be empirical or theoretical");
                } else if (key == "nu") cfg.threshold.nu = to_double(where, v);
                else if (key == "cv_folds") cfg.threshold.cv_folds = static_cast<int>(to_integer(where, v));
                else if (key == "lambda1" || key == "lambda2") {
                    if (!cfg.threshold.lambdas) cfg.threshold.lambdas = ExplicitLambdas{};
                    (key == "lambda1" ? cfg.threshold.lambdas->lambda1 : cfg.threshold.lambdas->lambda2) =
                        to_double(where, v);
                } else throw Error(Errc::invalid_config, "unknown key '" + where + "'");
            } else {
                throw Error(Errc::invalid_config, "unknown section '" + section + "'");
            }
        }
    }
    for (const auto& p : given_paths) {
        StrategySpec spec;
        spec.label = "given:" + p;
        spec.given = io::read_partition(p, cfg.k);
        cfg.strategies.push_back(std::move(spec));
    }
    if (cfg.threshold.mode == ThresholdMode::theoretical && !cfg.threshold.lambdas)
        throw Error(Errc::invalid_config, "theoretical mode needs threshold.lambda1 and threshold.lambda2");
    validate(cfg);
    return cfg;
}

std::vector<std::pair<std::string, std::string>> describe(const SimConfig& cfg)
{
    std::vector<std::pair<std::string, std::string>> d;
    d.emplace_back("n", std::to_string(cfg.n));
    d.emplace_back("k", std::to_string(cfg.k));
    std::string s;
    for (std::size_t i = 0; i < cfg.sparsity.size(); ++i) s += (i ? "," : "") + std::to_string(cfg.sparsity[i]);
    d.emplace_back("sparsity", s);
    d.emplace_back("pi", join_numbers(cfg.pi));
    d.emplace_back("rho", join_numbers(cfg.rho));
    d.emplace_back("snr", io::format_double(cfg.snr));
    d.emplace_back("replications", std::to_string(cfg.replications));
    d.emplace_back("seed", std::to_string(cfg.master_seed));
    d.emplace_back("support", cfg.support == SupportPlacement::random ? "random" : "first");
    std::string st;
    for (const auto& spec : effective_strategies(cfg)) st += (st.empty() ? "" : ",") + spec.label;
    d.emplace_back("strategies", st);
    d.emplace_back("reference", cfg.reference);
    d.emplace_back("train_fraction", io::format_double(cfg.train_fraction));
    d.emplace_back("threshold.mode", cfg.threshold.mode == ThresholdMode::empirical ? "empirical" : "theoretical");
    d.emplace_back("threshold.nu", io::format_double(cfg.threshold.nu));
    d.emplace_back("threshold.cv_folds", std::to_string(cfg.threshold.cv_folds));
    if (cfg.threshold.lambdas) {
        d.emplace_back("threshold.lambda1", io::format_double(cfg.threshold.lambdas->lambda1));
        d.emplace_back("threshold.lambda2", io::format_double(cfg.threshold.lambdas->lambda2));
    }
    return d;
}

SeparationResult separation_experiment(const SeparationConfig& cfg)
{
    if (cfg.group_size < 1 || cfg.k % cfg.group_size != 0)
        throw Error(Errc::invalid_config, "group size must divide k");
    if (cfg.k >= cfg.n) throw Error(Errc::invalid_config, "orthonormal design needs k < n");
    if (!(cfg.q > 0.0 && cfg.q <= 1.0)) throw Error(Errc::invalid_config, "q must lie in (0, 1]");
    if (cfg.replications < 1) throw Error(Errc::invalid_config, "replications must be at least 1");

    SeparationResult out;
    const double n = static_cast<double>(cfg.n);
    out.amplitude = std::sqrt(std::log(static_cast<double>(cfg.k)) / n);
    const double t = static_cast<double>(cfg.group_size);
    const Index p = cfg.k / cfg.group_size;
    out.active_groups =
        std::clamp<Index>(static_cast<Index>(std::floor(std::pow(out.amplitude * t, -cfg.q))), 1, p);

    std::vector<IndexSet> groups(static_cast<std::size_t>(p));
    for (Index l = 0; l < cfg.k; ++l) groups[static_cast<std::size_t>(l / cfg.group_size)].push_back(l);
    const Partition grouped = Partition::from_groups(groups, cfg.k);
    const Partition single = Partition::singletons(cfg.k);

    Vector beta = Vector::Zero(cfg.k);
    for (Index l = 0; l < out.active_groups * cfg.group_size; ++l) beta(l) = out.amplitude;

    double err_g = 0.0, err_l = 0.0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
        auto rng = replication_rng(cfg.seed, 0, static_cast<std::uint64_t>(rep));
        std::normal_distribution<double> z;
        Matrix g(cfg.n, cfg.k);
        for (Index c = 0; c < cfg.k; ++c)
            for (Index i = 0; i < cfg.n; ++i) g(i, c) = z(rng);
        const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(cfg.n, cfg.k);
        const DesignMatrix x(std::sqrt(n) * q);
        Vector y = x.values() * beta;
        for (Index i = 0; i < cfg.n; ++i) y(i) += cfg.sigma * z(rng);
        const ResponseVector yv(std::move(y));
        const NormalizedDesign nd = normalize(x);

        auto fit_with = [&](const Partition& part) {
            const CoherenceReport rep_c = coherence_report(nd.gram, part, cfg.nu);
            const double ls = lambda_star(cfg.sigma, 1.0, rep_c, nd.v_n, part.p());
            ThresholdConfig tc;
            tc.mode = ThresholdMode::theoretical;
            tc.nu = cfg.nu;
            tc.lambdas = ExplicitLambdas{cfg.lambda_factor * ls, cfg.lambda_factor * ls};
            return (fit_grlol(nd, yv, part, tc).beta_final - beta).squaredNorm();
        };
        err_g += fit_with(grouped);
        err_l += fit_with(single);
    }
    out.grlol_mse = err_g / cfg.replications;
    out.lol_mse = err_l / cfg.replications;
    out.ratio = out.lol_mse / out.grlol_mse;
    return out;
}

} // namespace grlol::sim
