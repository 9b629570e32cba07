#include "cli_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "pubbias/corrections.hpp"
#include "pubbias/csv_io.hpp"
#include "pubbias/errors.hpp"
#include "pubbias/estimation.hpp"
#include "pubbias/multiple_testing.hpp"
#include "pubbias/panel.hpp"
#include "pubbias/simulation.hpp"

namespace pubbias::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20220301;
constexpr const char* kSeedEnv = "PUBBIAS_SEED";

std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv(kSeedEnv)) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw DataError(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
        }
    }
    return kDefaultSeed;
}

// Comment header written at the top of every output file.
std::string header(const std::string& command, const json& config) {
    const std::string dumped = config.dump();
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(dumped)));
    std::ostringstream os;
    os << "# pubbias " << kVersion << " command=" << command << "\n";
    os << "# config_hash=" << hash;
    if (config.contains("seed")) os << " seed=" << config["seed"].dump();
    os << "\n# config=" << dumped << "\n";
    os << "# units: returns in percent per month; 100 bps = 1.0\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << content;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw DataError("config '" + path + "': " + e.what());
    }
}

template <class T>
T config_get(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(std::string("config key '") + key + "': " + e.what());
    }
}

PriorSpec prior_from_json(const json& j) {
    const std::string family = config_get<std::string>(j, "family", "normal");
    if (family == "normal") return NormalZeroMean{config_get(j, "sigma_theta", 0.0)};
    if (family == "mixture") return PointMassMixture{config_get(j, "pi0", 0.5), config_get(j, "lambda", 1.0)};
    if (family == "student_t") return ScaledStudentT{config_get(j, "scale", 1.0), config_get(j, "dof", 5.0)};
    throw DataError("unknown prior family '" + family + "' (expected normal, mixture or student_t)");
}

json prior_to_json(const PriorSpec& prior) {
    if (auto* n = std::get_if<NormalZeroMean>(&prior)) return {{"family", "normal"}, {"sigma_theta", n->sigma_theta}};
    if (auto* m = std::get_if<PointMassMixture>(&prior))
        return {{"family", "mixture"}, {"pi0", m->pi0}, {"lambda", m->lambda}};
    const auto& t = std::get<ScaledStudentT>(prior);
    return {{"family", "student_t"}, {"scale", t.scale}, {"dof", t.dof}};
}

json rule_to_json(const PublicationRule& r) {
    return {{"side", std::string(to_string(r.side))}, {"cutoff", r.cutoff}, {"base_prob", r.base_prob}};
}

QuadratureSpec quad_from_json(const json& root) {
    QuadratureSpec q;
    if (!root.contains("quadrature")) return q;
    const json& j = root["quadrature"];
    q.abs_tol = config_get(j, "abs_tol", q.abs_tol);
    q.rel_tol = config_get(j, "rel_tol", q.rel_tol);
    q.max_subdivisions = config_get(j, "max_subdivisions", q.max_subdivisions);
    q.domain_clip = config_get(j, "domain_clip", q.domain_clip);
    q.validate();
    return q;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw DataError("not a number in list: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value + "\n"; }

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
    std::string tstats;
    double cutoff = 2.0;
    std::string side = "signed";
    std::string method = "qmle";
    int boot = 0;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    double lower = 0.0;
    double upper = 20.0;
    double tol = 1e-6;
    std::string grid = "0,1.5,3";
    std::string out;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    const std::uint64_t seed = a.seed.value_or(default_seed());
    TruncatedSampleSet data{load_tstats(a.tstats), a.cutoff, parse_side(a.side)};
    FitOptions options{a.lower, a.upper, a.tol, a.strict ? TruncationPolicy::Strict : TruncationPolicy::Drop};
    const Estimator estimator = parse_estimator(a.method);
    FitResult fit = fit_sigma_theta(data, estimator, options);
    if (a.boot > 0) fit.se_boot = bootstrap_se(data, estimator, a.boot, RngStream(seed, 0), options);

    std::vector<double> grid = parse_list(a.grid);
    grid.push_back(fit.sigma_theta_hat);
    const DiagnosticsTable diag = fit_diagnostics(data, grid, 0.5, options.policy);

    json config = {{"command", "estimate"}, {"tstats", a.tstats},   {"cutoff", a.cutoff},
                   {"side", a.side},        {"method", a.method},   {"boot", a.boot},
                   {"seed", seed},          {"strict", a.strict},   {"bounds", {a.lower, a.upper}},
                   {"tol", a.tol},          {"grid", grid}};
    const std::string head = header("estimate", config);

    std::string report = head;
    report += kv("estimator", std::string(to_string(fit.estimator)));
    report += kv("sigma_theta_hat", num(fit.sigma_theta_hat));
    report += kv("loglik", num(fit.loglik));
    report += kv("se_boot", fit.se_boot ? num(*fit.se_boot) : "");
    report += kv("n_used", std::to_string(fit.n_used));
    report += kv("n_dropped", std::to_string(fit.n_dropped));
    report += kv("at_boundary", fit.at_boundary ? "true" : "false");
    report += kv("clamped", fit.clamped ? "true" : "false");
    for (std::size_t i = 0; i < grid.size(); ++i)
        report += kv("chi2_at_sigma_" + num(grid[i]), num(diag.chi2_distance[i]));
    out << report;

    if (!a.out.empty()) {
        write_file(a.out + "_fit.txt", report);
        std::string csv = head + "sigma,bin_lo,bin_hi,empirical_frac,model_mass\n";
        for (const auto& r : diag.rows) {
            csv += num(r.sigma) + "," + num(r.bin_lo) + "," + num(r.bin_hi) + "," + num(r.empirical_frac) + "," +
                   num(r.model_mass) + "\n";
        }
        write_file(a.out + "_diagnostics.csv", csv);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// correct

struct CorrectArgs {
    std::optional<double> sigma;
    std::string fit_from;
    std::string config;
    std::string tstats;
    double cutoff = 2.0;
    std::string side = "signed";
    std::string method = "quadrature";
    std::uint64_t mc_draws = 1'000'000;
    std::optional<std::uint64_t> seed;
    std::string false_def = "nonpositive";
    std::string out;
};

double sigma_from_fit_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fit report '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        const std::string key = "sigma_theta_hat=";
        if (line.rfind(key, 0) == 0) {
            try {
                return std::stod(line.substr(key.size()));
            } catch (const std::exception&) {
                break;
            }
        }
    }
    throw DataError("fit report '" + path + "' has no sigma_theta_hat line");
}

int cmd_correct(const CorrectArgs& a, std::ostream& out) {
    json cfg = a.config.empty() ? json::object() : load_config(a.config);
    ModelSpec model;
    model.rule = PublicationRule{parse_side(a.side), a.cutoff, 1.0};
    if (cfg.contains("rule")) {
        model.rule.side = parse_side(config_get<std::string>(cfg["rule"], "side", a.side));
        model.rule.cutoff = config_get(cfg["rule"], "cutoff", a.cutoff);
    }
    if (a.sigma) {
        model.prior = NormalZeroMean{*a.sigma};
    } else if (!a.fit_from.empty()) {
        model.prior = NormalZeroMean{sigma_from_fit_report(a.fit_from)};
    } else if (cfg.contains("prior")) {
        model.prior = prior_from_json(cfg["prior"]);
    } else {
        throw DataError("correct: supply --sigma, --fit-from or a config with a prior");
    }
    model.validate();

    CorrectionOptions options;
    options.method = parse_method(a.method);
    options.mc_draws = a.mc_draws;
    options.seed = a.seed.value_or(config_get<std::uint64_t>(cfg, "seed", default_seed()));
    if (a.false_def == "nonpositive") options.false_def = FalseDefinition::NonPositive;
    else if (a.false_def == "zero") options.false_def = FalseDefinition::StrictZero;
    else throw DataError("unknown --false-def '" + a.false_def + "' (expected nonpositive or zero)");
    options.quad = quad_from_json(cfg);

    std::vector<FindingInput> findings;
    if (!a.tstats.empty()) {
        for (const auto& s : load_tstats(a.tstats)) findings.push_back({s.id, s.tstat});
    }
    const CorrectionReport report = correction_report(model, findings, options);

    json config = {{"command", "correct"},
                   {"prior", prior_to_json(model.prior)},
                   {"rule", rule_to_json(model.rule)},
                   {"method", a.method},
                   {"false_def", a.false_def},
                   {"tstats", a.tstats}};
    if (options.method == Method::MonteCarlo) {
        config["mc_draws"] = options.mc_draws;
        config["seed"] = options.seed;
    }
    const std::string head = header("correct", config);

    std::string summary = head;
    summary += kv("prior", describe(model.prior));
    summary += kv("shrinkage_pub", num(report.shrinkage_pub));
    summary += kv("shrinkage_se", num(report.shrinkage_se));
    summary += kv("fdr_pub", num(report.fdr_pub));
    summary += kv("fdr_se", num(report.fdr_se));
    summary += kv("pub_prob", num(report.pub_prob));
    if (report.fdr_bound) {
        summary += kv("fdr_bound", num(report.fdr_bound->bound));
        summary += kv("fdr_bound_pr_exceed_null", num(report.fdr_bound->pr_exceed_null));
        summary += kv("fdr_bound_pr_exceed_marginal", num(report.fdr_bound->pr_exceed_marginal));
        summary += kv("fdr_bound_pr_theta_nonpos", num(report.fdr_bound->pr_theta_nonpos));
    }
    summary += kv("n_findings", std::to_string(report.per_finding.size()));

    std::string csv;
    if (!report.per_finding.empty()) {
        csv = "id,tstat,corrected_tstat\n";
        for (const auto& f : report.per_finding) csv += f.id + "," + num(f.tstat) + "," + num(f.corrected_tstat) + "\n";
    }
    if (a.out.empty()) {
        out << summary;
        if (!csv.empty()) out << "\n" << csv;
    } else {
        out << summary;
        write_file(a.out + "_summary.txt", summary);
        if (!csv.empty()) write_file(a.out + "_findings.csv", head + csv);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// hurdles

struct HurdleArgs {
    std::string pvalues;
    std::string tstats;
    std::string method = "holm";
    double level = 0.05;
    std::string side = "absolute";
    std::optional<double> sigma;
    std::string out;
};

int cmd_hurdles(const HurdleArgs& a, std::ostream& out) {
    const Side side = parse_side(a.side);
    PValueSet pvals;
    if (!a.pvalues.empty()) {
        pvals = load_pvalues(a.pvalues);
    } else {
        std::vector<PValueEntry> entries;
        for (const auto& s : load_tstats(a.tstats)) entries.push_back({s.id, tstat_to_pvalue(s.tstat, side)});
        pvals = PValueSet(std::move(entries));
    }
    const Procedure method = parse_procedure(a.method);
    const auto decisions = run_procedure(method, pvals, a.level);

    json config = {{"command", "hurdles"}, {"pvalues", a.pvalues}, {"tstats", a.tstats},
                   {"method", a.method},    {"level", a.level},     {"side", a.side}};
    if (a.sigma) config["sigma"] = *a.sigma;
    std::string csv = header("hurdles", config) + "id,p,adjusted_p,rejected,method,level\n";
    std::size_t rejected = 0;
    for (const auto& d : decisions) {
        csv += d.id + "," + num(d.p) + "," + num(d.adjusted_p) + "," + (d.rejected ? "1" : "0") + "," +
               std::string(to_string(d.method)) + "," + num(d.level) + "\n";
        rejected += d.rejected;
    }
    std::string summary = "# n_tests=" + std::to_string(decisions.size()) + " n_rejected=" + std::to_string(rejected) + "\n";
    if (!decisions.empty() && method == Procedure::Bonferroni)
        summary += "# bonferroni_hurdle=" + num(bonferroni_hurdle(decisions.size(), a.level, side)) + "\n";
    if (a.sigma) {
        summary += "# model_fdr_hurdle=" + num(hurdle_for_fdr(NormalZeroMean{*a.sigma}, a.level, side)) + "\n";
    }
    csv += summary;
    if (a.out.empty()) {
        out << csv;
    } else {
        write_file(a.out, csv);
        out << summary;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<double> sigma;
    std::optional<std::uint64_t> n_ideas;
    std::optional<std::uint64_t> seed;
    std::optional<double> cutoff;
    std::optional<std::string> side;
    std::optional<double> jitter;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    json cfg = a.config.empty() ? json::object() : load_config(a.config);
    SimulationSpec spec;
    spec.model.prior = cfg.contains("prior") ? prior_from_json(cfg["prior"]) : PriorSpec{NormalZeroMean{3.0}};
    if (cfg.contains("rule")) {
        const json& r = cfg["rule"];
        spec.model.rule.side = parse_side(config_get<std::string>(r, "side", "signed"));
        spec.model.rule.cutoff = config_get(r, "cutoff", 2.0);
        spec.model.rule.base_prob = config_get(r, "base_prob", 1.0);
    }
    spec.n_ideas = config_get<std::uint64_t>(cfg, "n_ideas", 1'000'000);
    spec.seed = config_get<std::uint64_t>(cfg, "seed", default_seed());
    spec.noise_on_false = config_get(cfg, "noise_on_false", 0.0);
    if (a.sigma) spec.model.prior = NormalZeroMean{*a.sigma};
    if (a.n_ideas) spec.n_ideas = *a.n_ideas;
    if (a.seed) spec.seed = *a.seed;
    if (a.cutoff) spec.model.rule.cutoff = *a.cutoff;
    if (a.side) spec.model.rule.side = parse_side(*a.side);
    if (a.jitter) spec.noise_on_false = *a.jitter;
    spec.validate();

    std::vector<std::pair<std::string, double>> hurdles;
    if (cfg.contains("hurdles")) {
        for (const auto& [name, value] : cfg["hurdles"].items()) hurdles.emplace_back(name, value.get<double>());
    }

    const SimulationResult result = simulate(spec);
    const ScatterTable scatter = scatter_export(result, spec.noise_on_false, RngStream(spec.seed, 1ULL << 62), hurdles);

    json config = {{"command", "simulate"},
                   {"prior", prior_to_json(spec.model.prior)},
                   {"rule", rule_to_json(spec.model.rule)},
                   {"n_ideas", spec.n_ideas},
                   {"seed", spec.seed},
                   {"noise_on_false", spec.noise_on_false}};
    const std::string head = header("simulate", config);

    std::string summary = head;
    summary += kv("prior", describe(spec.model.prior));
    summary += kv("n_ideas", std::to_string(result.n_ideas));
    summary += kv("n_published", std::to_string(result.n_published));
    summary += kv("pub_rate", num(result.pub_rate));
    summary += kv("realized_shrinkage", num(result.realized_shrinkage));
    summary += kv("shrinkage_se", num(result.shrinkage_se));
    summary += kv("realized_fdr", num(result.realized_fdr));
    summary += kv("fdr_se", num(result.fdr_se));
    out << summary;

    // Same id,tstat layout that `estimate` reads.
    std::string published = head + "id,theta,tstat\n";
    for (std::size_t i = 0; i < result.published.size(); ++i)
        published += "idea" + std::to_string(i) + "," + num(result.published[i].theta) + "," +
                     num(result.published[i].t) + "\n";
    std::string scatter_csv = head;
    for (const auto& [name, value] : scatter.hurdles) scatter_csv += "# hurdle " + name + "=" + num(value) + "\n";
    scatter_csv += "theta_jittered,abs_t\n";
    for (const auto& row : scatter.rows) scatter_csv += num(row.theta_jittered) + "," + num(row.abs_t) + "\n";

    write_file(a.out + "_summary.txt", summary);
    write_file(a.out + "_published.csv", published);
    write_file(a.out + "_scatter.csv", scatter_csv);
    return kOk;
}

// ---------------------------------------------------------------------------
// panel

const std::vector<std::string> kPanelOps = {"insample", "corr",  "pca",     "bootstrap",
                                            "event",    "autocorr", "exceed", "compare"};

struct PanelArgs {
    std::string returns;
    std::string meta;
    std::string ops = "insample";
    std::string out;
    int n_boot = 1000;
    int null_boot = 0;
    std::optional<std::uint64_t> seed;
    double target = 1.0;
    int min_overlap = 36;
    std::string cutoffs = "2,3,4,5,6,7,8";
    std::string lags = "1,2,3,6,12";
    std::string window = "post36";
};

int cmd_panel(const PanelArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<std::string> ops;
    {
        std::stringstream ss(a.ops);
        std::string op;
        while (std::getline(ss, op, ',')) {
            if (op.empty()) continue;
            if (std::find(kPanelOps.begin(), kPanelOps.end(), op) == kPanelOps.end()) {
                std::string valid;
                for (const auto& v : kPanelOps) valid += (valid.empty() ? "" : ",") + v;
                throw DataError("unknown op '" + op + "'; valid ops: " + valid);
            }
            ops.push_back(op);
        }
    }
    WindowSelector window;
    if (a.window == "post36") {
        window.kind = WindowSelector::Kind::PostSample;
    } else if (a.window == "insample") {
        window.kind = WindowSelector::Kind::InSample;
    } else if (a.window == "postpub") {
        window.kind = WindowSelector::Kind::PostPublication;
    } else {
        throw DataError("unknown --window '" + a.window + "' (expected post36, insample or postpub)");
    }

    const std::uint64_t seed = a.seed.value_or(default_seed());
    LoadReport load;
    const ReturnPanel panel = load_panel(a.returns, a.meta, &load);
    for (const auto& w : load.warnings) err << "warning: " << w << "\n";

    const ReturnPanel signed_panel = sign_normalize(panel);
    std::size_t n_unscalable = 0;
    const ReturnPanel scaled = scale_to_insample_mean(signed_panel, a.target, &n_unscalable);

    json config = {{"command", "panel"},       {"returns", a.returns},   {"meta", a.meta},
                   {"n_boot", a.n_boot},        {"null_boot", a.null_boot}, {"seed", seed},
                   {"target", a.target},        {"min_overlap", a.min_overlap}, {"cutoffs", a.cutoffs},
                   {"lags", a.lags},            {"window", a.window}};

    for (const auto& op : ops) {
        json op_config = config;
        op_config["op"] = op;
        std::string csv = header("panel", op_config);
        if (op == "insample") {
            const auto table = insample_stats(panel);
            csv += "id,mean,sd,n,tstat,degenerate\n";
            for (const auto& r : table.rows)
                csv += r.id + "," + num(r.mean) + "," + num(r.sd) + "," + std::to_string(r.n) + "," + num(r.tstat) +
                       "," + (r.degenerate ? "1" : "0") + "\n";
            csv += "# excluded_too_few_months=" + std::to_string(table.excluded.size()) + "\n";
        } else if (op == "corr") {
            const auto table = pairwise_correlations(signed_panel, a.min_overlap);
            csv += "id_a,id_b,corr,n_overlap\n";
            for (const auto& p : table.pairs)
                csv += p.id_a + "," + p.id_b + "," + num(p.corr) + "," + std::to_string(p.n_overlap) + "\n";
            csv += "# omitted_pairs=" + std::to_string(table.n_omitted) + "\n";
        } else if (op == "pca") {
            const auto curve = pca_variance_curve(signed_panel, a.min_overlap);
            csv += "k,cumulative_fraction\n";
            for (const auto& r : curve) csv += std::to_string(r.k) + "," + num(r.cumulative_fraction) + "\n";
            csv += "# components_for_90pct=" + std::to_string(components_for(curve, 0.9)) + "\n";
        } else if (op == "bootstrap") {
            const auto res = cluster_bootstrap_mean(scaled, window, a.n_boot, RngStream(seed, 0));
            csv += "statistic,value\n";
            csv += "point_estimate," + num(res.point_estimate) + "\n";
            csv += "se," + num(res.se) + "\n";
            csv += "q025," + num(res.q025) + "\n";
            csv += "q50," + num(res.q50) + "\n";
            csv += "q975," + num(res.q975) + "\n";
            csv += "n_boot," + std::to_string(res.n_boot) + "\n";
            csv += "n_months," + std::to_string(res.n_months) + "\n";
            csv += "n_cells," + std::to_string(res.n_cells) + "\n";
            std::string draws = header("panel", op_config) + "draw,pooled_mean\n";
            for (std::size_t b = 0; b < res.draws.size(); ++b) draws += std::to_string(b) + "," + num(res.draws[b]) + "\n";
            write_file(a.out + "_bootstrap_draws.csv", draws);
        } else if (op == "event") {
            const auto curve = event_time_curve(scaled);
            csv += "event_month,cross_mean,trailing36_mean,n_predictors\n";
            for (const auto& r : curve.rows)
                csv += std::to_string(r.event_month) + "," + num(r.cross_mean) + "," + num(r.trailing36_mean) + "," +
                       std::to_string(r.n_predictors) + "\n";
            csv += "# mean_first36_post_sample=" + num(curve.mean_first36_post_sample) + "\n";
            csv += "# mean_post_publication=" +
                   (curve.mean_post_publication ? num(*curve.mean_post_publication) : std::string()) + "\n";
            csv += "# unscalable_predictors=" + std::to_string(n_unscalable) + "\n";
        } else if (op == "autocorr") {
            std::vector<int> lags;
            for (double v : parse_list(a.lags)) lags.push_back(static_cast<int>(v));
            csv += "lag,mean_corr,n_predictors\n";
            for (const auto& r : mean_autocorrelation(panel, lags))
                csv += std::to_string(r.lag) + "," + num(r.mean_corr) + "," + std::to_string(r.n_predictors) + "\n";
        } else if (op == "exceed") {
            const auto cutoffs = parse_list(a.cutoffs);
            std::vector<ExceedanceRow> rows;
            if (a.null_boot > 0) {
                rows = exceedance_table_with_null(panel, cutoffs, a.null_boot, RngStream(seed, 1));
            } else {
                std::vector<double> ts;
                for (const auto& r : insample_stats(panel).rows)
                    if (!r.degenerate) ts.push_back(r.tstat);
                rows = exceedance_table(ts, cutoffs);
            }
            csv += "cutoff,count,percent,null_percent\n";
            for (const auto& r : rows)
                csv += num(r.cutoff) + "," + std::to_string(r.count) + "," + num(r.percent) + "," +
                       (r.null_percent ? num(*r.null_percent) : std::string()) + "\n";
        } else if (op == "compare") {
            std::map<std::string, double> replicated, original;
            for (const auto& r : insample_stats(panel).rows)
                if (!r.degenerate) replicated[r.id] = r.tstat;
            for (const auto& p : panel.predictors())
                if (p.meta.original_tstat) original[p.id] = *p.meta.original_tstat;
            const auto cmp = compare_tstats(replicated, original);
            csv += "id,replicated,original\n";
            for (const auto& p : cmp.pairs) csv += p.id + "," + num(p.replicated) + "," + num(p.original) + "\n";
            csv += "# mean_difference=" + num(cmp.mean_difference) + "\n";
            csv += "# slope_through_origin=" + num(cmp.slope_through_origin) + "\n";
            csv += "# n_above=" + std::to_string(cmp.n_above) + " n_below=" + std::to_string(cmp.n_below) + "\n";
        }
        const std::string path = a.out + "_" + op + ".csv";
        write_file(path, csv);
        out << "wrote " << path << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// nulltable

struct NullTableArgs {
    std::string cutoffs = "2,3,4,5,6,7,8";
    std::string side = "absolute";
};

int cmd_nulltable(const NullTableArgs& a, std::ostream& out) {
    json config = {{"command", "nulltable"}, {"cutoffs", a.cutoffs}, {"side", a.side}};
    out << header("nulltable", config) << "cutoff,percent,draws_needed\n";
    for (const auto& r : null_exceedance_table(parse_list(a.cutoffs), parse_side(a.side))) {
        char pct[32];
        std::snprintf(pct, sizeof pct, "%.6g", r.percent);
        out << num(r.cutoff) << "," << pct << "," << num(r.draws_needed) << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Publication-bias corrections for collections of published t-statistics", "pubbias"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate sigma_theta from published t-stats");
    estimate->add_option("tstats,--tstats", est.tstats, "t-stat CSV (id,tstat,...)")->required();
    estimate->add_option("--cutoff", est.cutoff, "Publication cutoff")->capture_default_str();
    estimate->add_option("--side", est.side, "signed|absolute")->capture_default_str();
    estimate->add_option("--method", est.method, "qmle|gmm")->capture_default_str();
    estimate->add_option("--boot", est.boot, "Bootstrap resamples for the standard error (0 = off, else >= 100)");
    estimate->add_option("--seed", est.seed, "Master seed");
    estimate->add_flag("--strict", est.strict, "Error on t-stats that do not clear the cutoff");
    estimate->add_option("--lower", est.lower)->capture_default_str();
    estimate->add_option("--upper", est.upper)->capture_default_str();
    estimate->add_option("--tol", est.tol)->capture_default_str();
    estimate->add_option("--grid", est.grid, "Diagnostic sigma grid (comma separated)")->capture_default_str();
    estimate->add_option("--out", est.out, "Output prefix for <prefix>_fit.txt and <prefix>_diagnostics.csv");

    CorrectArgs cor;
    auto* correct = app.add_subcommand("correct", "Shrinkage, FDR and corrected t-stats");
    auto* sigma_opt = correct->add_option("--sigma", cor.sigma, "sigma_theta of the normal prior");
    auto* fit_opt = correct->add_option("--fit-from", cor.fit_from, "Fit report written by `estimate --out`");
    sigma_opt->excludes(fit_opt);
    correct->add_option("--config", cor.config, "JSON config with prior/rule/quadrature");
    correct->add_option("--tstats", cor.tstats, "t-stat CSV to correct");
    correct->add_option("--cutoff", cor.cutoff)->capture_default_str();
    correct->add_option("--side", cor.side)->capture_default_str();
    correct->add_option("--method", cor.method, "quadrature|montecarlo")->capture_default_str();
    correct->add_option("--mc-draws", cor.mc_draws)->capture_default_str();
    correct->add_option("--seed", cor.seed);
    correct->add_option("--false-def", cor.false_def, "nonpositive|zero")->capture_default_str();
    correct->add_option("--out", cor.out, "Output prefix");

    HurdleArgs hur;
    auto* hurdles = app.add_subcommand("hurdles", "Multiple-testing decisions");
    auto* pv_opt = hurdles->add_option("--pvalues", hur.pvalues, "p-value CSV (id,p)");
    auto* ts_opt = hurdles->add_option("--tstats", hur.tstats, "t-stat CSV (id,tstat)");
    pv_opt->excludes(ts_opt);
    hurdles->add_option("--method", hur.method, "bonferroni|holm|bh|by")->capture_default_str();
    hurdles->add_option("--level", hur.level)->capture_default_str();
    hurdles->add_option("--side", hur.side)->capture_default_str();
    hurdles->add_option("--sigma", hur.sigma, "Also report the FDR-targeting hurdle for this normal prior");
    hurdles->add_option("--out", hur.out, "Output CSV path");

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo of the publication process");
    simulate_cmd->add_option("--config", sim.config, "JSON simulation config");
    simulate_cmd->add_option("--out", sim.out, "Output prefix")->required();
    simulate_cmd->add_option("--sigma", sim.sigma, "Override: normal prior sigma_theta");
    simulate_cmd->add_option("--n-ideas", sim.n_ideas);
    simulate_cmd->add_option("--seed", sim.seed);
    simulate_cmd->add_option("--cutoff", sim.cutoff);
    simulate_cmd->add_option("--side", sim.side);
    simulate_cmd->add_option("--jitter", sim.jitter, "Noise sd for atoms at zero in the scatter export");

    PanelArgs pan;
    auto* panel_cmd = app.add_subcommand("panel", "Return-panel meta-study analytics");
    panel_cmd->add_option("--returns", pan.returns, "Long-format returns CSV")->required();
    panel_cmd->add_option("--meta", pan.meta, "Predictor metadata CSV")->required();
    panel_cmd->add_option("--ops", pan.ops, "insample,corr,pca,bootstrap,event,autocorr,exceed,compare")
        ->capture_default_str();
    panel_cmd->add_option("--out", pan.out, "Output prefix")->required();
    panel_cmd->add_option("--n-boot", pan.n_boot)->capture_default_str();
    panel_cmd->add_option("--null-boot", pan.null_boot, "Bootstrap draws for the exceedance null (0 = off)");
    panel_cmd->add_option("--seed", pan.seed);
    panel_cmd->add_option("--target", pan.target, "Scaled in-sample mean, percent per month")->capture_default_str();
    panel_cmd->add_option("--min-overlap", pan.min_overlap)->capture_default_str();
    panel_cmd->add_option("--cutoffs", pan.cutoffs)->capture_default_str();
    panel_cmd->add_option("--lags", pan.lags)->capture_default_str();
    panel_cmd->add_option("--window", pan.window, "post36|insample|postpub")->capture_default_str();

    NullTableArgs nt;
    auto* nulltable = app.add_subcommand("nulltable", "Exceedance probabilities under the N(0,1) null");
    nulltable->add_option("--cutoffs", nt.cutoffs)->capture_default_str();
    nulltable->add_option("--side", nt.side)->capture_default_str();

    std::vector<std::string> storage = args;
    std::vector<char*> argv;
    std::string prog = "pubbias";
    argv.push_back(prog.data());
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUserError;
    }

    try {
        if (*estimate) return cmd_estimate(est, out);
        if (*correct) return cmd_correct(cor, out);
        if (*hurdles) {
            if (hur.pvalues.empty() == hur.tstats.empty()) throw DataError("hurdles: give exactly one of --pvalues or --tstats");
            return cmd_hurdles(hur, out);
        }
        if (*simulate_cmd) return cmd_simulate(sim, out);
        if (*panel_cmd) return cmd_panel(pan, out, err);
        if (*nulltable) return cmd_nulltable(nt, out);
    } catch (const InsufficientData& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const NoSolution& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const NumericError& e) {
        err << "error: numeric failure: " << e.what() << "\n";
        return kInternal;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}

}  // namespace pubbias::cli
