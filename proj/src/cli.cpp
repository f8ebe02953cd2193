#include "smalldev/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "smalldev/acceptance.hpp"
#include "smalldev/coupling.hpp"
#include "smalldev/csv.hpp"
#include "smalldev/error.hpp"
#include "smalldev/gamma_fn.hpp"
#include "smalldev/lattice_dp.hpp"
#include "smalldev/mc_engine.hpp"
#include "smalldev/model_io.hpp"
#include "smalldev/parallel.hpp"
#include "smalldev/rng.hpp"

namespace smalldev {

namespace {

double predicted_limit(const EnvironmentModel& model, const BoundarySpec& boundary, const GammaTable* table,
                       std::string& formula) {
    const SigmaDecomposition sigma = sigma_decomposition(model);
    if (const auto* w = std::get_if<RecenteredWindow>(&boundary.mode)) {
        formula = "shao";
        return shao_rate(sigma.sigmaQ2, w->c);
    }
    const auto* w = std::get_if<ConstantWindow>(&boundary.mode);
    if (!w) {
        throw Error(ErrorCode::InvalidArgument, "convergence needs a constant or recentered window");
    }
    if (sigma.sigmaA2 <= 1e-15) {
        formula = "mogulskii";
        return mogulskii_rate(sigma.sigmaQ2, w->a, w->b);
    }
    if (!table) {
        throw Error(ErrorCode::InvalidArgument, "a gamma table is needed when the quenched means vary");
    }
    formula = "rwre";
    return rwre_rate(sigma.sigmaA2, sigma.sigmaQ2, w->a, w->b, *table).predicted;
}

}  // namespace

std::vector<ConvergenceRow> convergence_table(std::shared_ptr<const EnvironmentModel> model,
                                              const BoundarySpec& boundary, const ConvergenceOptions& options) {
    if (options.n_list.empty()) throw Error(ErrorCode::InvalidArgument, "n list is empty");
    for (std::size_t i = 0; i < options.n_list.size(); ++i) {
        if (options.n_list[i] == 0 || (i > 0 && options.n_list[i] <= options.n_list[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "n list must be positive and strictly increasing");
        }
    }
    if (options.seeds == 0) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
    for (std::size_t n : options.n_list) boundary.validate(n);

    std::string formula;
    const double predicted = predicted_limit(*model, boundary, options.table, formula);
    const bool lattice = model->all_lattice();

    const std::size_t cells = options.n_list.size() * options.seeds;
    std::vector<ConvergenceRow> rows(cells);
    parallel_for(cells, options.workers, [&](std::size_t cell) {
        ConvergenceRow& row = rows[cell];
        row.n = options.n_list[cell / options.seeds];
        row.seed = options.seed + cell % options.seeds;
        const auto envr = sample_environment(model, row.n + boundary.start_shift, row.seed);
        if (lattice) {
            const SurvivalResult r = exact_exponent(envr, boundary, row.n, StartVariant::SupStart);
            row.method = "dp";
            row.log_prob = r.log_prob;
            row.exponent = r.exponent;
        } else {
            SplitConfig config;
            config.D = options.D;
            config.particles = options.particles;
            const McEstimate est = split_survival(envr, boundary, row.n, 0.0, config, row.seed, 1);
            const double scale = exponent_scale(boundary.alpha, row.n);
            row.method = "split";
            row.log_prob = est.log_prob;
            row.exponent = est.log_prob / scale;
            row.std_error = est.std_error / scale;
        }
        row.formula = formula;
        row.predicted = predicted;
        row.rel_gap = (row.exponent - predicted) / std::abs(predicted);
    });
    return rows;
}

namespace cli {

bool is_validation_error(const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    return err && err->code() != ErrorCode::NegativeDensity;
}

namespace {

// Bad input detected by the runner itself; the message names the flag.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out;
};

struct WalkOpts {
    std::string model;
    std::size_t n = 1000;
    double alpha = 0.3;
    double a = -1.0;
    double b = 1.0;
    double a0 = 0.0;
    double b0 = 0.0;
    double aprime = 0.0;
    double bprime = 0.0;
    std::string boundary_file;
    double recenter = 1.0;
    std::size_t tn = 0;
    double x0 = 0.0;
    std::string variant = "sup";
    std::size_t seeds = 1;
};

struct McOpts {
    std::string method = "naive";
    int D = 4;
    std::size_t particles = 1000;
    std::size_t reps = 10000;
    bool bootstrap = false;
};

struct GammaOpts {
    double beta = 0.0;
    std::vector<double> betas{0.0, 0.5, 1.0, 1.5, 2.0};
    std::vector<double> t_list{2.0, 3.0, 4.0, 5.0, 6.0};
    std::size_t nw = 50;
    double dx = 0.005;
    double ds = 0.0;
    double w_ds = 2.5e-4;
    double a = 0.0;
    double b = 1.0;
};

struct PredictOpts {
    std::string model;
    std::string table;
    double a = -1.0;
    double b = 1.0;
    double recenter = 1.0;
    std::vector<std::size_t> n_list{1000};
};

struct CoupleOpts {
    std::size_t n = 100;
    std::size_t reps = 1000;
    std::string law = "1,0.5,1";
    std::vector<double> x_grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
};

struct ConvergenceOpts {
    std::string model;
    double alpha = 0.3;
    std::vector<std::size_t> n_list;
    double a = -1.0;
    double b = 1.0;
    double recenter = 1.0;
    std::size_t seeds = 1;
    std::string table;
    std::size_t particles = 1000;
    int D = 4;
};

struct AcceptanceOpts {
    std::string suite = "primary";
    std::vector<int> only;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "base seed (SMALLDEV_SEED overrides)");
    sub->add_option("--workers", c.workers, "worker threads, 0 = all cores");
    sub->add_option("--out", c.out, "output file (default stdout)");
}

void add_walk(CLI::App* sub, WalkOpts& w) {
    sub->add_option("--model", w.model, "model JSON file")->required();
    sub->add_option("--n", w.n, "number of steps")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", w.alpha, "window exponent in (0, 1/2)");
    auto* a = sub->add_option("--a", w.a, "lower window edge, units of n^alpha");
    auto* b = sub->add_option("--b", w.b, "upper window edge, units of n^alpha");
    sub->add_option("--a0", w.a0, "entry window lower edge, units of n^alpha");
    sub->add_option("--b0", w.b0, "entry window upper edge, units of n^alpha");
    sub->add_option("--aprime", w.aprime, "exit window lower edge, units of n^alpha");
    sub->add_option("--bprime", w.bprime, "exit window upper edge, units of n^alpha");
    auto* file = sub->add_option("--boundary-file", w.boundary_file,
                                 "CSV with columns lower,upper for steps 0..n (absolute positions)");
    auto* rec = sub->add_option("--recenter", w.recenter, "half-width c of a window around the quenched mean path");
    file->excludes(rec)->excludes(a)->excludes(b);
    rec->excludes(a)->excludes(b);
    sub->add_option("--tn", w.tn, "start time inside the environment");
    sub->add_option("--x0", w.x0, "start point for --variant point and for mc");
}

std::string read_file(const std::string& path, const std::string& flag) {
    if (!std::filesystem::is_regular_file(path)) {
        throw UsageError(flag + ": file not found: " + path);
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<const EnvironmentModel> load_model_flag(const std::string& path) {
    return model_from_json_text(read_file(path, "--model"));
}

GammaTable load_table_flag(const std::string& path) {
    std::istringstream in(read_file(path, "--gamma-table"));
    return GammaTable::read_csv(in);
}

BoundarySpec make_boundary(const CLI::App* sub, const WalkOpts& w) {
    BoundarySpec spec;
    spec.alpha = w.alpha;
    spec.start_shift = w.tn;
    if (sub->count("--boundary-file")) {
        std::istringstream in(read_file(w.boundary_file, "--boundary-file"));
        const CsvTable table = read_csv_table(in);
        const std::size_t lo = table.column("lower");
        const std::size_t hi = table.column("upper");
        ExplicitWindow win;
        for (const auto& row : table.rows) {
            win.lower.push_back(parse_double(row[lo]));
            win.upper.push_back(parse_double(row[hi]));
        }
        if (win.lower.size() != w.n + 1) {
            throw UsageError("--boundary-file: expected " + std::to_string(w.n + 1) + " rows, found " +
                             std::to_string(win.lower.size()));
        }
        spec.mode = std::move(win);
    } else if (sub->count("--recenter")) {
        spec.mode = RecenteredWindow{w.recenter};
    } else {
        spec.mode = ConstantWindow{w.a, w.b};
    }
    const bool has_entry = sub->count("--a0") || sub->count("--b0");
    const bool has_exit = sub->count("--aprime") || sub->count("--bprime");
    if (has_entry) {
        if (!sub->count("--a0") || !sub->count("--b0")) throw UsageError("--a0 and --b0 must be given together");
        spec.entry = Interval{w.a0, w.b0};
    }
    if (has_exit) {
        if (!sub->count("--aprime") || !sub->count("--bprime")) {
            throw UsageError("--aprime and --bprime must be given together");
        }
        spec.exit = Interval{w.aprime, w.bprime};
    }
    spec.validate(w.n);
    return spec;
}

// Canonical text of a value: numbers reformatted, list brackets dropped.
std::string normalize_value(std::string text) {
    if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
    std::string out;
    std::istringstream ss(text);
    std::string token;
    bool first = true;
    while (std::getline(ss, token, ',')) {
        token.erase(0, token.find_first_not_of(' '));
        try {
            token = format_double(parse_double(token));
        } catch (const Error&) {
        }
        out += (first ? "" : ",") + token;
        first = false;
    }
    return out;
}

std::uint64_t config_hash(const CLI::App* sub) {
    static const std::set<std::string> skip{"--help", "--out", "--workers", "--seed"};
    static const std::set<std::string> files{"--model", "--gamma-table", "--boundary-file"};
    std::map<std::string, std::string> fields;
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = "--" + opt->get_lnames().front();
        if (skip.count(name)) continue;
        std::string value;
        if (opt->count()) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        if (files.count(name) && opt->count()) {
            value = "file:" + std::to_string(fnv1a(read_file(value, name)));
        } else {
            value = normalize_value(value);
        }
        fields[name] = value;
    }
    std::string canon = sub->get_name();
    for (const auto& [k, v] : fields) canon += "\n" + k + "=" + v;
    return fnv1a(canon);
}

StartVariant parse_variant(const std::string& v) {
    if (v == "sup") return StartVariant::SupStart;
    if (v == "inf-exit") return StartVariant::InfEntryWithExit;
    return StartVariant::PointStart;
}

void run_exponent(const CLI::App* sub, const WalkOpts& w, const Common& c, std::ostream& os, const Provenance& prov) {
    const auto model = load_model_flag(w.model);
    const BoundarySpec spec = make_boundary(sub, w);
    if (w.seeds == 0) throw UsageError("--seeds must be at least 1");
    const StartVariant variant = parse_variant(w.variant);
    std::vector<SurvivalResult> results(w.seeds);
    parallel_for(w.seeds, c.workers, [&](std::size_t s) {
        const auto envr = sample_environment(model, w.n + w.tn, c.seed + s);
        results[s] = exact_exponent(envr, spec, w.n, variant, w.x0);
    });
    CsvWriter csv(os, {"seed", "n", "log_prob", "exponent"}, &prov);
    for (std::size_t s = 0; s < w.seeds; ++s) {
        csv.cell(std::to_string(c.seed + s)).cell(w.n).cell(results[s].log_prob).cell(results[s].exponent);
        csv.end_row();
    }
}

void run_mc(const CLI::App* sub, const WalkOpts& w, const McOpts& m, const Common& c, std::ostream& os,
            const Provenance& prov, std::ostream& err) {
    const auto model = load_model_flag(w.model);
    const BoundarySpec spec = make_boundary(sub, w);
    const auto envr = sample_environment(model, w.n + w.tn, c.seed);
    McEstimate est;
    if (m.method == "naive") {
        if (m.reps < 100) throw UsageError("--reps must be at least 100");
        est = mc_survival(envr, spec, w.n, w.x0, m.reps, c.seed, c.workers);
    } else {
        if (m.D < 1) throw UsageError("--D must be at least 1");
        if (m.particles < 2) throw UsageError("--particles must be at least 2");
        SplitConfig config;
        config.D = m.D;
        config.particles = m.particles;
        config.bootstrap = m.bootstrap;
        est = split_survival(envr, spec, w.n, w.x0, config, c.seed, c.workers);
    }
    if (est.status == McStatus::ZeroSuccesses) err << "warning: no trajectory survived; try --method split\n";
    if (est.status == McStatus::LevelExtinction) {
        err << "warning: level " << est.extinct_level << " lost all particles\n";
    }
    CsvWriter csv(os, {"method", "n", "log_prob", "stderr", "levels_extinct"}, &prov);
    csv.cell(m.method).cell(w.n).cell(est.log_prob).cell(est.std_error).cell(est.extinct_level);
    csv.end_row();
}

GammaConfig gamma_config(const GammaOpts& g, const Common& c, double beta) {
    GammaConfig config;
    config.beta = beta;
    config.t_list = g.t_list;
    config.n_w = g.nw;
    config.a = g.a;
    config.b = g.b;
    config.grid.dx = g.dx;
    config.grid.ds = g.ds > 0.0 ? g.ds : g.dx * g.dx;
    config.w_ds = g.w_ds;
    config.seed = c.seed;
    config.workers = c.workers;
    return config;
}

void write_gamma_rows(CsvWriter& csv, const GammaEstimate& est) {
    for (std::size_t i = 0; i < est.t_list.size(); ++i) {
        csv.cell(est.beta).cell(est.t_list[i]).cell(est.mean_xbar[i]).cell(est.var_xbar[i]);
        csv.cell(est.gamma_hat).cell(est.ci);
        csv.end_row();
    }
}

const std::vector<std::string> kGammaColumns{"beta", "t", "mean_xbar", "var_xbar", "gamma_hat", "ci"};

void run_gamma(const GammaOpts& g, const Common& c, std::ostream& os, const Provenance& prov) {
    const GammaEstimate est = gamma_estimate(gamma_config(g, c, g.beta));
    CsvWriter csv(os, kGammaColumns, &prov);
    write_gamma_rows(csv, est);
}

void run_gamma_table(const GammaOpts& g, const Common& c, std::ostream& os, const Provenance& prov,
                     std::ostream& err) {
    if (g.betas.empty()) throw UsageError("--betas is empty");
    std::vector<double> betas = g.betas;
    std::sort(betas.begin(), betas.end());
    CsvWriter csv(os, kGammaColumns, &prov);
    for (double beta : betas) {
        const GammaEstimate est = gamma_estimate(gamma_config(g, c, beta));
        err << "beta " << format_double(beta) << ": gamma_hat " << format_double(est.gamma_hat) << " +- "
            << format_double(est.ci) << "\n";
        write_gamma_rows(csv, est);
    }
}

void run_predict(const CLI::App* sub, const PredictOpts& p, std::ostream& os, const Provenance& prov) {
    const GammaTable table = load_table_flag(p.table);
    const auto model = load_model_flag(p.model);
    const SigmaDecomposition sigma = sigma_decomposition(*model);
    if (p.n_list.empty()) throw UsageError("--n is empty");
    RatePrediction pred;
    if (sub->count("--recenter")) {
        const QuenchedAnnealedGap gap = quenched_vs_annealed_gap(sigma.sigmaA2, sigma.sigmaQ2, p.recenter, table);
        pred = rwre_rate(sigma.sigmaA2, sigma.sigmaQ2, -p.recenter, p.recenter, table);
        pred.formula = "shao";
        pred.predicted = gap.recentered;
        pred.ci = 0.0;
    } else {
        pred = rwre_rate(sigma.sigmaA2, sigma.sigmaQ2, p.a, p.b, table);
    }
    CsvWriter csv(os, {"n", "formula", "sigmaA2", "sigmaQ2", "a", "b", "gamma", "gamma_ci", "predicted", "ci"},
                  &prov);
    for (std::size_t n : p.n_list) {
        csv.cell(n).cell(pred.formula).cell(sigma.sigmaA2).cell(sigma.sigmaQ2).cell(pred.a).cell(pred.b);
        csv.cell(pred.gamma).cell(pred.gamma_ci).cell(pred.predicted).cell(pred.ci);
        csv.end_row();
    }
}

void run_couple(const CoupleOpts& o, const Common& c, std::ostream& os, const Provenance& prov) {
    const TwoPointLaw law = TwoPointLaw::parse(o.law);
    if (o.n < 1) throw UsageError("--n must be at least 1");
    if (o.reps < 1000) throw UsageError("--reps must be at least 1000");
    const CouplingTailReport report = coupling_tail_report(law, o.n, o.reps, o.x_grid, c.seed, c.workers);
    os << "# " << CouplingTailReport::envelope_note << "\n";
    CsvWriter csv(os, {"x", "empirical_tail", "envelope_l2", "envelope_l4"}, &prov);
    for (const auto& row : report.rows) {
        csv.cell(row.x).cell(row.empirical_tail).cell(row.envelope_l2).cell(row.envelope_l4);
        csv.end_row();
    }
}

void run_convergence(const CLI::App* sub, const ConvergenceOpts& o, const Common& c, std::ostream& os,
                     const Provenance& prov) {
    if (o.n_list.empty()) throw UsageError("--n-list is empty");
    const auto model = load_model_flag(o.model);
    std::optional<GammaTable> table;
    if (sub->count("--gamma-table")) table = load_table_flag(o.table);
    BoundarySpec spec;
    spec.alpha = o.alpha;
    if (sub->count("--recenter")) {
        spec.mode = RecenteredWindow{o.recenter};
    } else {
        spec.mode = ConstantWindow{o.a, o.b};
    }
    ConvergenceOptions options;
    options.n_list = o.n_list;
    options.seeds = o.seeds;
    options.seed = c.seed;
    options.table = table ? &*table : nullptr;
    options.particles = o.particles;
    options.D = o.D;
    options.workers = c.workers;
    const auto rows = convergence_table(model, spec, options);
    CsvWriter csv(os, {"seed", "n", "method", "log_prob", "exponent", "stderr", "formula", "predicted", "rel_gap"},
                  &prov);
    for (const auto& r : rows) {
        csv.cell(std::to_string(r.seed)).cell(r.n).cell(r.method).cell(r.log_prob).cell(r.exponent);
        csv.cell(r.std_error).cell(r.formula).cell(r.predicted).cell(r.rel_gap);
        csv.end_row();
    }
}

int run_acceptance_cmd(const AcceptanceOpts& o, const Common& c, std::ostream& os, std::ostream& err) {
    AcceptanceOptions options;
    options.only.insert(o.only.begin(), o.only.end());
    options.seed = c.seed;
    options.workers = c.workers;
    options.on_result = [&](const CriterionResult& r) { err << format_result_line(r) << std::endl; };
    options.on_progress = [&](const std::string& msg) { err << "  .. " << msg << std::endl; };
    const auto results = run_acceptance(options);
    os << acceptance_summary(results, true).dump(2) << "\n";
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
    return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small deviation experiments for random walks in random environments", "smalldev"};
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;
    WalkOpts walk;
    McOpts mc;
    GammaOpts gam;
    PredictOpts pred;
    CoupleOpts cpl;
    ConvergenceOpts conv;
    AcceptanceOpts acc;

    auto* exponent = app.add_subcommand("exponent", "exact lattice DP exponent per environment seed");
    add_walk(exponent, walk);
    exponent->add_option("--seeds", walk.seeds, "number of environment seeds (seed, seed + 1, ...)");
    exponent->add_option("--variant", walk.variant, "start rule")
        ->check(CLI::IsMember({"sup", "inf-exit", "point"}));
    add_common(exponent, common);

    auto* mcs = app.add_subcommand("mc", "Monte Carlo survival estimate (naive or multilevel splitting)");
    add_walk(mcs, walk);
    mcs->add_option("--method", mc.method, "estimator")->check(CLI::IsMember({"naive", "split"}));
    mcs->add_option("--D", mc.D, "block length factor, T = floor(D n^(2 alpha))");
    mcs->add_option("--particles", mc.particles, "particles per splitting level");
    mcs->add_option("--reps", mc.reps, "naive trajectories");
    mcs->add_flag("--bootstrap", mc.bootstrap, "bootstrap standard error for splitting");
    add_common(mcs, common);

    auto add_gamma_common = [&](CLI::App* sub) {
        sub->add_option("--t-list", gam.t_list, "horizons for the slope fit")->delimiter(',');
        sub->add_option("--nw", gam.nw, "W samples per horizon");
        sub->add_option("--dx", gam.dx, "space step");
        sub->add_option("--ds", gam.ds, "time step (default dx^2)");
        sub->add_option("--w-ds", gam.w_ds, "resolution of the sampled W paths");
        sub->add_option("--a", gam.a, "tube lower edge");
        sub->add_option("--b", gam.b, "tube upper edge");
        add_common(sub, common);
    };
    auto* gamma = app.add_subcommand("gamma", "estimate gamma(beta) from heat-equation solves");
    gamma->add_option("--beta", gam.beta, "slope of the moving tube");
    add_gamma_common(gamma);
    auto* gtable = app.add_subcommand("gamma-table", "gamma(beta) over a grid of beta values");
    gtable->add_option("--betas", gam.betas, "beta grid")->delimiter(',');
    add_gamma_common(gtable);

    auto* predict = app.add_subcommand("predict", "predicted exponents from a gamma table and a model");
    predict->add_option("--gamma-table", pred.table, "CSV written by gamma or gamma-table")->required();
    predict->add_option("--model", pred.model, "model JSON file")->required();
    auto* pa = predict->add_option("--a", pred.a, "lower window edge, units of n^alpha");
    auto* pb = predict->add_option("--b", pred.b, "upper window edge, units of n^alpha");
    predict->add_option("--recenter", pred.recenter, "half-width c around the quenched mean")->excludes(pa)->excludes(pb);
    predict->add_option("--n", pred.n_list, "n values to label rows with")->delimiter(',');
    add_common(predict, common);

    auto* couple = app.add_subcommand("couple", "Skorokhod embedding of a two-point walk (shape demo)");
    couple->add_option("--n", cpl.n, "walk length");
    couple->add_option("--reps", cpl.reps, "replicas");
    couple->add_option("--law", cpl.law, "two-point law u,p,v: -u with probability p, else +v");
    couple->add_option("--x-grid", cpl.x_grid, "tail thresholds")->delimiter(',');
    add_common(couple, common);

    auto* convergence = app.add_subcommand("convergence", "measured exponents against the predicted limit");
    convergence->add_option("--model", conv.model, "model JSON file")->required();
    convergence->add_option("--alpha", conv.alpha, "window exponent in (0, 1/2)");
    convergence->add_option("--n-list", conv.n_list, "increasing n values")->delimiter(',')->required();
    auto* ca = convergence->add_option("--a", conv.a, "lower window edge, units of n^alpha");
    auto* cb = convergence->add_option("--b", conv.b, "upper window edge, units of n^alpha");
    convergence->add_option("--recenter", conv.recenter, "half-width c around the quenched mean")
        ->excludes(ca)
        ->excludes(cb);
    convergence->add_option("--seeds", conv.seeds, "environment seeds per n");
    convergence->add_option("--gamma-table", conv.table, "gamma table, needed when quenched means vary");
    convergence->add_option("--particles", conv.particles, "splitting particles (non-lattice models)");
    convergence->add_option("--D", conv.D, "splitting block factor (non-lattice models)");
    add_common(convergence, common);

    auto* acceptance = app.add_subcommand("acceptance", "run the acceptance battery, JSON summary on stdout");
    acceptance->add_option("--suite", acc.suite, "suite name")->check(CLI::IsMember({"primary"}));
    acceptance->add_option("--only", acc.only, "criterion numbers to run")->delimiter(',');
    add_common(acceptance, common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (const char* env_seed = std::getenv("SMALLDEV_SEED"); env_seed && *env_seed) {
            std::uint64_t value = 0;
            std::istringstream ss(env_seed);
            if (!(ss >> value) || !ss.eof()) throw UsageError(std::string("SMALLDEV_SEED: not a seed: ") + env_seed);
            common.seed = value;
        }
        const CLI::App* sub = app.get_subcommands().front();
        Provenance prov{kVersion, common.seed, config_hash(sub)};

        std::ostringstream body;
        int code = 0;
        if (sub == exponent) {
            run_exponent(sub, walk, common, body, prov);
        } else if (sub == mcs) {
            run_mc(sub, walk, mc, common, body, prov, err);
        } else if (sub == gamma) {
            run_gamma(gam, common, body, prov);
        } else if (sub == gtable) {
            run_gamma_table(gam, common, body, prov, err);
        } else if (sub == predict) {
            run_predict(sub, pred, body, prov);
        } else if (sub == couple) {
            run_couple(cpl, common, body, prov);
        } else if (sub == convergence) {
            run_convergence(sub, conv, common, body, prov);
        } else {
            code = run_acceptance_cmd(acc, common, body, err);
        }

        if (common.out.empty()) {
            out << body.str();
        } else {
            std::ofstream file(common.out, std::ios::binary);
            if (!file) throw std::runtime_error("cannot write " + common.out);
            file << body.str();
        }
        return code;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return is_validation_error(e) ? 2 : 1;
    }
}

}  // namespace cli

}  // namespace smalldev
