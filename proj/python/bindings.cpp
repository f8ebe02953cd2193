#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "smalldev/boundary.hpp"
#include "smalldev/cli.hpp"
#include "smalldev/coupling.hpp"
#include "smalldev/env.hpp"
#include "smalldev/error.hpp"
#include "smalldev/gamma_fn.hpp"
#include "smalldev/lattice_dp.hpp"
#include "smalldev/mc_engine.hpp"
#include "smalldev/model_io.hpp"
#include "smalldev/rates.hpp"

namespace py = pybind11;
using namespace smalldev;

namespace {

// pybind11 holders cannot be shared_ptr<const T>; the library only hands out const models.
using ModelPtr = std::shared_ptr<EnvironmentModel>;

ModelPtr hold(std::shared_ptr<const EnvironmentModel> model) { return std::const_pointer_cast<EnvironmentModel>(model); }

StartVariant variant_from(const std::string& name) {
    if (name == "sup") return StartVariant::SupStart;
    if (name == "inf-exit") return StartVariant::InfEntryWithExit;
    if (name == "point") return StartVariant::PointStart;
    throw Error(ErrorCode::InvalidArgument, "variant must be sup, inf-exit or point");
}

BoundarySpec window(double alpha, double a, double b) {
    auto spec = BoundarySpec::constant(alpha, a, b);
    return spec;
}

py::dict mc_dict(const McEstimate& e) {
    py::dict d;
    d["log_prob"] = e.log_prob;
    d["std_error"] = e.std_error;
    d["replications"] = e.replications;
    d["status"] = e.status == McStatus::Ok ? "ok" : e.status == McStatus::ZeroSuccesses ? "zero-successes"
                                                                                           : "level-extinction";
    d["extinct_level"] = e.extinct_level;
    d["level_log"] = e.level_log;
    return d;
}

}  // namespace

PYBIND11_MODULE(_smalldev, m) {
    m.doc() = "Small deviation exponents for random walks in time-inhomogeneous random environments";
    m.attr("__version__") = kVersion;

    static py::exception<Error> error_type(m, "SmalldevError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type, e.what());
        }
    });

    py::class_<EnvironmentModel, ModelPtr>(m, "Model")
        .def_property_readonly("size", &EnvironmentModel::size)
        .def_property_readonly("centered", &EnvironmentModel::centered)
        .def_property_readonly("all_lattice", &EnvironmentModel::all_lattice)
        .def("annealed_step_variance", &EnvironmentModel::annealed_step_variance);

    m.def("load_model", [](const std::string& path) { return hold(load_model(path)); }, py::arg("path"));
    m.def("model_from_json", [](const std::string& text) { return hold(model_from_json_text(text)); }, py::arg("text"));
    m.def("sigma", [](const ModelPtr& model) {
        const auto d = sigma_decomposition(*model);
        return py::make_tuple(d.sigmaA2, d.sigmaQ2);
    }, py::arg("model"), "(sigma_A^2, sigma_Q^2)");

    m.def("quenched_moments", [](const ModelPtr& model, std::size_t n, std::uint64_t seed) {
        const auto envr = sample_environment(model, n, seed);
        std::vector<double> mean(n + 1), var(n + 1);
        for (std::size_t k = 0; k <= n; ++k) std::tie(mean[k], var[k]) = envr.moments(k);
        return py::make_tuple(mean, var);
    }, py::arg("model"), py::arg("n"), py::arg("seed"), "prefix quenched means and variances for k = 0..n");

    m.def("exponent", [](const ModelPtr& model, std::size_t n, double alpha, double a, double b, std::uint64_t seed,
                         const std::string& variant, double x0) {
        const auto envr = sample_environment(model, n, seed);
        const auto r = exact_exponent(envr, window(alpha, a, b), n, variant_from(variant), x0);
        return py::make_tuple(r.log_prob, r.exponent);
    }, py::arg("model"), py::arg("n"), py::arg("alpha") = 0.3, py::arg("a") = -1.0, py::arg("b") = 1.0,
          py::arg("seed") = 1, py::arg("variant") = "sup", py::arg("x0") = 0.0,
          "exact lattice DP: (log probability, exponent)");

    m.def("mc", [](const ModelPtr& model, std::size_t n, double alpha, double a, double b, std::uint64_t seed,
                   const std::string& method, std::size_t particles, int D, std::size_t reps, double x0,
                   unsigned workers) {
        const auto envr = sample_environment(model, n, seed);
        const auto spec = window(alpha, a, b);
        if (method == "naive") return mc_dict(mc_survival(envr, spec, n, x0, reps, seed, workers));
        if (method != "split") throw Error(ErrorCode::InvalidArgument, "method must be naive or split");
        SplitConfig config;
        config.D = D;
        config.particles = particles;
        return mc_dict(split_survival(envr, spec, n, x0, config, seed, workers));
    }, py::arg("model"), py::arg("n"), py::arg("alpha") = 0.3, py::arg("a") = -1.0, py::arg("b") = 1.0,
          py::arg("seed") = 1, py::arg("method") = "split", py::arg("particles") = 1000, py::arg("D") = 4,
          py::arg("reps") = 100000, py::arg("x0") = 0.0, py::arg("workers") = 1);

    m.def("tube_survival_fixed", &tube_survival_fixed, py::arg("a"), py::arg("b"), py::arg("x"), py::arg("t"));

    m.def("gamma", [](double beta, std::vector<double> t_list, std::size_t n_w, double dx, std::uint64_t seed,
                      unsigned workers) {
        GammaConfig config;
        config.beta = beta;
        config.t_list = std::move(t_list);
        config.n_w = n_w;
        config.grid.dx = dx;
        config.grid.ds = dx * dx;
        config.seed = seed;
        config.workers = workers;
        const auto e = gamma_estimate(config);
        return py::make_tuple(e.gamma_hat, e.ci);
    }, py::arg("beta"), py::arg("t_list") = std::vector<double>{2.0, 3.0, 4.0, 5.0, 6.0}, py::arg("n_w") = 50,
          py::arg("dx") = 0.005, py::arg("seed") = 1, py::arg("workers") = 1, "(gamma_hat, 95% half-width)");

    m.def("mogulskii_rate", &mogulskii_rate, py::arg("sigma2"), py::arg("a"), py::arg("b"));
    m.def("shao_rate", &shao_rate, py::arg("sigmaQ2"), py::arg("c"));
    m.def("rwre_rate", [](double sigmaA2, double sigmaQ2, double a, double b,
                          const std::vector<std::tuple<double, double, double>>& table) {
        std::vector<GammaTableEntry> entries;
        for (const auto& [beta, g, ci] : table) entries.push_back({beta, g, ci});
        const auto p = rwre_rate(sigmaA2, sigmaQ2, a, b, GammaTable(std::move(entries)));
        return py::make_tuple(p.predicted, p.ci);
    }, py::arg("sigmaA2"), py::arg("sigmaQ2"), py::arg("a"), py::arg("b"), py::arg("table"),
          "table rows are (beta, gamma, ci); returns (predicted, ci)");
    m.def("c_gh", [](const std::function<double(double)>& g, const std::function<double(double)>& h, double tol) {
        return c_gh(g, h, tol);
    }, py::arg("g"), py::arg("h"), py::arg("tol") = 1e-8);

    m.def("couple_median", [](const std::string& law, std::size_t n, std::size_t reps, std::uint64_t seed,
                              unsigned workers) {
        return coupling_median(TwoPointLaw::parse(law), n, reps, seed, workers);
    }, py::arg("law") = "1,0.5,1", py::arg("n") = 100, py::arg("reps") = 100, py::arg("seed") = 1,
          py::arg("workers") = 1);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "run the command line tool in-process: (exit code, stdout, stderr)");
}
