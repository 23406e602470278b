#include "irmc/config.hpp"
#include "irmc/errors.hpp"
#include "irmc/oracle.hpp"
#include "irmc/policy.hpp"
#include "irmc/stack_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace irmc;

namespace {

// A fitted stack together with the run settings it was produced from.
struct Run {
    RunConfig config;
    PolicyStack stack;

    State start(const std::optional<std::vector<double>>& x0) const {
        if (x0) return Eigen::Map<const Eigen::VectorXd>(x0->data(), static_cast<Eigen::Index>(x0->size()));
        return config.forward.x0.value_or(stack.model().x0);
    }
};

State to_state(const std::vector<double>& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

Run solve_config(const std::string& path, std::optional<std::uint64_t> seed, int threads) {
    Run r;
    r.config = load_config(path);
    if (seed) r.config.solver.seed = *seed;
    r.config.solver.threads = threads;
    auto model = build_model(r.config.model);
    py::gil_scoped_release release;
    r.stack = solve(model, r.config.solver).stack;
    return r;
}

Run load_run(const std::string& path) {
    const StackFile file = load_stack(path);
    Run r;
    r.config = default_config("federico");
    apply_stack_metadata(file.metadata, r.config);
    r.stack = rebuild_stack(file, build_model(r.config.model), r.config.solver.intervention);
    return r;
}

py::dict report_dict(const ForwardReport& rep, int dim) {
    const auto n = static_cast<Eigen::Index>(rep.events.size());
    Eigen::VectorXi path(n), step(n);
    Eigen::MatrixXd pre(n, dim), impulse(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ImpulseEvent& e = rep.events[static_cast<std::size_t>(i)];
        path(i) = e.path;
        step(i) = e.step;
        pre.row(i) = e.pre_state.transpose();
        impulse.row(i) = e.impulse.transpose();
    }
    py::dict d;
    d["value_estimate"] = rep.value_estimate;
    d["std_error"] = rep.std_error;
    d["n_paths"] = rep.n_paths;
    d["mean_running"] = rep.mean_running;
    d["mean_impulse"] = rep.mean_impulse;
    d["mean_terminal"] = rep.mean_terminal;
    d["mean_events_per_path"] = rep.mean_events_per_path;
    d["mean_impulse_size"] = rep.mean_impulse_size;
    d["mean_interimpulse_time"] = rep.mean_interimpulse_time;
    d["use_zhat"] = rep.use_zhat;
    d["event_path"] = path;
    d["event_step"] = step;
    d["event_pre_state"] = pre;
    d["event_impulse"] = impulse;
    return d;
}

py::dict boundary_dict(const std::vector<BoundaryPoint>& b) {
    const auto n = static_cast<Eigen::Index>(b.size());
    Eigen::VectorXd s(n), S(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        s(i) = b[static_cast<std::size_t>(i)].s;
        S(i) = b[static_cast<std::size_t>(i)].S;
    }
    py::dict d;
    d["s"] = s;
    d["S"] = S;
    return d;
}

} // namespace

PYBIND11_MODULE(_irmc, m) {
    m.doc() = "Regression Monte Carlo for finite-horizon impulse control.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<VersionMismatch>(m, "VersionMismatch", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<InvalidParameters>(m, "InvalidParameters", base.ptr());
    py::register_exception<InvalidModel>(m, "InvalidModel", base.ptr());
    py::register_exception<AbortAtStep>(m, "AbortAtStep", base.ptr());

    py::class_<FedericoSolution>(m, "FedericoSolution")
        .def_readonly("r", &FedericoSolution::r)
        .def_readonly("mu", &FedericoSolution::mu)
        .def_readonly("sigma", &FedericoSolution::sigma)
        .def_readonly("gamma", &FedericoSolution::gamma)
        .def_readonly("c0", &FedericoSolution::c0)
        .def_readonly("c1", &FedericoSolution::c1)
        .def_readonly("m", &FedericoSolution::m)
        .def_readonly("C", &FedericoSolution::C)
        .def_readonly("B", &FedericoSolution::B)
        .def_readonly("s", &FedericoSolution::s)
        .def_readonly("S", &FedericoSolution::S)
        .def("v", &FedericoSolution::v, py::arg("x"))
        .def("dv", &FedericoSolution::dv, py::arg("x"));

    m.def("federico_solution", &federico_solution, py::arg("r") = 0.08, py::arg("mu") = -0.07, py::arg("sigma") = 0.25,
          py::arg("gamma") = 0.5, py::arg("c0") = -1.0, py::arg("c1") = -10.0,
          "Stationary (s, S) solution of the 1-D GBM investment problem.");

    m.def(
        "brute_force_dp",
        [](const std::string& config_path, double lo, double hi, int n, bool log_spacing) {
            const RunConfig c = load_config(config_path);
            const auto model = build_model(c.model);
            DpGrid g;
            g.lo = lo;
            g.hi = hi;
            g.n = n;
            g.log_spacing = log_spacing;
            DpResult dp;
            {
                py::gil_scoped_release release;
                dp = brute_force_dp(*model, g);
            }
            py::dict d;
            d["grid"] = dp.grid;
            d["value"] = dp.value;
            d["q"] = dp.q;
            d["act"] = dp.act;
            d["target"] = dp.target;
            d["dt"] = dp.dt;
            return d;
        },
        py::arg("config"), py::arg("lo"), py::arg("hi"), py::arg("n") = 400, py::arg("log_spacing") = false,
        "Grid dynamic programming for a 1-D preset; returns value and policy tables.");

    py::class_<Run>(m, "Stack")
        .def_property_readonly("steps", [](const Run& r) { return r.stack.steps(); })
        .def_property_readonly("dim", [](const Run& r) { return r.stack.dim(); })
        .def_property_readonly("dt", [](const Run& r) { return r.stack.model().dt; })
        .def_property_readonly("preset", [](const Run& r) { return r.config.model.preset; })
        .def(
            "value", [](const Run& r, int k, const std::vector<double>& x) { return r.stack.value(k, to_state(x)); },
            py::arg("k"), py::arg("x"), "V(k, x) = max(Q, M), or the terminal value at k = K.")
        .def(
            "q_value",
            [](const Run& r, int k, const std::vector<double>& x) { return r.stack.at(k).q_value(to_state(x)); },
            py::arg("k"), py::arg("x"))
        .def(
            "decide",
            [](const Run& r, int k, const std::vector<double>& x) {
                const ActionDecision d = r.stack.at(k).decide(to_state(x));
                return py::make_tuple(d.act, Eigen::VectorXd(d.impulse));
            },
            py::arg("k"), py::arg("x"), "Returns (act, impulse) at step k.")
        .def(
            "forward",
            [](const Run& r, std::optional<int> n_paths, std::optional<std::uint64_t> seed,
               std::optional<std::vector<double>> x0, bool use_zhat, int threads) {
                ForwardOptions fo;
                fo.n_paths = n_paths.value_or(r.config.forward.n_paths);
                fo.seed = seed.value_or(r.config.forward.seed);
                fo.use_zhat = use_zhat;
                fo.threads = threads;
                ForwardReport rep;
                const State start = r.start(x0);
                {
                    py::gil_scoped_release release;
                    rep = forward_evaluate(r.stack, start, fo);
                }
                return report_dict(rep, r.stack.dim());
            },
            py::arg("n_paths") = py::none(), py::arg("seed") = py::none(), py::arg("x0") = py::none(),
            py::arg("use_zhat") = false, py::arg("threads") = 1, "Out-of-sample evaluation of the fitted policy.")
        .def(
            "scan_boundary", [](const Run& r) { return boundary_dict(scan_boundary(r.stack)); },
            "Per-step trigger and target levels from the policies alone.")
        .def(
            "save",
            [](const Run& r, const std::string& path) { save_stack(path, stack_to_file(r.stack, stack_metadata(r.config))); },
            py::arg("path"));

    m.def("solve", &solve_config, py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 1,
          "Fits the policy stack described by a config file.");
    m.def("load_stack", &load_run, py::arg("path"), "Reads a stack written by `save` or the command-line tool.");
    m.attr("STACK_FORMAT_VERSION") = kStackFormatVersion;
}
