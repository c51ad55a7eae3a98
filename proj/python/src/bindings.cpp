#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "obskit/app/commands.hpp"
#include "obskit/app/config.hpp"
#include "obskit/empirical_gramian.hpp"
#include "obskit/errors.hpp"
#include "obskit/linear_delay.hpp"
#include "obskit/neural_encoding.hpp"

namespace py = pybind11;
using namespace obskit;

namespace {

EncoderParams encoder_from(double c, double d) {
    EncoderParams p;
    p.c = c;
    p.d = d;
    return p;
}

// Runs one CLI command and returns its summary as a JSON string.
std::string run(const std::string& command, const std::string& config, std::optional<std::string> out,
                std::optional<std::uint64_t> seed, bool full) {
    app::CliOverrides o;
    o.full = full;
    if (out) o.out = *out;
    o.seed = seed;
    const app::RunConfig cfg = app::load_run_config(config, o);
    return app::run_command(command, cfg).summary.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Observability analysis core";

    auto base = py::register_exception<Error>(m, "ObskitError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<InfeasibleStart>(m, "InfeasibleStart", base.ptr());

    m.def("nla", [](double xi, double c, double d) { return nla(xi, encoder_from(c, d)); }, py::arg("xi"),
          py::arg("c") = 10.0, py::arg("d") = 0.5);
    m.def("nla_derivative", [](double xi, double c, double d) { return nla_derivative(xi, encoder_from(c, d)); },
          py::arg("xi"), py::arg("c") = 10.0, py::arg("d") = 0.5);
    m.def("sta_kernel", [](double tau) { return sta_kernel(tau, EncoderParams{}); }, py::arg("tau"));

    m.def(
        "effective_output_matrix",
        [](const Matrix& A, const Matrix& B, const std::vector<Matrix>& taps) {
            return effective_output_matrix(LinearDelaySystem{A, B, taps});
        },
        py::arg("A"), py::arg("B"), py::arg("taps"));
    m.def(
        "delayed_observability_rank",
        [](const Matrix& A, const Matrix& B, const std::vector<Matrix>& taps) {
            return numeric_rank(delayed_observability_matrix(LinearDelaySystem{A, B, taps}));
        },
        py::arg("A"), py::arg("B"), py::arg("taps"));

    m.def(
        "gramian_metrics",
        [](const Matrix& W) {
            const GramianMetrics g = gramian_metrics(W);
            py::dict d;
            d["nu"] = g.nu;
            d["kappa"] = g.kappa;
            d["det_root"] = g.det_root;
            d["log_det"] = g.log_det ? py::cast(*g.log_det) : py::none();
            d["trace"] = g.trace;
            d["lambda_min"] = g.lambda_min;
            d["lambda_max"] = g.lambda_max;
            d["rank"] = g.rank;
            d["singular"] = g.singular;
            return d;
        },
        py::arg("W"));
    m.def(
        "analytic_lti_gramian",
        [](const Matrix& A, const Matrix& C, double T) { return analytic_lti_gramian(A, C, 0.0, T); },
        py::arg("A"), py::arg("C"), py::arg("T"));

    m.def("run_command", &run, py::arg("command"), py::arg("config"), py::arg("out") = std::nullopt,
          py::arg("seed") = std::nullopt, py::arg("full") = false);
    m.def("command_names", &app::command_names);
}
