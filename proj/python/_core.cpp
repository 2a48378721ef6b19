#include "stpod/analysis.hpp"
#include "stpod/correlation.hpp"
#include "stpod/decomposition.hpp"
#include "stpod/embedding.hpp"
#include "stpod/error.hpp"
#include "stpod/io.hpp"
#include "stpod/rng.hpp"
#include "stpod/spod.hpp"
#include "stpod/timeseries.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

namespace py = pybind11;
using namespace stpod;

namespace {

WeightSpec make_weight(const std::optional<Eigen::VectorXd>& weight, Eigen::Index n) {
    if (!weight) return WeightSpec::uniform(n);
    return WeightSpec::diagonal(*weight);
}

SnapshotSeries series_of(const Eigen::MatrixXd& values, double dt) { return SnapshotSeries(values, dt); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "stpod core bindings";
    m.attr("__version__") = STPOD_VERSION;

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

    m.def(
        "philox_block",
        [](std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) { return Philox4x32::block(ctr, key); },
        py::arg("counter"), py::arg("key"));

    m.def(
        "generate_ou",
        [](const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion, std::size_t n, double dt,
           std::uint64_t seed, std::size_t burn_in) {
            GeneratorSpec spec{OuParams{drift, diffusion}, seed, burn_in};
            return generate(spec, n, dt).values();
        },
        py::arg("drift"), py::arg("diffusion"), py::arg("n"), py::arg("dt"), py::arg("seed") = 0,
        py::arg("burn_in") = 0, "Exact-discretization Ornstein-Uhlenbeck series, N x n.");
    m.def(
        "generate_narrowband",
        [](double omega0, double bandwidth, const Eigen::VectorXd& amplitude, double noise, std::size_t n, double dt,
           std::uint64_t seed, std::size_t burn_in) {
            GeneratorSpec spec{NarrowbandParams{omega0, bandwidth, amplitude, noise}, seed, burn_in};
            return generate(spec, n, dt).values();
        },
        py::arg("omega0"), py::arg("bandwidth"), py::arg("amplitude"), py::arg("noise"), py::arg("n"), py::arg("dt"),
        py::arg("seed") = 0, py::arg("burn_in") = 0);
    m.def(
        "generate_lorenz63",
        [](std::size_t n, double dt, std::uint64_t seed, std::size_t burn_in, double sigma, double rho, double beta) {
            GeneratorSpec spec{Lorenz63Params{sigma, rho, beta, {0, 1, 2}}, seed, burn_in};
            return generate(spec, n, dt).values();
        },
        py::arg("n"), py::arg("dt"), py::arg("seed") = 0, py::arg("burn_in") = 0, py::arg("sigma") = 10.0,
        py::arg("rho") = 28.0, py::arg("beta") = 8.0 / 3.0);

    m.def(
        "load_series",
        [](const std::filesystem::path& path) {
            const SnapshotSeries s = io::load_series(path);
            return py::make_tuple(s.values(), s.dt());
        },
        py::arg("path"), "Returns (values, dt).");
    m.def(
        "save_series",
        [](const Eigen::MatrixXd& values, double dt, const std::filesystem::path& path) {
            io::save_series(series_of(values, dt), path);
        },
        py::arg("values"), py::arg("dt"), py::arg("path"));
    m.def(
        "subtract_temporal_mean",
        [](const Eigen::MatrixXd& values) {
            auto [s, mean] = subtract_temporal_mean(series_of(values, 1.0));
            return py::make_tuple(s.values(), mean);
        },
        py::arg("values"));
    m.def(
        "decorrelation_time",
        [](const Eigen::MatrixXd& values, double dt) { return decorrelation_time(series_of(values, dt)); },
        py::arg("values"), py::arg("dt"));

    m.def(
        "build_embedded",
        [](const Eigen::MatrixXd& values, Eigen::Index d, Eigen::Index s) {
            return build_embedded(series_of(values, 1.0), d, s).values;
        },
        py::arg("values"), py::arg("d"), py::arg("s") = 1);
    m.def(
        "reshape_mode",
        [](const Eigen::VectorXd& mode, Eigen::Index n, Eigen::Index d) { return reshape_mode(mode, n, d); },
        py::arg("mode"), py::arg("n"), py::arg("d"));
    m.def(
        "lag_correlations",
        [](const Eigen::MatrixXd& values, Eigen::Index d) {
            return lag_correlations(series_of(values, 1.0), d).blocks;
        },
        py::arg("values"), py::arg("d"));
    m.def(
        "assemble_block_toeplitz",
        [](const std::vector<Eigen::MatrixXd>& blocks) {
            detail::require(!blocks.empty(), "need at least one lag block");
            LagCorrelationSet lags;
            lags.blocks = blocks;
            lags.n_space = blocks.front().rows();
            lags.depth = static_cast<Eigen::Index>(blocks.size());
            for (const auto& b : blocks)
                detail::require(b.rows() == lags.n_space && b.cols() == lags.n_space, "lag blocks must be N x N");
            return assemble_block_toeplitz(lags).values;
        },
        py::arg("blocks"));

    py::class_<ModeSet>(m, "ModeSet")
        .def_readonly("modes", &ModeSet::modes)
        .def_readonly("energies", &ModeSet::energies)
        .def_readonly("m_used", &ModeSet::m_used)
        .def_readonly("n_space", &ModeSet::n_space)
        .def_readonly("dt", &ModeSet::dt)
        .def_property_readonly("method", [](const ModeSet& s) { return to_string(s.method); })
        .def_property_readonly("depth", &ModeSet::depth)
        .def_property_readonly("rank", &ModeSet::rank)
        .def_property_readonly("window", &ModeSet::window)
        .def_property_readonly("weight", [](const ModeSet& s) { return s.weight.values(); })
        .def("__repr__", [](const ModeSet& s) {
            return "<ModeSet " + to_string(s.method) + " r=" + std::to_string(s.rank()) +
                   " d=" + std::to_string(s.depth()) + ">";
        });

    m.def(
        "weighted_svd_modes",
        [](const Eigen::MatrixXd& data, const std::optional<Eigen::VectorXd>& weight, Eigen::Index depth) {
            detail::require(depth >= 1 && data.rows() % depth == 0, "data rows must be a multiple of depth");
            return weighted_svd_modes(data, make_weight(weight, data.rows() / depth), depth);
        },
        py::arg("data"), py::arg("weight") = py::none(), py::arg("depth") = 1);
    m.def(
        "space_only_pod",
        [](const Eigen::MatrixXd& values, double dt, const std::optional<Eigen::VectorXd>& weight) {
            return space_only_pod(series_of(values, dt), make_weight(weight, values.rows()));
        },
        py::arg("values"), py::arg("dt") = 1.0, py::arg("weight") = py::none());
    m.def(
        "spacetime_pod",
        [](const Eigen::MatrixXd& values, double dt, Eigen::Index d, Eigen::Index s,
           const std::optional<Eigen::VectorXd>& weight) {
            return spacetime_pod(series_of(values, dt), d, s, make_weight(weight, values.rows()));
        },
        py::arg("values"), py::arg("dt"), py::arg("d"), py::arg("s") = 1, py::arg("weight") = py::none());
    m.def(
        "spacetime_pod_toeplitz",
        [](const Eigen::MatrixXd& values, double dt, Eigen::Index d, Eigen::Index r,
           const std::optional<Eigen::VectorXd>& weight) {
            return spacetime_pod_toeplitz(series_of(values, dt), d, make_weight(weight, values.rows()), r);
        },
        py::arg("values"), py::arg("dt"), py::arg("d"), py::arg("r") = 0, py::arg("weight") = py::none());
    m.def(
        "save_modes", [](const ModeSet& s, const std::filesystem::path& p) { io::save_modes(s, p); }, py::arg("modes"),
        py::arg("path"));
    m.def(
        "load_modes", [](const std::filesystem::path& p) { return io::load_modes(p); }, py::arg("path"));

    py::class_<FrequencyBin>(m, "FrequencyBin")
        .def_readonly("index", &FrequencyBin::index)
        .def_readonly("omega", &FrequencyBin::omega)
        .def_readonly("modes", &FrequencyBin::modes)
        .def_readonly("energies", &FrequencyBin::energies);
    py::class_<FrequencyModeSet>(m, "FrequencyModeSet")
        .def_readonly("bins", &FrequencyModeSet::bins)
        .def_readonly("blocks", &FrequencyModeSet::blocks)
        .def_readonly("dt", &FrequencyModeSet::dt)
        .def("total_energy", &FrequencyModeSet::total_energy);
    m.def(
        "spod",
        [](const Eigen::MatrixXd& values, double dt, Eigen::Index n_fft, double overlap, const std::string& window,
           bool one_sided, const std::optional<Eigen::VectorXd>& weight) {
            SpodSpec spec;
            spec.n_fft = n_fft;
            spec.overlap = overlap;
            spec.window = spod_window_from_string(window);
            spec.one_sided = one_sided;
            return spod(series_of(values, dt), spec, make_weight(weight, values.rows()));
        },
        py::arg("values"), py::arg("dt"), py::arg("n_fft"), py::arg("overlap") = 0.0,
        py::arg("window") = "rectangular", py::arg("one_sided") = true, py::arg("weight") = py::none());

    m.def(
        "mode_similarity",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::optional<Eigen::VectorXd>& weight) {
            return mode_similarity(a, b, weight ? WeightSpec::diagonal(*weight) : WeightSpec{});
        },
        py::arg("a"), py::arg("b"), py::arg("weight") = py::none());
    m.def(
        "captured_energy", [](const Eigen::VectorXd& mode, const ModeSet& ref) { return captured_energy(mode, ref); },
        py::arg("mode"), py::arg("reference"));
    m.def(
        "cumulative_energy",
        [](const Eigen::MatrixXd& modes, const ModeSet& ref) { return cumulative_energy(modes, ref); },
        py::arg("modes"), py::arg("reference"));
    m.def(
        "mode_psd",
        [](const Eigen::VectorXd& mode, Eigen::Index n, Eigen::Index d, const std::optional<Eigen::VectorXd>& weight) {
            return mode_psd(mode, n, d, make_weight(weight, n));
        },
        py::arg("mode"), py::arg("n"), py::arg("d"), py::arg("weight") = py::none());
    m.def(
        "peak_bin_fraction",
        [](const Eigen::VectorXd& psd) {
            const PeakBin p = peak_bin_fraction(psd);
            return py::make_tuple(p.bin, p.fraction);
        },
        py::arg("psd"), "Returns (folded bin, fraction).");
}
