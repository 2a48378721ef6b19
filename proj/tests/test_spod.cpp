#include "doctest.h"
#include "support.hpp"

#include "stpod/analysis.hpp"
#include "stpod/error.hpp"
#include "stpod/io.hpp"
#include "stpod/spod.hpp"

#include <cmath>
#include <numbers>

using namespace stpod;

namespace {

/// Mean over blocks of sum_k w_k^2 ||q_k||_W^2 / sum_k w_k^2, summed in time.
double windowed_power_oracle(const Eigen::MatrixXd& q, Eigen::Index nfft, Eigen::Index hop, bool hann,
                             const Eigen::VectorXd& w) {
    double total = 0.0, norm = 0.0;
    std::vector<double> win(static_cast<std::size_t>(nfft));
    for (Eigen::Index k = 0; k < nfft; ++k) {
        win[static_cast<std::size_t>(k)] =
            hann ? std::pow(std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(nfft)), 2) : 1.0;
        norm += win[static_cast<std::size_t>(k)] * win[static_cast<std::size_t>(k)];
    }
    Eigen::Index blocks = 0;
    for (Eigen::Index start = 0; start + nfft <= q.cols(); start += hop, ++blocks)
        for (Eigen::Index k = 0; k < nfft; ++k)
            for (Eigen::Index i = 0; i < q.rows(); ++i) {
                const double v = win[static_cast<std::size_t>(k)] * q(i, start + k);
                total += w(i) * v * v;
            }
    return total / (norm * static_cast<double>(blocks));
}

}  // namespace

TEST_SUITE("spod") {

TEST_CASE("block count and validation") {
    SpodSpec spec;
    spec.n_fft = 32;
    spec.overlap = 0.5;
    CHECK(spec.hop() == 16);
    CHECK(spod_block_count(100, spec) == 5);
    CHECK_THROWS_AS(spod_block_count(31, spec), InputError);
    spec.overlap = 1.0;
    CHECK_THROWS_AS(spod_block_count(100, spec), InputError);
    spec.overlap = -0.1;
    CHECK_THROWS_AS(spod_block_count(100, spec), InputError);
    spec.overlap = 0.0;
    spec.n_fft = 1;
    CHECK_THROWS_AS(spod_block_count(100, spec), InputError);
    CHECK(spod_window_from_string("hann") == SpodWindow::Hann);
    CHECK_THROWS_AS(spod_window_from_string("hamming"), InputError);
}

TEST_CASE("constant series puts all energy at bin 0") {
    const double c = 1.5;
    SpodSpec spec;
    spec.n_fft = 16;
    const auto f = spod(SnapshotSeries(Eigen::RowVectorXd::Constant(64, c), 1.0), spec, WeightSpec::uniform(1));
    REQUIRE(f.bins.size() == 9);
    REQUIRE(f.bins[0].energies.size() == 1);
    CHECK(f.bins[0].energies(0) == doctest::Approx(c * c).epsilon(1e-14));
    for (std::size_t j = 1; j < f.bins.size(); ++j)
        CHECK((f.bins[j].energies.size() == 0 || f.bins[j].energies(0) <= 1e-12));
}

TEST_CASE("on-grid cosine recovers the spatial amplitude") {
    const Eigen::Index nfft = 32, length = 320;
    const double omega = 2.0 * std::numbers::pi * 5.0 / static_cast<double>(nfft);
    const Eigen::Vector3d a(1.0, -0.5, 2.0);
    Eigen::MatrixXd q(3, length);
    for (Eigen::Index k = 0; k < length; ++k) q.col(k) = a * std::cos(omega * static_cast<double>(k));
    SpodSpec spec;
    spec.n_fft = nfft;
    for (const auto& wv : {Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(0.5, 2.0, 1.0)}) {
        const WeightSpec w = WeightSpec::diagonal(wv);
        const auto f = spod(SnapshotSeries(q, 1.0), spec, w);
        const FrequencyBin& bin = f.bins[5];
        CHECK(bin.omega == doctest::Approx(omega));
        const Eigen::VectorXcd psi = bin.modes.col(0);
        const std::complex<double> ip = psi.dot(wv.cast<std::complex<double>>().cwiseProduct(a.cast<std::complex<double>>()));
        CHECK(std::norm(ip) / a.dot(wv.cwiseProduct(a)) >= 1.0 - 1e-8);
        for (std::size_t j = 0; j < f.bins.size(); ++j)
            if (j != 5 && f.bins[j].energies.size() > 0) CHECK(f.bins[j].energies(0) <= 1e-10 * bin.energies(0));
        // Amplitude-squared over two for the folded cosine power.
        CHECK(f.total_energy() == doctest::Approx(0.5 * a.dot(wv.cwiseProduct(a))));
    }
}

TEST_CASE("Parseval accounting on white noise") {
    const Eigen::MatrixXd q = testing::gaussian(2, 1000, 21);
    const Eigen::Vector2d wv(1.0, 3.0);
    for (bool one_sided : {true, false})
        for (bool hann : {false, true})
            for (double overlap : {0.0, 0.5}) {
                SpodSpec spec;
                spec.n_fft = 20;
                spec.overlap = overlap;
                spec.window = hann ? SpodWindow::Hann : SpodWindow::Rectangular;
                spec.one_sided = one_sided;
                const auto f = spod(SnapshotSeries(q, 1.0), spec, WeightSpec::diagonal(wv));
                const double oracle = windowed_power_oracle(q, 20, spec.hop(), hann, wv);
                CHECK(std::abs(f.total_energy() - oracle) <= 1e-8 * oracle);
                CHECK(f.bins.size() == (one_sided ? 11u : 20u));
                // Energy is spread, not concentrated.
                double top = 0.0;
                for (const auto& b : f.bins) top = std::max(top, b.energies(0));
                CHECK(top < 0.5 * f.total_energy());
            }
}

TEST_CASE("per-bin W-orthonormality and conjugate symmetry") {
    const Eigen::MatrixXd q = testing::gaussian(4, 600, 2);
    const Eigen::Vector4d wv(1.0, 2.0, 0.5, 1.5);
    SpodSpec spec;
    spec.n_fft = 16;
    spec.one_sided = false;
    const auto f = spod(SnapshotSeries(q, 0.5), spec, WeightSpec::diagonal(wv));
    const Eigen::VectorXcd w = wv.cast<std::complex<double>>();
    for (const auto& bin : f.bins) {
        const Eigen::MatrixXcd gram = bin.modes.adjoint() * w.asDiagonal() * bin.modes;
        CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-10);
        for (Eigen::Index k = 0; k + 1 < bin.energies.size(); ++k) CHECK(bin.energies(k) >= bin.energies(k + 1));
    }
    for (Eigen::Index j = 1; j < 8; ++j) {
        const auto& pos = f.bins[static_cast<std::size_t>(j)];
        const auto& neg = f.bins[static_cast<std::size_t>(16 - j)];
        CHECK(neg.omega == doctest::Approx(-pos.omega));
        for (Eigen::Index k = 0; k < 4; ++k) {
            CHECK(neg.energies(k) == doctest::Approx(pos.energies(k)).epsilon(1e-10));
            CHECK((neg.modes.col(k) - pos.modes.col(k).conjugate()).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("long-window Hankel PSD peak matches the SPOD peak bin") {
    NarrowbandParams p{2.0 * std::numbers::pi * 4.0 / 33.0, 0.002, Eigen::Vector3d(1.0, 0.5, -0.3), 0.3};
    const auto x = generate(GeneratorSpec{p, 5, 0}, 20000, 1.0);
    const ModeSet h = spacetime_pod(x, 33, 1, WeightSpec::uniform(3));
    const PeakBin peak = peak_bin_fraction(mode_psd(h.modes.col(0), 3, 33, WeightSpec::uniform(3)));
    SpodSpec spec;
    spec.n_fft = 33;
    const auto f = spod(x, spec, WeightSpec::uniform(3));
    std::size_t best = 0;
    for (std::size_t j = 0; j < f.bins.size(); ++j)
        if (f.bins[j].energies(0) > f.bins[best].energies(0)) best = j;
    CHECK(best == 4);
    CHECK(peak.bin == static_cast<Eigen::Index>(best));
}

TEST_CASE("STPF round trip") {
    testing::TempDir dir("spod");
    SpodSpec spec;
    spec.n_fft = 8;
    spec.window = SpodWindow::Hann;
    spec.overlap = 0.25;
    const auto f = spod(SnapshotSeries(testing::gaussian(3, 100, 4), 0.2), spec,
                        WeightSpec::diagonal(Eigen::Vector3d(1, 2, 3)));
    io::save_frequency_modes(f, dir / "f.stpf");
    const auto g = io::load_frequency_modes(dir / "f.stpf");
    REQUIRE(g.bins.size() == f.bins.size());
    CHECK(g.spec.window == SpodWindow::Hann);
    CHECK(g.spec.overlap == 0.25);
    CHECK(g.blocks == f.blocks);
    CHECK(g.weight.values() == f.weight.values());
    for (std::size_t j = 0; j < f.bins.size(); ++j) {
        CHECK(g.bins[j].modes == f.bins[j].modes);
        CHECK(g.bins[j].energies == f.bins[j].energies);
        CHECK(g.bins[j].omega == f.bins[j].omega);
    }
    CHECK(io::describe_file(dir / "f.stpf").find("format: stpf") != std::string::npos);
}

}
