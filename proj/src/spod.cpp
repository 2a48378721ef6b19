#include "stpod/spod.hpp"

#include "stpod/error.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

namespace stpod {

namespace {

void validate(const SpodSpec& spec) {
    detail::require(spec.n_fft >= 2, "n_fft must be >= 2");
    detail::require(spec.overlap >= 0.0 && spec.overlap < 1.0, "overlap must lie in [0, 1)");
    detail::require(spec.hop() >= 1, "overlap leaves a zero hop between blocks");
}

void phase_fix(Eigen::MatrixXcd& modes) {
    for (Eigen::Index k = 0; k < modes.cols(); ++k) {
        Eigen::Index at = 0;
        modes.col(k).cwiseAbs().maxCoeff(&at);
        const std::complex<double> pivot = modes(at, k);
        if (std::abs(pivot) > 0.0) modes.col(k) *= std::conj(pivot) / std::abs(pivot);
    }
}

}  // namespace

std::string to_string(SpodWindow window) {
    return window == SpodWindow::Hann ? "hann" : "rectangular";
}

SpodWindow spod_window_from_string(const std::string& name) {
    if (name == "rectangular") return SpodWindow::Rectangular;
    if (name == "hann") return SpodWindow::Hann;
    throw InputError("unknown window '" + name + "'");
}

Eigen::Index SpodSpec::hop() const {
    return static_cast<Eigen::Index>(std::floor(static_cast<double>(n_fft) * (1.0 - overlap)));
}

Eigen::VectorXd spod_window(SpodWindow window, Eigen::Index n) {
    if (window == SpodWindow::Rectangular) return Eigen::VectorXd::Ones(n);
    Eigen::VectorXd w(n);
    for (Eigen::Index k = 0; k < n; ++k)
        w(k) = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
    return w;
}

double FrequencyModeSet::total_energy() const {
    double total = 0.0;
    for (const auto& bin : bins) total += bin.energies.sum();
    return total;
}

Eigen::Index spod_block_count(Eigen::Index length, const SpodSpec& spec) {
    validate(spec);
    if (length < spec.n_fft) throw InputError("series shorter than the SPOD block length n_fft");
    return (length - spec.n_fft) / spec.hop() + 1;
}

FrequencyModeSet spod(const SnapshotSeries& series, const SpodSpec& spec, const WeightSpec& weight) {
    const Eigen::Index blocks = spod_block_count(series.length(), spec);
    const Eigen::Index n = series.dim();
    const Eigen::Index nfft = spec.n_fft;
    detail::require(weight.size() == n, "weight dimension mismatch with spatial dimension");

    const Eigen::VectorXd window = spod_window(spec.window, nfft);
    const double scale = 1.0 / (static_cast<double>(nfft) * window.squaredNorm() * static_cast<double>(blocks));

    // spectra[j] holds Q_hat at bin j: N x blocks.
    std::vector<Eigen::MatrixXcd> spectra(static_cast<std::size_t>(nfft), Eigen::MatrixXcd(n, blocks));
    Eigen::FFT<double> fft;
    std::vector<double> segment(static_cast<std::size_t>(nfft));
    std::vector<std::complex<double>> transformed;
    const Eigen::MatrixXd& q = series.values();
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index start = b * spec.hop();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < nfft; ++k)
                segment[static_cast<std::size_t>(k)] = window(k) * q(i, start + k);
            fft.fwd(transformed, segment);
            for (Eigen::Index j = 0; j < nfft; ++j) spectra[static_cast<std::size_t>(j)](i, b) = transformed[static_cast<std::size_t>(j)];
        }
    }

    const Eigen::VectorXd root = weight.values().cwiseSqrt();
    const Eigen::Index last = spec.one_sided ? nfft / 2 : nfft - 1;

    FrequencyModeSet out;
    out.spec = spec;
    out.weight = weight;
    out.n_space = n;
    out.blocks = blocks;
    out.dt = series.dt();
    for (Eigen::Index j = 0; j <= last; ++j) {
        double bin_scale = scale;
        if (spec.one_sided && j > 0 && 2 * j != nfft) bin_scale *= 2.0;

        Eigen::MatrixXcd m = spectra[static_cast<std::size_t>(j)] * std::sqrt(bin_scale);
        if (!weight.is_uniform()) m = root.asDiagonal() * m;
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU);
        Eigen::VectorXd energies = svd.singularValues().cwiseAbs2();
        Eigen::Index kept = 0;
        const double top = energies.size() > 0 ? energies(0) : 0.0;
        while (kept < energies.size() && top > 0.0 && energies(kept) > 0.0 && energies(kept) >= 1e-12 * top) ++kept;

        FrequencyBin bin;
        bin.index = j;
        const Eigen::Index signed_j = 2 * j > nfft ? j - nfft : j;
        bin.omega = 2.0 * std::numbers::pi * static_cast<double>(signed_j) / (static_cast<double>(nfft) * series.dt());
        bin.modes = svd.matrixU().leftCols(kept);
        if (!weight.is_uniform()) bin.modes = root.cwiseInverse().asDiagonal() * bin.modes;
        phase_fix(bin.modes);
        bin.energies = energies.head(kept);
        out.bins.push_back(std::move(bin));
    }
    return out;
}

double spod_windowed_power(const SnapshotSeries& series, const SpodSpec& spec, const WeightSpec& weight) {
    const Eigen::Index blocks = spod_block_count(series.length(), spec);
    detail::require(weight.size() == series.dim(), "weight dimension mismatch with spatial dimension");
    const Eigen::VectorXd window = spod_window(spec.window, spec.n_fft);
    double total = 0.0;
    for (Eigen::Index b = 0; b < blocks; ++b)
        for (Eigen::Index k = 0; k < spec.n_fft; ++k) {
            const auto col = series.values().col(b * spec.hop() + k);
            total += window(k) * window(k) * col.cwiseAbs2().dot(weight.values());
        }
    return total / (window.squaredNorm() * static_cast<double>(blocks));
}

}  // namespace stpod
