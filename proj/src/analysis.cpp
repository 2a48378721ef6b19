#include "stpod/analysis.hpp"

#include "stpod/embedding.hpp"
#include "stpod/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace stpod {

namespace {

Eigen::VectorXd weight_for(const WeightSpec& weight, Eigen::Index length) {
    if (weight.size() == 0) return Eigen::VectorXd::Ones(length);
    return weight.for_length(length);
}

}  // namespace

double mode_similarity(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                       const WeightSpec& weight) {
    detail::require(a.size() == b.size(), "mode lengths differ");
    detail::require(a.size() > 0, "empty mode");
    const Eigen::VectorXd w = weight_for(weight, a.size());
    const double aa = a.dot(w.cwiseProduct(a));
    const double bb = b.dot(w.cwiseProduct(b));
    if (!(aa > 0.0) || !(bb > 0.0)) throw InputError("mode with zero norm");
    const double ab = a.dot(w.cwiseProduct(b));
    return std::min(1.0, ab * ab / (aa * bb));
}

double captured_energy(const Eigen::Ref<const Eigen::VectorXd>& mode, const ModeSet& reference) {
    if (mode.size() != reference.modes.rows()) {
        std::ostringstream msg;
        msg << "mode length " << mode.size() << " does not match reference length " << reference.modes.rows();
        throw InputError(msg.str());
    }
    const Eigen::VectorXd w = weight_for(reference.weight, mode.size());
    const Eigen::VectorXd wm = w.cwiseProduct(mode);
    const double norm2 = mode.dot(wm);
    if (!(norm2 > 0.0)) throw InputError("mode with zero norm");
    const Eigen::VectorXd c = reference.modes.transpose() * wm;
    return c.cwiseAbs2().dot(reference.energies) / norm2;
}

double cumulative_energy(const Eigen::Ref<const Eigen::MatrixXd>& modes, const ModeSet& reference) {
    if (modes.rows() != reference.modes.rows()) throw InputError("mode length does not match reference length");
    const Eigen::VectorXd w = weight_for(reference.weight, modes.rows());
    const Eigen::MatrixXd gram = modes.transpose() * w.asDiagonal() * modes;
    const double defect = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (defect > 1e-8) {
        std::ostringstream msg;
        msg << "modes are not W-orthonormal (max Gram defect " << defect << ")";
        throw InputError(msg.str());
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < modes.cols(); ++k) total += captured_energy(modes.col(k), reference);
    return total;
}

Eigen::VectorXd mode_psd(const Eigen::Ref<const Eigen::VectorXd>& mode, Eigen::Index n_space, Eigen::Index depth,
                         const WeightSpec& weight) {
    detail::require(n_space >= 1 && depth >= 1, "N and d must be positive");
    const Eigen::MatrixXd field = reshape_mode(mode, n_space, depth);
    const Eigen::VectorXd w = weight.size() == 0 ? Eigen::VectorXd::Ones(n_space) : weight.values();
    detail::require(w.size() == n_space, "weight dimension does not match N");

    Eigen::FFT<double> fft;
    Eigen::VectorXd psd = Eigen::VectorXd::Zero(depth);
    std::vector<double> row(static_cast<std::size_t>(depth));
    std::vector<std::complex<double>> spectrum;
    for (Eigen::Index x = 0; x < n_space; ++x) {
        for (Eigen::Index t = 0; t < depth; ++t) row[static_cast<std::size_t>(t)] = field(x, t);
        fft.fwd(spectrum, row);
        for (Eigen::Index j = 0; j < depth; ++j) psd(j) += w(x) * std::norm(spectrum[static_cast<std::size_t>(j)]);
    }
    return psd;
}

Eigen::VectorXd psd_frequencies(Eigen::Index depth, double dt) {
    Eigen::VectorXd omega(depth);
    for (Eigen::Index j = 0; j < depth; ++j) {
        const Eigen::Index signed_j = 2 * j > depth ? j - depth : j;
        omega(j) = 2.0 * std::numbers::pi * static_cast<double>(signed_j) / (static_cast<double>(depth) * dt);
    }
    return omega;
}

PeakBin peak_bin_fraction(const Eigen::Ref<const Eigen::VectorXd>& psd) {
    const Eigen::Index d = psd.size();
    detail::require(d >= 1, "empty spectrum");
    const double total = psd.sum();
    detail::require(total > 0.0, "spectrum with zero energy");
    PeakBin best;
    double best_energy = -1.0;
    for (Eigen::Index j = 0; 2 * j <= d; ++j) {
        double e = psd(j);
        if (j != 0 && 2 * j != d) e += psd(d - j);
        if (e > best_energy) {
            best_energy = e;
            best.bin = j;
        }
    }
    best.fraction = best_energy / total;
    return best;
}

double time_averaged_spatial_similarity(const Eigen::Ref<const Eigen::VectorXd>& spacetime_mode,
                                        const Eigen::Ref<const Eigen::VectorXd>& space_mode, Eigen::Index depth,
                                        const WeightSpec& weight) {
    const Eigen::Index n = space_mode.size();
    const Eigen::MatrixXd field = reshape_mode(spacetime_mode, n, depth);
    double sum = 0.0;
    for (Eigen::Index t = 0; t < depth; ++t) {
        if (field.col(t).squaredNorm() == 0.0) continue;
        sum += mode_similarity(field.col(t), space_mode, weight);
    }
    return sum / static_cast<double>(depth);
}

}  // namespace stpod
