#pragma once

#include "stpod/decomposition.hpp"

#include <Eigen/Dense>

namespace stpod {

/// |<a, b>_W|^2 / (||a||_W^2 ||b||_W^2). The weight is spatial (length N) and
/// is repeated to the vector length. Throws InputError on a zero-norm input.
double mode_similarity(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                       const WeightSpec& weight);

/// lambda[phi] = sum_k c_k^2 lambda_k with c_k = <phi, phi_k>_W / ||phi||_W.
double captured_energy(const Eigen::Ref<const Eigen::VectorXd>& mode, const ModeSet& reference);

/// Sum of captured_energy over the columns of `modes`, which must be mutually
/// W-orthonormal to 1e-8.
double cumulative_energy(const Eigen::Ref<const Eigen::MatrixXd>& modes, const ModeSet& reference);

/// Energy of a space-time mode per DFT bin: the mode is reshaped to N x d, each
/// spatial row is transformed along time with the unnormalized forward DFT,
/// and bin j holds sum_x w_x |phi_hat(x, j)|^2. Two-sided, length d, so the
/// bins sum to d ||mode||_W^2.
Eigen::VectorXd mode_psd(const Eigen::Ref<const Eigen::VectorXd>& mode, Eigen::Index n_space, Eigen::Index depth,
                         const WeightSpec& weight);

/// Angular frequency of each mode_psd bin, negative above the Nyquist bin.
Eigen::VectorXd psd_frequencies(Eigen::Index depth, double dt);

struct PeakBin {
    Eigen::Index bin = 0;   ///< folded index in 0..floor(d/2)
    double fraction = 0.0;  ///< folded peak energy over total
};

/// Folds bins j and d - j together and returns the largest folded bin.
PeakBin peak_bin_fraction(const Eigen::Ref<const Eigen::VectorXd>& psd);

/// Mean over the d spatial slices of a space-time mode of their similarity to
/// a spatial mode. Slices with zero norm count as 0.
double time_averaged_spatial_similarity(const Eigen::Ref<const Eigen::VectorXd>& spacetime_mode,
                                        const Eigen::Ref<const Eigen::VectorXd>& space_mode, Eigen::Index depth,
                                        const WeightSpec& weight);

}  // namespace stpod
