#pragma once

#include "stpod/decomposition.hpp"
#include "stpod/timeseries.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace stpod {

enum class SpodWindow { Rectangular, Hann };

std::string to_string(SpodWindow window);
SpodWindow spod_window_from_string(const std::string& name);

/// Welch blocking parameters.
struct SpodSpec {
    Eigen::Index n_fft = 64;
    double overlap = 0.0;  ///< fraction in [0, 1)
    SpodWindow window = SpodWindow::Rectangular;
    bool one_sided = true;

    Eigen::Index hop() const;  ///< floor(n_fft (1 - overlap))
};

/// Window samples w_0..w_{n-1}. Hann is the periodic form 0.5 (1 - cos(2 pi k / n)).
Eigen::VectorXd spod_window(SpodWindow window, Eigen::Index n);

struct FrequencyBin {
    Eigen::Index index = 0;  ///< DFT bin j
    double omega = 0.0;      ///< 2 pi j / (n_fft dt), negative for j > n_fft / 2
    Eigen::MatrixXcd modes;  ///< N x r, W-orthonormal
    Eigen::VectorXd energies;
};

struct FrequencyModeSet {
    std::vector<FrequencyBin> bins;  ///< ordered by bin index
    SpodSpec spec;
    WeightSpec weight;
    Eigen::Index n_space = 1;
    Eigen::Index blocks = 0;
    double dt = 1.0;

    double total_energy() const;
};

/// Number of Welch blocks: floor((L - n_fft) / hop) + 1.
Eigen::Index spod_block_count(Eigen::Index length, const SpodSpec& spec);

/// Per bin, the thin SVD of sqrt(c / m_b) W^(1/2) Q_hat, with Q_hat the
/// unnormalized DFT of each windowed block and c = 1 / (n_fft sum w_k^2).
/// One-sided output keeps bins 0..floor(n_fft/2) and doubles the energies of
/// bins that have a negative-frequency partner. Under this scaling the total
/// energy equals the mean over blocks of sum_k ||w_k q_k||_W^2 / sum_k w_k^2.
/// Each mode is phased so its largest-magnitude entry is real and positive.
FrequencyModeSet spod(const SnapshotSeries& series, const SpodSpec& spec, const WeightSpec& weight);

/// The right-hand side of the energy identity, computed directly in time.
double spod_windowed_power(const SnapshotSeries& series, const SpodSpec& spec, const WeightSpec& weight);

}  // namespace stpod
