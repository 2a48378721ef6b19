#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stpod {

/// Uniformly sampled vector time series: column k of `values()` is the
/// snapshot q_k, an N-vector. Immutable after construction.
class SnapshotSeries {
public:
    SnapshotSeries(Eigen::MatrixXd values, double dt, std::vector<std::string> labels = {});

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    double dt() const noexcept { return dt_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    Eigen::Index dim() const noexcept { return values_.rows(); }      ///< N
    Eigen::Index length() const noexcept { return values_.cols(); }   ///< L

    /// First `count` snapshots as a new series.
    SnapshotSeries head(Eigen::Index count) const;

private:
    Eigen::MatrixXd values_;
    double dt_;
    std::vector<std::string> labels_;
};

struct OuParams {
    Eigen::MatrixXd drift;      ///< A, N x N, must be stable
    Eigen::MatrixXd diffusion;  ///< B, N x k
};

/// Narrowband carrier q_k = a Re(z_k) + noise * white, with z a complex
/// AR(1) of unit variance, pole exp((i omega0 - bandwidth) dt).
struct NarrowbandParams {
    double omega0 = 0.0;
    double bandwidth = 0.0;
    Eigen::VectorXd amplitude;
    double noise = 0.0;
};

struct Lorenz63Params {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    std::vector<int> observed{0, 1, 2};
};

struct GeneratorSpec {
    std::variant<OuParams, NarrowbandParams, Lorenz63Params> params;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;

    std::string kind() const;
    Eigen::Index dim() const;

    static GeneratorSpec scalar_ou(double tau, double diffusion, std::uint64_t seed, std::size_t burn_in = 0);
};

SnapshotSeries generate(const GeneratorSpec& spec, std::size_t n_snapshots, double dt);

/// Stationary covariance of dx = A x dt + B dW: solves A S + S A^T + B B^T = 0.
Eigen::MatrixXd ou_stationary_covariance(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion);

/// E[q_{k+lag} q_k^T] = exp(A lag dt) S for the exact OU process.
Eigen::MatrixXd ou_lag_covariance(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion, double lag_time);

/// Returns the series with its temporal mean removed and the mean itself.
std::pair<SnapshotSeries, Eigen::VectorXd> subtract_temporal_mean(const SnapshotSeries& series);

/// Smallest lag time at which the trace autocorrelation falls below 1/e.
/// Scans lags up to max_lag (default 4096); returns max_lag * dt if it never does.
double decorrelation_time(const SnapshotSeries& series, Eigen::Index max_lag = -1);

}  // namespace stpod
