#pragma once

#include "stpod/correlation.hpp"
#include "stpod/embedding.hpp"
#include "stpod/timeseries.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace stpod {

/// Diagonal positive weight W defining the inner product <a, b>_W = a^T W b.
/// Stored per spatial point; the space-time weight repeats it d times.
class WeightSpec {
public:
    enum class Kind { Uniform, Diagonal };

    WeightSpec() = default;
    static WeightSpec uniform(Eigen::Index n);
    /// Throws InputError on non-positive or non-finite entries.
    static WeightSpec diagonal(Eigen::VectorXd values);

    Kind kind() const noexcept { return kind_; }
    bool is_uniform() const noexcept { return kind_ == Kind::Uniform; }
    const Eigen::VectorXd& values() const noexcept { return diag_; }
    Eigen::Index size() const noexcept { return diag_.size(); }

    /// d-fold repetition, length N d.
    Eigen::VectorXd expanded(Eigen::Index depth) const;
    /// Weight matched to a vector of length `length`, which must be a multiple of N.
    Eigen::VectorXd for_length(Eigen::Index length) const;

private:
    Kind kind_ = Kind::Uniform;
    Eigen::VectorXd diag_;
};

enum class PodMethod { SpaceOnly, Hankel, Spaced, Toeplitz };

std::string to_string(PodMethod method);
PodMethod pod_method_from_string(const std::string& name);

/// Bookkeeping on what the engine dropped or clamped.
struct ModeDiagnostics {
    Eigen::Index truncated = 0;           ///< lambda_k < 1e-12 lambda_1
    Eigen::Index negative_clamped = 0;    ///< in [-1e-10 trace, 0), set to zero then truncated
    Eigen::Index negative_discarded = 0;  ///< below -1e-10 trace
    std::string solver;                   ///< "bdcsvd", "dense-eigen" or "lanczos"
    Eigen::Index iterations = 0;
    double max_residual = 0.0;
};

/// POD modes Phi (columns, W-orthonormal) and energies Lambda (nonincreasing).
/// Each mode is oriented so its largest-magnitude entry is positive.
struct ModeSet {
    Eigen::MatrixXd modes;
    Eigen::VectorXd energies;
    PodMethod method = PodMethod::SpaceOnly;
    std::optional<EmbeddingSpec> embedding;
    WeightSpec weight;  ///< spatial weight (length N)
    Eigen::Index m_used = 0;
    Eigen::Index n_space = 1;
    double dt = 1.0;
    ModeDiagnostics diagnostics;

    Eigen::Index rank() const noexcept { return modes.cols(); }
    Eigen::Index depth() const noexcept { return embedding ? embedding->depth : 1; }
    double window() const noexcept { return embedding ? embedding->window(dt) : 0.0; }
};

struct ToeplitzOptions {
    Eigen::Index dense_limit = 4096;  ///< N d above which the Lanczos path is used
    double residual_tolerance = 1e-8;
};

/// Thin SVD of (1/sqrt(m)) W^(1/2) data; Phi = W^(-1/2) U, Lambda = Sigma^2.
/// `weight` is spatial; data rows must equal weight.size() * depth.
///
/// The SVD kernel is Eigen's BDCSVD (divide-and-conquer bidiagonal SVD, with
/// a one-sided Jacobi fallback for small problems); it transposes wide inputs
/// internally so the cost is quadratic in the smaller dimension. With a
/// uniform weight, no scaling is applied and Phi is U up to column sign.
ModeSet weighted_svd_modes(const Eigen::MatrixXd& data, const WeightSpec& weight, Eigen::Index depth = 1);
ModeSet weighted_svd_modes(const DataMatrix& data, const WeightSpec& weight);

/// Space-only POD of the raw N x L snapshot matrix (m = L).
ModeSet space_only_pod(const SnapshotSeries& series, const WeightSpec& weight);

/// Space-time POD from the embedded matrix; method is Hankel for s = 1 and
/// Spaced otherwise.
ModeSet spacetime_pod(const SnapshotSeries& series, Eigen::Index depth, Eigen::Index spacing,
                      const WeightSpec& weight);

/// Space-time POD from the block-Toeplitz lag correlation: the top r
/// eigenpairs of W^(1/2) C~ W^(1/2), mapped back with W^(-1/2).
ModeSet spacetime_pod_toeplitz(const SnapshotSeries& series, Eigen::Index depth, const WeightSpec& weight,
                               Eigen::Index r, const ToeplitzOptions& options = {});

/// Same, from precomputed lag blocks.
ModeSet toeplitz_modes(const LagCorrelationSet& lags, const WeightSpec& weight, Eigen::Index r,
                       const ToeplitzOptions& options = {});

}  // namespace stpod
