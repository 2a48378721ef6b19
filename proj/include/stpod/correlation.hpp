#pragma once

#include "stpod/embedding.hpp"
#include "stpod/timeseries.hpp"

#include <Eigen/Dense>

#include <vector>

namespace stpod {

/// Lag-correlation blocks C_0..C_{d-1}; C_i = (1/(L-i)) sum_k q_k q_{k+i}^T.
struct LagCorrelationSet {
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::Index> counts;  ///< products averaged per block, L - i
    Eigen::Index n_space = 1;
    Eigen::Index depth = 1;
    double dt = 1.0;
};

enum class CorrelationKind { HankelProduct, BlockToeplitz };

struct SpaceTimeCorrelation {
    Eigen::MatrixXd values;  ///< (N d) x (N d)
    CorrelationKind kind = CorrelationKind::HankelProduct;
    Eigen::Index n_space = 1;
    Eigen::Index depth = 1;
    double dt = 1.0;
    Eigen::Index samples = 0;  ///< columns averaged (hankel-product only)

    /// N x N block (i, j).
    Eigen::MatrixXd block(Eigen::Index i, Eigen::Index j) const {
        return values.block(i * n_space, j * n_space, n_space, n_space);
    }
};

/// (1/m) Y Y^T. Exactly symmetric (lower triangle mirrored).
SpaceTimeCorrelation hankel_correlation(const DataMatrix& data);

/// Sums run over k = 0..L-i-1 in ascending order, so results are bitwise
/// reproducible.
LagCorrelationSet lag_correlations(const SnapshotSeries& series, Eigen::Index depth);

/// block(i, j) = C_{j-i} for j >= i and C_{i-j}^T otherwise.
SpaceTimeCorrelation assemble_block_toeplitz(const LagCorrelationSet& lags);

/// y = C~ x using the lag blocks directly, without assembling C~.
Eigen::VectorXd block_toeplitz_multiply(const LagCorrelationSet& lags, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Largest entrywise spread among blocks sharing the same lag:
/// max over lag l, pairs (i, i'), of max |block(i, i+l) - block(i', i'+l)|.
/// Zero for an exactly block-Toeplitz matrix.
double same_lag_block_spread(const SpaceTimeCorrelation& corr);

}  // namespace stpod
