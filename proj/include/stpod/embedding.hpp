#pragma once

#include "stpod/timeseries.hpp"

#include <Eigen/Dense>

namespace stpod {

/// Delay-embedding geometry: d stacked snapshots per column, s snapshots
/// between successive columns. The modes built from such a matrix are
/// optimal on the window T = (d - 1) dt.
struct EmbeddingSpec {
    Eigen::Index depth = 1;    ///< d
    Eigen::Index spacing = 1;  ///< s; 1 gives the block Hankel matrix

    double window(double dt) const noexcept { return static_cast<double>(depth - 1) * dt; }
    bool operator==(const EmbeddingSpec&) const = default;
};

/// (N d) x m matrix of stacked temporal realizations, column-major so each
/// realization is contiguous.
struct DataMatrix {
    Eigen::MatrixXd values;
    EmbeddingSpec embedding;
    double dt = 1.0;
    Eigen::Index n_space = 1;  ///< N

    Eigen::Index columns() const noexcept { return values.cols(); }
    double window() const noexcept { return embedding.window(dt); }
};

/// Number of columns build_embedded produces: floor((L - d) / s) + 1.
Eigen::Index embedded_columns(Eigen::Index length, Eigen::Index depth, Eigen::Index spacing);

/// Column j stacks q_{js}, ..., q_{js+d-1} (zero-based). Tail snapshots that
/// do not complete another column are dropped. The output is the only
/// allocation.
DataMatrix build_embedded(const SnapshotSeries& series, Eigen::Index depth, Eigen::Index spacing = 1);

/// Unstacks a length N d space-time vector into an N x d field whose column t
/// is the spatial slice at time index t.
Eigen::MatrixXd reshape_mode(const Eigen::Ref<const Eigen::VectorXd>& mode, Eigen::Index n_space, Eigen::Index depth);

}  // namespace stpod
