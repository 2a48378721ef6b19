#include "stpod/embedding.hpp"

#include "stpod/error.hpp"

namespace stpod {

Eigen::Index embedded_columns(Eigen::Index length, Eigen::Index depth, Eigen::Index spacing) {
    detail::require(depth >= 1, "embedding depth d must be >= 1");
    detail::require(spacing >= 1, "column spacing s must be >= 1");
    if (length < depth) throw InputError("series shorter than embedding window");
    return (length - depth) / spacing + 1;
}

DataMatrix build_embedded(const SnapshotSeries& series, Eigen::Index depth, Eigen::Index spacing) {
    const Eigen::Index m = embedded_columns(series.length(), depth, spacing);
    const Eigen::Index n = series.dim();
    const Eigen::MatrixXd& q = series.values();

    DataMatrix out;
    out.values.resize(n * depth, m);
    out.embedding = EmbeddingSpec{depth, spacing};
    out.dt = series.dt();
    out.n_space = n;
    // Snapshots q_{js}..q_{js+d-1} are contiguous in the column-major source.
    for (Eigen::Index j = 0; j < m; ++j)
        out.values.col(j) = Eigen::Map<const Eigen::VectorXd>(q.data() + j * spacing * n, n * depth);
    return out;
}

Eigen::MatrixXd reshape_mode(const Eigen::Ref<const Eigen::VectorXd>& mode, Eigen::Index n_space, Eigen::Index depth) {
    detail::require(n_space >= 1 && depth >= 1, "reshape dimensions must be positive");
    if (mode.size() != n_space * depth) throw InputError("mode length does not equal N * d");
    return Eigen::Map<const Eigen::MatrixXd>(mode.data(), n_space, depth);
}

}  // namespace stpod
