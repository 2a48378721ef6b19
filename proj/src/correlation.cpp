#include "stpod/correlation.hpp"

#include "stpod/error.hpp"

#include <algorithm>
#include <cmath>

namespace stpod {

SpaceTimeCorrelation hankel_correlation(const DataMatrix& data) {
    detail::require(data.values.size() > 0, "data matrix is empty");
    const Eigen::Index rows = data.values.rows();
    const auto m = static_cast<double>(data.values.cols());

    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(rows, rows);
    c.selfadjointView<Eigen::Lower>().rankUpdate(data.values, 1.0 / m);
    c.triangularView<Eigen::StrictlyUpper>() = c.transpose();

    SpaceTimeCorrelation out;
    out.values = std::move(c);
    out.kind = CorrelationKind::HankelProduct;
    out.n_space = data.n_space;
    out.depth = data.embedding.depth;
    out.dt = data.dt;
    out.samples = data.values.cols();
    return out;
}

LagCorrelationSet lag_correlations(const SnapshotSeries& series, Eigen::Index depth) {
    detail::require(depth >= 1, "embedding depth d must be >= 1");
    const Eigen::Index len = series.length();
    if (len < depth) throw InputError("series shorter than embedding window");
    const Eigen::Index n = series.dim();
    const Eigen::MatrixXd& q = series.values();

    LagCorrelationSet out;
    out.n_space = n;
    out.depth = depth;
    out.dt = series.dt();
    out.blocks.reserve(static_cast<std::size_t>(depth));
    out.counts.reserve(static_cast<std::size_t>(depth));
    for (Eigen::Index lag = 0; lag < depth; ++lag) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
        const Eigen::Index count = len - lag;
        for (Eigen::Index k = 0; k < count; ++k) {
            const double* a = q.data() + k * n;
            const double* b = q.data() + (k + lag) * n;
            for (Eigen::Index col = 0; col < n; ++col)
                for (Eigen::Index row = 0; row < n; ++row) acc(row, col) += a[row] * b[col];
        }
        acc /= static_cast<double>(count);
        out.blocks.push_back(std::move(acc));
        out.counts.push_back(count);
    }
    return out;
}

SpaceTimeCorrelation assemble_block_toeplitz(const LagCorrelationSet& lags) {
    const Eigen::Index n = lags.n_space;
    const Eigen::Index d = lags.depth;
    detail::require(static_cast<Eigen::Index>(lags.blocks.size()) == d, "lag set must hold d blocks");

    SpaceTimeCorrelation out;
    out.values.resize(n * d, n * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            auto dst = out.values.block(i * n, j * n, n, n);
            if (j >= i)
                dst = lags.blocks[static_cast<std::size_t>(j - i)];
            else
                dst = lags.blocks[static_cast<std::size_t>(i - j)].transpose();
        }
    out.kind = CorrelationKind::BlockToeplitz;
    out.n_space = n;
    out.depth = d;
    out.dt = lags.dt;
    return out;
}

Eigen::VectorXd block_toeplitz_multiply(const LagCorrelationSet& lags, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index n = lags.n_space;
    const Eigen::Index d = lags.depth;
    detail::require(x.size() == n * d, "vector length must equal N * d");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto xs = x.segment(j * n, n);
            if (j >= i)
                y.segment(i * n, n).noalias() += lags.blocks[static_cast<std::size_t>(j - i)] * xs;
            else
                y.segment(i * n, n).noalias() += lags.blocks[static_cast<std::size_t>(i - j)].transpose() * xs;
        }
    return y;
}

double same_lag_block_spread(const SpaceTimeCorrelation& corr) {
    const Eigen::Index n = corr.n_space;
    const Eigen::Index d = corr.depth;
    double spread = 0.0;
    for (Eigen::Index lag = 0; lag < d; ++lag) {
        const Eigen::MatrixXd first = corr.values.block(0, lag * n, n, n);
        Eigen::MatrixXd lo = first;
        Eigen::MatrixXd hi = first;
        for (Eigen::Index i = 1; i + lag < d; ++i) {
            const auto b = corr.values.block(i * n, (i + lag) * n, n, n);
            lo = lo.cwiseMin(b);
            hi = hi.cwiseMax(b);
        }
        spread = std::max(spread, (hi - lo).maxCoeff());
    }
    return spread;
}

}  // namespace stpod
