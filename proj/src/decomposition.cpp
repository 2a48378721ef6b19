#include "stpod/decomposition.hpp"

#include "stpod/eigensolver.hpp"
#include "stpod/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace stpod {

namespace {

constexpr double kTruncation = 1e-12;
constexpr double kNegativeTolerance = 1e-10;
constexpr double kDegenerate = 1e-10;

void orient(Eigen::MatrixXd& modes) {
    for (Eigen::Index k = 0; k < modes.cols(); ++k) {
        Eigen::Index at = 0;
        modes.col(k).cwiseAbs().maxCoeff(&at);
        if (modes(at, k) < 0.0) modes.col(k) = -modes.col(k);
    }
}

bool lexicographically_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) != b(i)) return a(i) > b(i);
    return false;
}

/// Orders runs of numerically equal energies by their (oriented) entries.
void order_degenerate(Eigen::MatrixXd& modes, Eigen::VectorXd& energies) {
    Eigen::Index start = 0;
    while (start < energies.size()) {
        Eigen::Index stop = start + 1;
        while (stop < energies.size() &&
               std::abs(energies(start) - energies(stop)) <= kDegenerate * std::abs(energies(start)))
            ++stop;
        if (stop - start > 1) {
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(stop - start));
            std::iota(idx.begin(), idx.end(), start);
            std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
                return lexicographically_greater(modes.col(a), modes.col(b));
            });
            const Eigen::MatrixXd block = modes.middleCols(start, stop - start);
            const Eigen::VectorXd vals = energies.segment(start, stop - start);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                modes.col(start + static_cast<Eigen::Index>(i)) = block.col(idx[i] - start);
                energies(start + static_cast<Eigen::Index>(i)) = vals(idx[i] - start);
            }
        }
        start = stop;
    }
}

/// Applies the negative-eigenvalue policy and rank truncation to descending
/// (energies, modes), then orients and orders the survivors.
void finalize(ModeSet& set, Eigen::MatrixXd modes, Eigen::VectorXd energies, double trace, Eigen::Index keep) {
    Eigen::Index kept = 0;
    const double floor_negative = -kNegativeTolerance * std::abs(trace);
    for (Eigen::Index k = 0; k < energies.size(); ++k) {
        if (energies(k) < floor_negative) {
            ++set.diagnostics.negative_discarded;
            energies(k) = 0.0;
        } else if (energies(k) < 0.0) {
            ++set.diagnostics.negative_clamped;
            energies(k) = 0.0;
        }
    }
    const double top = energies.size() > 0 ? energies(0) : 0.0;
    for (Eigen::Index k = 0; k < energies.size(); ++k) {
        if (top > 0.0 && energies(k) >= kTruncation * top && energies(k) > 0.0)
            ++kept;
        else
            break;
    }
    const Eigen::Index dropped_negative = set.diagnostics.negative_discarded + set.diagnostics.negative_clamped;
    set.diagnostics.truncated = std::max<Eigen::Index>(0, energies.size() - kept - dropped_negative);
    if (keep > 0) kept = std::min(kept, keep);

    set.modes = modes.leftCols(kept);
    set.energies = energies.head(kept);
    orient(set.modes);
    order_degenerate(set.modes, set.energies);
}

void check_weight(const WeightSpec& weight, Eigen::Index rows, Eigen::Index depth) {
    if (weight.size() * depth != rows) {
        std::ostringstream msg;
        msg << "weight dimension mismatch: weight has " << weight.size() << " entries, data rows " << rows
            << " with depth " << depth;
        throw InputError(msg.str());
    }
}

}  // namespace

WeightSpec WeightSpec::uniform(Eigen::Index n) {
    detail::require(n >= 1, "weight dimension must be >= 1");
    WeightSpec w;
    w.kind_ = Kind::Uniform;
    w.diag_ = Eigen::VectorXd::Ones(n);
    return w;
}

WeightSpec WeightSpec::diagonal(Eigen::VectorXd values) {
    detail::require(values.size() >= 1, "weight dimension must be >= 1");
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!(values(i) > 0.0) || !std::isfinite(values(i))) {
            std::ostringstream msg;
            msg << "non-positive weight at index " << i;
            throw InputError(msg.str());
        }
    WeightSpec w;
    w.kind_ = (values.array() == 1.0).all() ? Kind::Uniform : Kind::Diagonal;
    w.diag_ = std::move(values);
    return w;
}

Eigen::VectorXd WeightSpec::expanded(Eigen::Index depth) const {
    return diag_.replicate(depth, 1);
}

Eigen::VectorXd WeightSpec::for_length(Eigen::Index length) const {
    if (diag_.size() == 0 || length % diag_.size() != 0)
        throw InputError("vector length is not a multiple of the weight dimension");
    return expanded(length / diag_.size());
}

std::string to_string(PodMethod method) {
    switch (method) {
        case PodMethod::SpaceOnly: return "space-only";
        case PodMethod::Hankel: return "hankel";
        case PodMethod::Spaced: return "spaced";
        case PodMethod::Toeplitz: return "toeplitz";
    }
    return "unknown";
}

PodMethod pod_method_from_string(const std::string& name) {
    if (name == "space-only") return PodMethod::SpaceOnly;
    if (name == "hankel") return PodMethod::Hankel;
    if (name == "spaced") return PodMethod::Spaced;
    if (name == "toeplitz") return PodMethod::Toeplitz;
    throw InputError("unknown POD method '" + name + "'");
}

ModeSet weighted_svd_modes(const Eigen::MatrixXd& data, const WeightSpec& weight, Eigen::Index depth) {
    detail::require(data.rows() >= 1 && data.cols() >= 1, "data matrix is empty");
    detail::require(depth >= 1, "depth must be >= 1");
    check_weight(weight, data.rows(), depth);

    const auto m = static_cast<double>(data.cols());
    ModeSet out;
    out.m_used = data.cols();
    out.n_space = weight.size();
    out.weight = weight;
    out.diagnostics.solver = "bdcsvd";

    Eigen::MatrixXd u;
    Eigen::VectorXd sigma;
    if (weight.is_uniform()) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(data * (1.0 / std::sqrt(m)), Eigen::ComputeThinU);
        u = svd.matrixU();
        sigma = svd.singularValues();
    } else {
        const Eigen::VectorXd root = weight.expanded(depth).cwiseSqrt();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(root.asDiagonal() * data * (1.0 / std::sqrt(m)), Eigen::ComputeThinU);
        u = root.cwiseInverse().asDiagonal() * svd.matrixU();
        sigma = svd.singularValues();
    }
    const Eigen::VectorXd energies = sigma.cwiseAbs2();
    finalize(out, std::move(u), energies, energies.sum(), 0);
    return out;
}

ModeSet weighted_svd_modes(const DataMatrix& data, const WeightSpec& weight) {
    detail::require(weight.size() == data.n_space, "weight dimension mismatch with spatial dimension");
    ModeSet out = weighted_svd_modes(data.values, weight, data.embedding.depth);
    out.embedding = data.embedding;
    out.dt = data.dt;
    out.method = data.embedding.spacing == 1 ? PodMethod::Hankel : PodMethod::Spaced;
    return out;
}

ModeSet space_only_pod(const SnapshotSeries& series, const WeightSpec& weight) {
    ModeSet out = weighted_svd_modes(series.values(), weight, 1);
    out.method = PodMethod::SpaceOnly;
    out.dt = series.dt();
    return out;
}

ModeSet spacetime_pod(const SnapshotSeries& series, Eigen::Index depth, Eigen::Index spacing,
                      const WeightSpec& weight) {
    return weighted_svd_modes(build_embedded(series, depth, spacing), weight);
}

ModeSet toeplitz_modes(const LagCorrelationSet& lags, const WeightSpec& weight, Eigen::Index r,
                       const ToeplitzOptions& options) {
    const Eigen::Index n = lags.n_space;
    const Eigen::Index d = lags.depth;
    const Eigen::Index size = n * d;
    detail::require(weight.size() == n, "weight dimension mismatch with spatial dimension");
    detail::require(r >= 0 && r <= size, "requested mode count r must be in [0, N d]");
    const Eigen::Index want = r == 0 ? size : r;

    ModeSet out;
    out.method = PodMethod::Toeplitz;
    out.embedding = EmbeddingSpec{d, 1};
    out.weight = weight;
    out.n_space = n;
    out.dt = lags.dt;
    out.m_used = lags.counts.empty() ? 0 : lags.counts.front();

    const Eigen::VectorXd root = weight.expanded(d).cwiseSqrt();
    const double trace = static_cast<double>(d) * weight.values().dot(lags.blocks.front().diagonal());

    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
    if (size <= options.dense_limit) {
        Eigen::MatrixXd sym = assemble_block_toeplitz(lags).values;
        if (!weight.is_uniform()) sym = root.asDiagonal() * sym * root.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
        values = eig.eigenvalues().reverse();
        vectors = eig.eigenvectors().rowwise().reverse();
        out.diagnostics.solver = "dense-eigen";
    } else {
        LinearOperator apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            if (weight.is_uniform()) return block_toeplitz_multiply(lags, x);
            return root.cwiseProduct(block_toeplitz_multiply(lags, root.cwiseProduct(x)));
        };
        TopEigenpairs top = lanczos_top_eigenpairs(apply, size, want, options.residual_tolerance);
        values = std::move(top.values);
        vectors = std::move(top.vectors);
        out.diagnostics.solver = "lanczos";
        out.diagnostics.iterations = top.iterations;
        out.diagnostics.max_residual = top.max_residual;
    }
    if (!weight.is_uniform()) vectors = root.cwiseInverse().asDiagonal() * vectors;
    finalize(out, std::move(vectors), std::move(values), trace, want);
    return out;
}

ModeSet spacetime_pod_toeplitz(const SnapshotSeries& series, Eigen::Index depth, const WeightSpec& weight,
                               Eigen::Index r, const ToeplitzOptions& options) {
    return toeplitz_modes(lag_correlations(series, depth), weight, r, options);
}

}  // namespace stpod
