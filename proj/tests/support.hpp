#pragma once

#include "stpod/decomposition.hpp"
#include "stpod/rng.hpp"
#include "stpod/timeseries.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    stpod::NormalStream rng(seed, 99);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.next();
    return m;
}

inline Eigen::VectorXd positive_weights(Eigen::Index n, std::uint64_t seed) {
    stpod::NormalStream rng(seed, 98);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = 0.25 + 2.0 * rng.uniform();
    return w;
}

/// Eigenpairs of a general (not necessarily symmetric) real matrix with a real
/// spectrum, sorted by descending eigenvalue. Uses Eigen's nonsymmetric solver,
/// so it shares no code path with the SVD or self-adjoint engines.
struct EigenOracle {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline EigenOracle general_eigen(const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd re = es.eigenvalues().real();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(re.size()));
    for (Eigen::Index i = 0; i < re.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return re(x) > re(y); });
    EigenOracle out;
    out.values.resize(re.size());
    out.vectors.resize(a.rows(), a.cols());
    for (std::size_t k = 0; k < order.size(); ++k) {
        out.values(static_cast<Eigen::Index>(k)) = re(order[k]);
        out.vectors.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(order[k]).real();
    }
    return out;
}

/// Squared W-inner product of two vectors normalized in W.
inline double w_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    const double ab = a.dot(w.cwiseProduct(b));
    return ab * ab / (a.dot(w.cwiseProduct(a)) * b.dot(w.cwiseProduct(b)));
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("stpod-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
