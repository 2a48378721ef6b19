#include "stpod/eigensolver.hpp"

#include "stpod/error.hpp"
#include "stpod/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace stpod {

namespace {

Eigen::VectorXd random_unit(NormalStream& rng, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next();
    return v / v.norm();
}

void orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index used) {
    if (used == 0) return;
    const auto b = basis.leftCols(used);
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= b * (b.transpose() * w);
}

}  // namespace

TopEigenpairs lanczos_top_eigenpairs(const LinearOperator& apply, Eigen::Index n, Eigen::Index count, double rel_tol,
                                     std::uint64_t seed) {
    detail::require(n >= 1, "operator dimension must be positive");
    detail::require(count >= 1 && count <= n, "requested eigenpair count must be in [1, n]");

    NormalStream rng(seed, 0);
    Eigen::MatrixXd basis(n, std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * count + 20, 64)));
    std::vector<double> alpha;
    std::vector<double> beta;

    basis.col(0) = random_unit(rng, n);
    Eigen::Index used = 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    double anorm = 0.0;

    auto solve_tridiagonal = [&](Eigen::Index k) {
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
        Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1))
                                    : Eigen::VectorXd();
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    };

    Eigen::Index j = 0;
    for (;; ++j) {
        Eigen::VectorXd w = apply(basis.col(j));
        const double a = basis.col(j).dot(w);
        alpha.push_back(a);
        orthogonalize(w, basis, used);
        double b = w.norm();
        anorm = std::max(anorm, std::abs(a) + b);
        const Eigen::Index k = j + 1;

        bool converged = false;
        if (k >= count && (k == n || k % 5 == 0 || b <= 1e-14 * anorm)) {
            solve_tridiagonal(k);
            const Eigen::VectorXd& theta = tri.eigenvalues();
            const double top = std::max(std::abs(theta(k - 1)), std::numeric_limits<double>::min());
            converged = true;
            for (Eigen::Index i = 0; i < count; ++i) {
                const double bound = b * std::abs(tri.eigenvectors()(k - 1, k - 1 - i));
                if (bound > rel_tol * top) {
                    converged = false;
                    break;
                }
            }
        }
        if (converged || k == n) break;

        if (used == basis.cols()) basis.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, 2 * used));
        if (b <= 1e-14 * anorm) {
            // Invariant subspace found; continue from a fresh orthogonal direction.
            w = random_unit(rng, n);
            orthogonalize(w, basis, used);
            w /= w.norm();
            b = 0.0;
        } else {
            w /= b;
        }
        beta.push_back(b);
        basis.col(used++) = w;
    }

    const Eigen::Index k = j + 1;
    solve_tridiagonal(k);
    TopEigenpairs out;
    out.values.resize(count);
    out.vectors.resize(n, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        out.values(i) = tri.eigenvalues()(k - 1 - i);
        out.vectors.col(i) = basis.leftCols(k) * tri.eigenvectors().col(k - 1 - i);
    }
    out.iterations = k;
    const double top = std::max(std::abs(out.values(0)), std::numeric_limits<double>::min());
    for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::VectorXd r = apply(out.vectors.col(i)) - out.values(i) * out.vectors.col(i);
        out.max_residual = std::max(out.max_residual, r.norm() / top);
    }
    return out;
}

}  // namespace stpod
