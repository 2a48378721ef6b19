#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace stpod {

struct TopEigenpairs {
    Eigen::VectorXd values;   ///< descending
    Eigen::MatrixXd vectors;  ///< orthonormal columns
    Eigen::Index iterations = 0;
    double max_residual = 0.0;  ///< max_k ||A v_k - lambda_k v_k|| / |lambda_1|
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Largest-algebraic eigenpairs of a symmetric operator by Lanczos with full
/// reorthogonalization. Iterates until every requested Ritz pair has residual
/// bound beta_j |s_j| <= rel_tol * |theta_1|, or the Krylov space is the whole
/// space. The start vector is drawn from a fixed Philox stream.
TopEigenpairs lanczos_top_eigenpairs(const LinearOperator& apply, Eigen::Index n, Eigen::Index count, double rel_tol,
                                     std::uint64_t seed = 0x5eed);

}  // namespace stpod
