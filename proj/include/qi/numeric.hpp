#pragma once

#include <Eigen/Dense>

#include "qi/common.hpp"

namespace qi {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void check_finite(const DenseMatrix& A, const Vector* b = nullptr) {
    if (A.rows() < 1 || A.cols() < 1) throw config_error("matrix must be at least 1x1");
    if (!A.allFinite()) throw config_error("non-finite matrix entry");
    if (b && !b->allFinite()) throw config_error("non-finite right-hand side entry");
}

}  // namespace detail

// Minimum-norm least-squares solution and the residual norm ||Ax - b||.
inline std::pair<Vector, double> solve_least_squares(const DenseMatrix& A, const Vector& b) {
    detail::check_finite(A, &b);
    if (A.rows() != b.size()) throw config_error("least-squares dimension mismatch");
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(A);
    Vector x = cod.solve(b);
    return {x, (A * x - b).norm()};
}

// Orthonormal basis of the numerical nullspace: right singular vectors whose
// singular value is <= rel_tol * sigma_max.
inline std::vector<Vector> nullspace(const DenseMatrix& A, double rel_tol = 1e-9) {
    detail::check_finite(A);
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw config_error("rel_tol must be in (0,1)");
    Eigen::BDCSVD<DenseMatrix> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    const double tol = rel_tol * smax;
    std::vector<Vector> basis;
    for (int k = 0; k < A.cols(); ++k) {
        double s = k < sv.size() ? sv(k) : 0.0;
        if (s <= tol) basis.push_back(svd.matrixV().col(k));
    }
    return basis;
}

}  // namespace qi
