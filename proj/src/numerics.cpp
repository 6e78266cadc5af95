#include "tsd/numerics.hpp"

#include <stdexcept>
#include <string>

namespace tsd {

namespace {

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Matrix pseudo_inverse(const Matrix& A, double cutoff) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double threshold = s.size() > 0 ? cutoff * s(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > threshold) inv(i) = 1.0 / s(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

Matrix ridge_right_solve_normal(const Matrix& BAt, const Matrix& AAt, const Matrix& M_prev,
                                double rho) {
    if (!(rho > 0.0)) {
        throw std::invalid_argument("proximal parameter rho must be positive, got " +
                                    std::to_string(rho));
    }
    if (AAt.rows() != AAt.cols() || M_prev.cols() != AAt.rows() || BAt.rows() != M_prev.rows() ||
        BAt.cols() != M_prev.cols()) {
        throw std::invalid_argument("ridge solve dimension mismatch: BA^T " + dims(BAt) +
                                    ", AA^T " + dims(AAt) + ", M_prev " + dims(M_prev));
    }
    Matrix system = AAt;
    system.diagonal().array() += rho;
    const Matrix rhs = (rho * M_prev + BAt).transpose();

    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
        return llt.solve(rhs).transpose();
    }
    Eigen::BDCSVD<Matrix> svd(system, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.solve(rhs).transpose();
}

Matrix ridge_right_solve(const Matrix& B, const Matrix& A, const Matrix& M_prev, double rho) {
    if (B.cols() != A.cols() || A.rows() != M_prev.cols() || B.rows() != M_prev.rows()) {
        throw std::invalid_argument("ridge solve dimension mismatch: B " + dims(B) + ", A " +
                                    dims(A) + ", M_prev " + dims(M_prev));
    }
    return ridge_right_solve_normal(B * A.transpose(), A * A.transpose(), M_prev, rho);
}

Matrix lstsq_right(const Matrix& B, const Matrix& A, double cutoff) {
    if (A.size() == 0 || B.size() == 0) {
        throw std::invalid_argument("least squares on empty operands");
    }
    if (B.cols() != A.cols()) {
        throw std::invalid_argument("least squares dimension mismatch: B " + dims(B) + ", A " +
                                    dims(A));
    }
    return B * pseudo_inverse(A, cutoff);
}

std::size_t numerical_rank(const Matrix& M, double rel_tol) {
    if (M.size() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) ++r;
    }
    return r;
}

}  // namespace tsd
