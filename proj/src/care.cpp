#include "clustersync/care.hpp"

#include <complex>

namespace clustersync {

namespace {

using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Swaps the diagonal entries (k, k+1) of the upper-triangular T by a unitary
// similarity, updating U accordingly (the complex analogue of LAPACK trexc).
void swap_adjacent(ComplexMatrix& T, ComplexMatrix& U, Eigen::Index k) {
    const Complex a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
    if (std::abs(a - c) == 0.0) return;
    // Eigenvector of [[a, b], [0, c]] for eigenvalue c, normalized.
    Complex v0 = b, v1 = c - a;
    const double nrm = std::sqrt(std::norm(v0) + std::norm(v1));
    v0 /= nrm;
    v1 /= nrm;
    Eigen::Matrix2cd G;
    G << v0, -std::conj(v1), v1, std::conj(v0);
    T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
    T.middleCols(k, 2) = T.middleCols(k, 2) * G;
    U.middleCols(k, 2) = U.middleCols(k, 2) * G;
    T(k + 1, k) = 0.0;
}

// Reorders the Schur form so that eigenvalues satisfying pred come first.
template <class Pred>
void reorder_schur(ComplexMatrix& T, ComplexMatrix& U, Pred pred) {
    const Eigen::Index n = T.rows();
    bool moved = true;
    while (moved) {
        moved = false;
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            if (!pred(T(k, k)) && pred(T(k + 1, k + 1))) {
                swap_adjacent(T, U, k);
                moved = true;
            }
        }
    }
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& C) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || C.rows() != n || C.cols() != n)
        throw std::invalid_argument("lyapunov: dimension mismatch");

    Eigen::ComplexSchur<Matrix> schur(A);
    if (schur.info() != Eigen::Success) throw CareFailure("lyapunov: Schur failed to converge");
    const ComplexMatrix T = schur.matrixT();
    const ComplexMatrix U = schur.matrixU();

    // A^T X + X A + C = 0 with A = U T U^*  =>  T^* Y + Y T = -U^* C U,
    // Y = U^* X U. Solve column by column; T^* + t_kk I is lower triangular.
    ComplexMatrix Ct = -U.adjoint() * C * U;
    ComplexMatrix Y = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXcd rhs = Ct.col(k);
        for (Eigen::Index j = 0; j < k; ++j) rhs -= T(j, k) * Y.col(j);
        ComplexMatrix M = T.adjoint();
        M.diagonal().array() += T(k, k);
        Y.col(k) = M.triangularView<Eigen::Lower>().solve(rhs);
    }
    return (U * Y * U.adjoint()).real();
}

CareResult solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, double tol,
                      int max_newton) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("care: A must be square");
    if (B.rows() != n) throw std::invalid_argument("care: B row count must match A");
    if (Q.rows() != n || Q.cols() != n) throw std::invalid_argument("care: Q size mismatch");
    if ((Q - Q.transpose()).norm() > 1e-10 * std::max(1.0, Q.norm()))
        throw std::invalid_argument("care: Q must be symmetric");

    const Matrix BBt = B * B.transpose();

    // Hamiltonian; its stable invariant subspace [U11; U21] gives P = U21 U11^{-1}.
    Matrix H(2 * n, 2 * n);
    H << A, -BBt, -Q, -A.transpose();

    Eigen::ComplexSchur<Matrix> schur(H);
    if (schur.info() != Eigen::Success) throw CareFailure("care: Schur failed to converge");
    ComplexMatrix T = schur.matrixT();
    ComplexMatrix U = schur.matrixU();
    reorder_schur(T, U, [](const Complex& z) { return z.real() < 0.0; });

    Eigen::Index stable = 0;
    for (Eigen::Index k = 0; k < 2 * n; ++k)
        if (T(k, k).real() < 0.0) ++stable;
    if (stable != n)
        throw CareFailure("care: Hamiltonian has " + std::to_string(stable) +
                          " stable eigenvalues, expected " + std::to_string(n) +
                          " (pair not stabilizable/detectable)");

    const ComplexMatrix U11 = U.topLeftCorner(n, n);
    const ComplexMatrix U21 = U.bottomLeftCorner(n, n);
    Eigen::FullPivLU<ComplexMatrix> lu(U11);
    if (!lu.isInvertible()) throw CareFailure("care: singular invariant-subspace basis");
    Matrix P = (U21 * lu.inverse()).real();
    P = 0.5 * (P + P.transpose());

    auto residual_of = [&](const Matrix& X) {
        return (A.transpose() * X + X * A + Q - X * BBt * X).norm();
    };

    // Newton/Kleinman refinement: solve Acl^T D + D Acl + R(P) = 0, P += D.
    double res = residual_of(P);
    int steps = 0;
    while (res > tol && steps < max_newton) {
        const Matrix R = A.transpose() * P + P * A + Q - P * BBt * P;
        const Matrix Acl = A - BBt * P;
        Matrix D = solve_lyapunov(Acl, R);
        P += 0.5 * (D + D.transpose());
        P = 0.5 * (P + P.transpose());
        const double next = residual_of(P);
        ++steps;
        if (next >= res && res <= 1e2 * tol) break;
        res = next;
    }
    res = residual_of(P);
    if (res > tol)
        throw CareFailure("care: residual " + std::to_string(res) + " above tolerance");
    return {P, res, steps};
}

}  // namespace clustersync
