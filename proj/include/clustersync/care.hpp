#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace clustersync {

using Matrix = Eigen::MatrixXd;

struct CareResult {
    Matrix P;            // stabilizing solution, symmetric positive definite
    double residual;     // ||A^T P + P A + Q - P B B^T P||_F
    int newton_steps;    // refinement iterations actually taken
};

class CareFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stabilizing solution of A^T P + P A + Q - P B B^T P = 0 via the stable
/// invariant subspace of the Hamiltonian (complex Schur with stable-first
/// reordering), refined by Newton/Kleinman steps until the residual drops
/// below tol. Throws CareFailure when no stabilizing solution exists or the
/// residual cannot be met.
CareResult solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, double tol = 1e-8,
                      int max_newton = 8);

/// Solution X of A^T X + X A + C = 0 (Bartels-Stewart on the complex Schur
/// form of A). A must have no eigenvalue pair summing to zero.
Matrix solve_lyapunov(const Matrix& A, const Matrix& C);

}  // namespace clustersync
