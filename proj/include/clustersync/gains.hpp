#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "clustersync/graph.hpp"

namespace clustersync {

/// Agent dynamics x_dot = A x + B u.
struct PlantModel {
    Matrix A;
    Matrix B;

    PlantModel(Matrix a, Matrix b);
    int state_dim() const { return static_cast<int>(A.rows()); }
    int input_dim() const { return static_cast<int>(B.cols()); }
};

enum class PbhVerdict { controllable, stabilizable, neither };

/// A mode that fails the PBH rank test: sigma_min([A - lambda I, B]) <= tol.
/// left_vector v satisfies v^T A = lambda v^T and v^T B = 0 (up to sigma_min).
struct PbhMode {
    std::complex<double> lambda;
    Eigen::VectorXcd left_vector;
    double sigma_min;
};

struct PbhResult {
    PbhVerdict verdict = PbhVerdict::controllable;
    std::vector<PbhMode> offending;  // sorted by descending Re(lambda)
    double tol = 0.0;

    bool is_controllable() const { return verdict == PbhVerdict::controllable; }
    bool is_stabilizable() const { return verdict != PbhVerdict::neither; }
    const PbhMode* worst() const { return offending.empty() ? nullptr : &offending.front(); }
};

/// PBH eigenvalue test. Controllable iff sigma_min([A - lambda I, B]) > tol at
/// every eigenvalue; stabilizable iff that holds at every eigenvalue with
/// Re(lambda) >= 0. The overload without tol uses 1e-8 * ||[A B]||_F.
PbhResult pbh_stabilizability_check(const PlantModel& plant, double tol);
PbhResult pbh_stabilizability_check(const PlantModel& plant);

/// Synthesized feedback data. K = B^T P with P the stabilizing Riccati
/// solution; xi = lambda_min(weight) / lambda_max(P) is the decay margin the
/// design certifies (P A + A^T P - P B B^T P <= -xi P).
struct GainSet {
    Matrix P;
    Matrix K;
    double xi = 0.0;
    Vector xi_diag;        // diagonal of the assembled N x N Xi (empty until computed)
    Vector thresholds;     // per-cluster c*_l (empty until computed)

    double are_residual = 0.0;
    double remark_residual = 0.0;       // residual of the literal design equation
                                        // P A^T + A P - xi P B^T B P = xi P
    double closed_loop_abscissa = 0.0;  // max Re eig(A - B K)
    double design_inequality_gap = 0.0;          // lambda_max(P A + A^T P - P B B^T P + xi P)
};

/// Riccati-based gain synthesis: P solves A^T P + P A + weight - P B B^T P = 0.
/// Throws std::invalid_argument when the plant is not stabilizable and
/// CareFailure when the solver cannot reach residual <= 1e-8.
GainSet synthesize_gain(const PlantModel& plant);
GainSet synthesize_gain(const PlantModel& plant, const Matrix& weight);

struct XiResult {
    Vector diag;         // diagonal of Xi_l, strictly positive
    double certificate;  // lambda_min(Xi_l Lt + Lt^T Xi_l), must exceed tol
};

/// Diagonal scaling for a grounded (pinned) intra-cluster block: q = Lt^{-T} 1,
/// Xi = diag(q)^{-1}, certified by lambda_min(Xi Lt + Lt^T Xi) > tol. Throws
/// when q has a non-positive entry or the certificate fails.
XiResult compute_xi(const Matrix& grounded_block, double tol = 1e-9);

/// Per-cluster coupling thresholds of the averaged topology:
///   c*_l = max(0, -lambda_min(Xi L0 + L0^T Xi)
///                 / lambda_min(Xi_l Lt_ll + Lt_ll^T Xi_l)).
/// Choosing c_l > c*_l makes lambda_min(Xi Lt + Lt^T Xi) > 0 by the Weyl
/// bound. Throws when a cluster denominator is not positive (cluster not
/// pinned/connected on average).
Vector coupling_thresholds(const AverageResult& average, const ClusterPartition& partition,
                           const std::vector<Vector>& xi_blocks);

struct WeylBounds {
    Vector lower;  // lambda_i(H1) + lambda_min(H2)
    Vector upper;  // lambda_i(H1) + lambda_max(H2)
};

/// Interval bounds on the spectrum of H1 + H2 for symmetric inputs.
WeylBounds weyl_bounds(const Matrix& H1, const Matrix& H2);

/// Assembled grounded Laplacian of averaged data at given cluster gains:
/// blockdiag{c_l (L_ll + D_l)} + L0.
Matrix assemble_grounded_average(const AverageResult& average, const ClusterPartition& partition,
                                 const Vector& cluster_gains);

}  // namespace clustersync
