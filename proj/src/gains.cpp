#include "clustersync/gains.hpp"

#include <algorithm>
#include <cmath>

#include "clustersync/care.hpp"

namespace clustersync {

namespace {

double symmetry_defect(const Matrix& m) { return (m - m.transpose()).norm(); }

Vector eigs_ascending(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    return es.eigenvalues();
}

double lambda_min(const Matrix& sym) { return eigs_ascending(sym)(0); }

}  // namespace

PlantModel::PlantModel(Matrix a, Matrix b) : A(std::move(a)), B(std::move(b)) {
    if (A.rows() != A.cols()) throw std::invalid_argument("plant: A must be square");
    if (B.rows() != A.rows()) throw std::invalid_argument("plant: B row count must match A");
    if (!A.allFinite() || !B.allFinite())
        throw std::invalid_argument("plant: non-finite entry");
}

PbhResult pbh_stabilizability_check(const PlantModel& plant) {
    Matrix ab(plant.A.rows(), plant.A.cols() + plant.B.cols());
    ab << plant.A, plant.B;
    return pbh_stabilizability_check(plant, 1e-8 * ab.norm());
}

PbhResult pbh_stabilizability_check(const PlantModel& plant, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("pbh: tol must be positive");
    const int n = plant.state_dim();
    const int m = plant.input_dim();

    Eigen::EigenSolver<Matrix> es(plant.A);
    if (es.info() != Eigen::Success) throw std::runtime_error("pbh: eigensolver did not converge");

    PbhResult result;
    result.tol = tol;
    bool unstable_offender = false;
    for (int k = 0; k < n; ++k) {
        const std::complex<double> lambda = es.eigenvalues()(k);
        Eigen::MatrixXcd pencil(n, n + m);
        pencil.leftCols(n) = plant.A.cast<std::complex<double>>();
        pencil.leftCols(n).diagonal().array() -= lambda;
        pencil.rightCols(m) = plant.B.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil, Eigen::ComputeFullU);
        const double smin = svd.singularValues()(n - 1);
        if (smin <= tol) {
            // u^H [A - lambda I, B] ~ 0, so v = conj(u) gives v^T A = lambda v^T,
            // v^T B = 0. Normalize the phase so the largest entry is real positive.
            Eigen::VectorXcd v = svd.matrixU().col(n - 1).conjugate();
            int imax = 0;
            for (int i = 1; i < n; ++i)
                if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
            v *= std::polar(1.0, -std::arg(v(imax)));
            result.offending.push_back({lambda, v, smin});
            if (lambda.real() >= -tol) unstable_offender = true;
        }
    }
    std::sort(result.offending.begin(), result.offending.end(),
              [](const PbhMode& a, const PbhMode& b) { return a.lambda.real() > b.lambda.real(); });
    if (result.offending.empty())
        result.verdict = PbhVerdict::controllable;
    else
        result.verdict = unstable_offender ? PbhVerdict::neither : PbhVerdict::stabilizable;
    return result;
}

GainSet synthesize_gain(const PlantModel& plant) {
    return synthesize_gain(plant, Matrix::Identity(plant.state_dim(), plant.state_dim()));
}

GainSet synthesize_gain(const PlantModel& plant, const Matrix& weight) {
    if (weight.rows() != plant.state_dim() || weight.cols() != plant.state_dim())
        throw std::invalid_argument("synthesize_gain: weight size mismatch");
    const PbhResult pbh = pbh_stabilizability_check(plant);
    if (!pbh.is_stabilizable())
        throw std::invalid_argument("synthesize_gain: plant is not stabilizable");

    const CareResult care = solve_care(plant.A, plant.B, weight, 1e-8);

    GainSet gains;
    gains.P = care.P;
    gains.K = plant.B.transpose() * care.P;
    gains.are_residual = care.residual;

    const Vector pe = eigs_ascending(0.5 * (care.P + care.P.transpose()));
    const Vector we = eigs_ascending(0.5 * (weight + weight.transpose()));
    gains.xi = we(0) / pe(pe.size() - 1);

    const Matrix pbbp = gains.P * plant.B * plant.B.transpose() * gains.P;
    const Matrix lhs = gains.P * plant.A + plant.A.transpose() * gains.P - pbbp;
    gains.design_inequality_gap = eigs_ascending(lhs + gains.xi * gains.P).maxCoeff();
    // Residual of the design equation P A^T + A P - xi P B B^T P = xi P
    // (with B B^T, the only reading that types for rectangular B).
    gains.remark_residual =
        (gains.P * plant.A.transpose() + plant.A * gains.P - gains.xi * pbbp - gains.xi * gains.P)
            .norm();

    const Matrix acl = plant.A - plant.B * gains.K;
    gains.closed_loop_abscissa = acl.eigenvalues().real().maxCoeff();
    return gains;
}

XiResult compute_xi(const Matrix& grounded_block, double tol) {
    const Eigen::Index m = grounded_block.rows();
    if (grounded_block.cols() != m) throw std::invalid_argument("compute_xi: block must be square");

    Eigen::FullPivLU<Matrix> lu(grounded_block.transpose());
    if (!lu.isInvertible())
        throw std::invalid_argument("compute_xi: grounded block is singular (not an M-matrix)");
    const Vector q = lu.solve(Vector::Ones(m));
    if ((q.array() <= 0.0).any())
        throw std::invalid_argument(
            "compute_xi: q = Lt^{-T} 1 has a non-positive entry (structural condition violated)");

    XiResult result;
    result.diag = q.cwiseInverse();
    const Matrix xi = result.diag.asDiagonal();
    result.certificate = lambda_min(xi * grounded_block + grounded_block.transpose() * xi);
    if (!(result.certificate > tol))
        throw std::invalid_argument("compute_xi: certificate lambda_min = " +
                                    std::to_string(result.certificate) + " not above tolerance");
    return result;
}

Matrix assemble_grounded_average(const AverageResult& average, const ClusterPartition& partition,
                                 const Vector& cluster_gains) {
    if (cluster_gains.size() != partition.cluster_count())
        throw std::invalid_argument("assemble: one gain per cluster required");
    Matrix out = inter_cluster_part(average.adjacency_avg, partition);
    for (int l = 0; l < partition.cluster_count(); ++l) {
        const auto& nodes = partition.cluster(l);
        const Matrix blk =
            intra_grounded_block(average.adjacency_avg, average.pinning_avg, partition, l);
        for (size_t r = 0; r < nodes.size(); ++r)
            for (size_t c = 0; c < nodes.size(); ++c)
                out(nodes[r], nodes[c]) += cluster_gains(l) * blk(r, c);
    }
    return out;
}

Vector coupling_thresholds(const AverageResult& average, const ClusterPartition& partition,
                           const std::vector<Vector>& xi_blocks) {
    const int p = partition.cluster_count();
    if (static_cast<int>(xi_blocks.size()) != p)
        throw std::invalid_argument("coupling_thresholds: one Xi block per cluster required");

    Vector xi_diag(partition.node_count());
    for (int l = 0; l < p; ++l) {
        const auto& nodes = partition.cluster(l);
        if (xi_blocks[l].size() != static_cast<Eigen::Index>(nodes.size()))
            throw std::invalid_argument("coupling_thresholds: Xi block size mismatch");
        for (size_t k = 0; k < nodes.size(); ++k) xi_diag(nodes[k]) = xi_blocks[l](k);
    }
    if ((xi_diag.array() <= 0.0).any())
        throw std::invalid_argument("coupling_thresholds: Xi must be strictly positive");

    const Matrix l0 = inter_cluster_part(average.adjacency_avg, partition);
    const Matrix xi = xi_diag.asDiagonal();
    const double numerator = lambda_min(xi * l0 + l0.transpose() * xi);

    Vector thresholds(p);
    for (int l = 0; l < p; ++l) {
        const Matrix blk =
            intra_grounded_block(average.adjacency_avg, average.pinning_avg, partition, l);
        const Matrix xib = xi_blocks[l].asDiagonal();
        const double denom = lambda_min(xib * blk + blk.transpose() * xib);
        if (!(denom > 0.0))
            throw std::invalid_argument("coupling_thresholds: cluster " + std::to_string(l) +
                                        " denominator " + std::to_string(denom) +
                                        " not positive (not pinned/connected on average)");
        thresholds(l) = std::max(0.0, -numerator / denom);
    }
    return thresholds;
}

WeylBounds weyl_bounds(const Matrix& H1, const Matrix& H2) {
    if (H1.rows() != H1.cols() || H2.rows() != H2.cols() || H1.rows() != H2.rows())
        throw std::invalid_argument("weyl_bounds: need same-size square matrices");
    const double scale = std::max({1.0, H1.norm(), H2.norm()});
    if (symmetry_defect(H1) > 1e-12 * scale || symmetry_defect(H2) > 1e-12 * scale)
        throw std::invalid_argument("weyl_bounds: inputs must be symmetric");

    const Vector e1 = eigs_ascending(0.5 * (H1 + H1.transpose()));
    const Vector e2 = eigs_ascending(0.5 * (H2 + H2.transpose()));
    WeylBounds bounds;
    bounds.lower = e1.array() + e2(0);
    bounds.upper = e1.array() + e2(e2.size() - 1);
    return bounds;
}

}  // namespace clustersync
