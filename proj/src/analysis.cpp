#include "clustersync/analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace clustersync {

namespace {

double lambda_min_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    return es.eigenvalues()(0);
}

double lambda_max_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    return es.eigenvalues().maxCoeff();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

ConditionReport audit_scenario(const ClusterScenario& scenario, const GainSet& gains,
                               const AuditOptions& options) {
    ConditionReport report;
    report.configured_gains = scenario.coupling.cluster_gains;

    // Assumption 1, plus the necessity side: controllability.
    report.pbh = pbh_stabilizability_check(scenario.plant);
    report.assumption1_ok = report.pbh.is_stabilizable();
    bool necessity_violated = false;
    if (!report.pbh.is_controllable()) {
        necessity_violated = true;
        std::ostringstream os;
        os << "uncontrollable mode lambda=" << report.pbh.worst()->lambda.real();
        if (std::abs(report.pbh.worst()->lambda.imag()) > 1e-12)
            os << (report.pbh.worst()->lambda.imag() > 0 ? "+" : "")
               << report.pbh.worst()->lambda.imag() << "i";
        report.reasons.push_back(os.str());
    }
    if (!report.assumption1_ok) report.reasons.push_back("plant is not stabilizable");

    // Assumption 2: balance must hold at every instant. Graphs and trust are
    // piecewise constant, so checking every phase at every trust segment is a
    // finite certificate.
    report.assumption2_ok = true;
    const Vector ones = Vector::Ones(scenario.cluster_count());
    std::vector<double> trust_times = scenario.trust.breakpoints();
    trust_times.insert(trust_times.begin(),
                       trust_times.empty() ? 0.0 : trust_times.front() - 1.0);
    for (int k = 0; k < scenario.signal.phase_count(); ++k) {
        const Phase& ph = scenario.signal.phase(k);
        for (double tau : trust_times) {
            BlockLaplacian lap = laplacian_of(scenario.graphs.at(ph.graph_id), scenario.trust,
                                              tau, scenario.partition, ph.pinning, ones);
            BalanceReport br = in_degree_balance_check(lap, options.balance_tol);
            if (!br.pass) {
                report.assumption2_ok = false;
                report.balance = br;
            }
        }
    }
    if (!report.assumption2_ok) report.reasons.push_back("in-degree balance violated");

    // Assumption 3 on the averaged data (also a necessity condition).
    report.average = scenario.average(options.average_samples);
    report.tree = spanning_tree_check(report.average.L_inf, scenario.partition,
                                      report.average.pinning_avg, options.edge_tol);
    report.assumption3_ok = report.tree.all_ok();
    if (!report.assumption3_ok) {
        necessity_violated = true;
        report.reasons.push_back("average graph has no spanning tree (necessity violation)");
    }

    // Coupling thresholds (only meaningful when the structural checks hold).
    report.coupling_ok = false;
    if (report.assumption3_ok) {
        try {
            std::vector<Vector> xi_blocks;
            for (int l = 0; l < scenario.cluster_count(); ++l) {
                XiResult xi = compute_xi(intra_grounded_block(
                    report.average.adjacency_avg, report.average.pinning_avg, scenario.partition,
                    l));
                report.xi_certificates.push_back(xi.certificate);
                xi_blocks.push_back(xi.diag);
            }
            report.thresholds =
                coupling_thresholds(report.average, scenario.partition, xi_blocks);
            report.coupling_ok = true;
            for (int l = 0; l < scenario.cluster_count(); ++l) {
                if (!(scenario.coupling.cluster_gains(l) > report.thresholds(l))) {
                    report.coupling_ok = false;
                    std::ostringstream os;
                    os << "cluster " << (l + 1) << " coupling " <<
                        scenario.coupling.cluster_gains(l) << " below threshold "
                       << report.thresholds(l);
                    report.reasons.push_back(os.str());
                }
            }
            Vector xi_diag(scenario.node_count());
            for (int l = 0; l < scenario.cluster_count(); ++l) {
                const auto& nodes = scenario.partition.cluster(l);
                for (size_t k = 0; k < nodes.size(); ++k) xi_diag(nodes[k]) = xi_blocks[l](k);
            }
            const Matrix lt = assemble_grounded_average(report.average, scenario.partition,
                                                        scenario.coupling.cluster_gains);
            const Matrix xi = xi_diag.asDiagonal();
            report.assembled_lambda_min = lambda_min_sym(xi * lt + lt.transpose() * xi);
        } catch (const std::invalid_argument& e) {
            report.reasons.push_back(std::string("threshold computation failed: ") + e.what());
        }
        // Alternate coupling bound from the symmetrized grounded average,
        // reported separately from the Xi-weighted threshold ratio.
        const Matrix grounded = assemble_grounded_average(
            report.average, scenario.partition, Vector::Ones(scenario.cluster_count()));
        const double lmin = lambda_min_sym(grounded);
        report.alternate_coupling_bound =
            lmin > 0.0 ? 1.0 / (2.0 * lmin) : std::numeric_limits<double>::quiet_NaN();
    } else {
        report.alternate_coupling_bound = std::numeric_limits<double>::quiet_NaN();
    }

    if (options.epsilon_search && report.assumption1_ok) {
        report.epsilon_empirical =
            epsilon_guidance(scenario, gains, scenario.signal.epsilon(), 1.0);
        report.epsilon_ok = scenario.signal.epsilon() <= *report.epsilon_empirical;
    }

    if (necessity_violated)
        report.verdict = AuditVerdict::necessarily_fails;
    else if (report.assumption1_ok && report.assumption2_ok && report.assumption3_ok &&
             report.coupling_ok)
        report.verdict = AuditVerdict::certified;
    else
        report.verdict = AuditVerdict::uncertified;
    return report;
}

std::string ConditionReport::to_text() const {
    std::ostringstream os;
    auto mark = [](bool ok) { return ok ? "pass" : "FAIL"; };
    os << "condition audit\n";
    os << "  assumption 1 (stabilizable plant): " << mark(assumption1_ok);
    if (pbh.is_controllable())
        os << " (controllable)";
    else if (pbh.worst())
        os << " (offending eigenvalue " << pbh.worst()->lambda.real() << ")";
    os << "\n";
    os << "  assumption 2 (in-degree balance): " << mark(assumption2_ok);
    if (!balance.violations.empty()) {
        os << " [";
        for (size_t k = 0; k < balance.violations.size(); ++k) {
            const auto& v = balance.violations[k];
            os << (k ? ", " : "") << "node " << (v.node + 1) << " vs cluster "
               << (v.cluster + 1);
        }
        os << "]";
    }
    os << "\n";
    os << "  assumption 3 (average spanning trees): " << mark(assumption3_ok);
    if (!tree.cluster_ok.empty()) {
        os << " [";
        for (size_t l = 0; l < tree.cluster_ok.size(); ++l)
            os << (l ? ", " : "") << "cluster " << (l + 1) << ": "
               << (tree.cluster_ok[l] ? "tree" : "no tree");
        os << "]";
    }
    os << "\n";
    os << "  averaging bound kappa: " << average.kappa << "\n";
    if (thresholds.size() > 0) {
        os << "  coupling thresholds c*: [";
        for (Eigen::Index l = 0; l < thresholds.size(); ++l)
            os << (l ? ", " : "") << thresholds(l);
        os << "], configured c: [";
        for (Eigen::Index l = 0; l < configured_gains.size(); ++l)
            os << (l ? ", " : "") << configured_gains(l);
        os << "] -> " << mark(coupling_ok) << "\n";
        os << "  lambda_min(Xi Lt + Lt^T Xi) at configured c: " << assembled_lambda_min << "\n";
    }
    if (!std::isnan(alternate_coupling_bound))
        os << "  alternate coupling bound 1/(2 lambda_min): " << alternate_coupling_bound << "\n";
    if (epsilon_empirical)
        os << "  empirical epsilon bound: " << *epsilon_empirical
           << (epsilon_ok ? " (configured epsilon acceptable)" : " (configured epsilon too large)")
           << "\n";
    os << "  verdict: ";
    switch (verdict) {
        case AuditVerdict::certified: os << "certified"; break;
        case AuditVerdict::uncertified: os << "uncertified"; break;
        case AuditVerdict::necessarily_fails: os << "necessarily-fails"; break;
    }
    os << "\n";
    for (const auto& r : reasons) os << "  reason: " << r << "\n";
    return os.str();
}

std::string ConditionReport::to_json() const {
    nlohmann::ordered_json j;
    j["assumption1_ok"] = assumption1_ok;
    j["controllable"] = pbh.is_controllable();
    j["stabilizable"] = pbh.is_stabilizable();
    if (pbh.worst()) {
        j["offending_eigenvalue_re"] = pbh.worst()->lambda.real();
        j["offending_eigenvalue_im"] = pbh.worst()->lambda.imag();
    }
    j["assumption2_ok"] = assumption2_ok;
    j["assumption3_ok"] = assumption3_ok;
    j["kappa"] = average.kappa;
    if (thresholds.size() > 0) {
        j["thresholds"] = std::vector<double>(thresholds.data(),
                                              thresholds.data() + thresholds.size());
        j["assembled_lambda_min"] = assembled_lambda_min;
    }
    j["configured_gains"] = std::vector<double>(
        configured_gains.data(), configured_gains.data() + configured_gains.size());
    j["coupling_ok"] = coupling_ok;
    if (!std::isnan(alternate_coupling_bound)) j["alternate_coupling_bound"] = alternate_coupling_bound;
    if (epsilon_empirical) {
        j["epsilon_empirical"] = *epsilon_empirical;
        j["epsilon_ok"] = epsilon_ok;
    }
    switch (verdict) {
        case AuditVerdict::certified: j["verdict"] = "certified"; break;
        case AuditVerdict::uncertified: j["verdict"] = "uncertified"; break;
        case AuditVerdict::necessarily_fails: j["verdict"] = "necessarily-fails"; break;
    }
    j["reasons"] = reasons;
    return j.dump(2) + "\n";
}

ContractionResult contraction_check(const Matrix& jacobian, const Matrix& V, const Matrix& Theta,
                                    double tol) {
    if (V.cols() != jacobian.rows())
        throw std::invalid_argument("contraction: V column count must match the Jacobian");
    const Matrix vvt = V * V.transpose();
    if ((vvt - Matrix::Identity(V.rows(), V.rows())).norm() > 1e-10 * std::max(1.0, vvt.norm()))
        throw std::invalid_argument("contraction: rows of V must be orthonormal");
    Eigen::FullPivLU<Matrix> lu(Theta);
    if (!lu.isInvertible()) throw std::invalid_argument("contraction: Theta is singular");

    const Matrix projected = Theta * V * jacobian * V.transpose() * lu.inverse();
    ContractionResult result;
    result.lambda_max = lambda_max_sym(projected);
    result.pass = result.lambda_max <= -tol;
    return result;
}

KernelWitness necessity_witness_no_average_tree(const ClusterScenario& scenario,
                                                const GainSet& gains) {
    const AverageResult avg = scenario.average();
    const SpanningTreeReport tree = spanning_tree_check(avg.L_inf, scenario.partition,
                                                        avg.pinning_avg, kEdgeTol);
    if (tree.all_ok())
        throw std::invalid_argument(
            "necessity_witness: averaged spanning-tree check passes; no obstruction exists");

    const Matrix grounded = assemble_grounded_average(avg, scenario.partition,
                                                      scenario.coupling.cluster_gains);
    Eigen::JacobiSVD<Matrix> svd(grounded, Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    int kernel_dim = 0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()(k) < 1e-8 * smax) ++kernel_dim;
    if (kernel_dim == 0)
        throw std::invalid_argument("necessity_witness: averaged grounded Laplacian has no kernel");

    KernelWitness witness;
    witness.kernel_basis = svd.matrixV().rightCols(kernel_dim);

    // Plant direction: prefer a neutral real eigenvector (smallest |Re| among
    // the non-decaying modes) so the obstruction neither decays nor blows up.
    Eigen::EigenSolver<Matrix> es(scenario.plant.A);
    int pick = -1;
    for (int k = 0; k < scenario.plant.state_dim(); ++k) {
        const auto lam = es.eigenvalues()(k);
        if (lam.real() < -1e-9) continue;
        if (pick < 0 || lam.real() < es.eigenvalues()(pick).real()) pick = k;
    }
    if (pick < 0)
        throw std::invalid_argument(
            "necessity_witness: plant is strictly stable; errors vanish regardless of topology");
    Vector w = es.eigenvectors().col(pick).real();
    if (w.norm() < 1e-12) w = es.eigenvectors().col(pick).imag();
    w.normalize();
    witness.mode = w;

    const Vector zeta = witness.kernel_basis.col(0);
    witness.initial_error = zeta * w.transpose();  // N x n

    SimConfig config = scenario.sim;
    Matrix agents0(scenario.node_count(), scenario.plant.state_dim());
    for (int i = 0; i < scenario.node_count(); ++i)
        agents0.row(i) = scenario.leaders[scenario.partition.cluster_of(i)].transpose() +
                         witness.initial_error.row(i);
    const Trajectory traj = simulate_from(scenario, gains, config, agents0);

    auto kernel_component = [&](const Matrix& e) {
        return (witness.kernel_basis.transpose() * e).norm();
    };
    const double initial = kernel_component(traj.errors_at(0, scenario.partition));
    const double final_ =
        kernel_component(traj.errors_at(traj.sample_count() - 1, scenario.partition));
    witness.retention = initial > 0.0 ? final_ / initial : 0.0;
    return witness;
}

double epsilon_guidance(const ClusterScenario& scenario, const GainSet& gains, double lo,
                        double hi, int iterations, double horizon) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("epsilon_guidance: need 0 < lo < hi");

    auto decays = [&](double eps) {
        ClusterScenario s = scenario;
        std::vector<Phase> phases = scenario.signal.phases();
        s.signal = SwitchingSignal(std::move(phases), scenario.signal.cyclic(), eps);
        s.sim.epsilon = eps;
        s.sim.horizon = std::min(scenario.sim.horizon, horizon);
        try {
            const Trajectory traj = simulate(s, gains, s.sim);
            if (traj.diverged) return false;
            const Vector total = traj.error_series.rowwise().sum();
            const DecayFit fit = estimate_decay_rate(traj.times, total, 0.2 * s.sim.horizon,
                                                     s.sim.horizon);
            return fit.rate > 0.0;
        } catch (const std::exception&) {
            return false;
        }
    };

    if (!decays(lo)) return lo;  // not even the configured epsilon converges
    if (decays(hi)) return hi;
    double good = lo, bad = hi;
    for (int k = 0; k < iterations; ++k) {
        const double mid = 0.5 * (good + bad);
        (decays(mid) ? good : bad) = mid;
    }
    return good;
}

}  // namespace clustersync
