#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clustersync/gains.hpp"
#include "clustersync/scenario.hpp"
#include "clustersync/sim.hpp"

namespace clustersync {

enum class AuditVerdict { certified, uncertified, necessarily_fails };

/// Aggregated condition audit: stabilizability (Assumption 1), in-degree
/// balance (Assumption 2), averaged spanning trees (Assumption 3), and the
/// per-cluster coupling thresholds against the configured gains.
/// necessarily_fails is set only on a necessity violation: an uncontrollable
/// pair or an average graph without a spanning tree.
struct ConditionReport {
    PbhResult pbh;
    bool assumption1_ok = false;

    BalanceReport balance;
    bool assumption2_ok = false;

    AverageResult average;
    SpanningTreeReport tree;
    bool assumption3_ok = false;

    std::vector<double> xi_certificates;      // per cluster, when computable
    Vector thresholds;                        // c*_l, when computable
    Vector configured_gains;
    bool coupling_ok = false;

    double assembled_lambda_min = 0.0;  // lambda_min(Xi Lt + Lt^T Xi) at configured gains
    double alternate_coupling_bound = 0.0;        // 1 / (2 lambda_min(sym grounded average)), NaN if n/a

    std::optional<double> epsilon_empirical;  // largest eps with positive decay (bisection)
    bool epsilon_ok = true;

    AuditVerdict verdict = AuditVerdict::uncertified;
    std::vector<std::string> reasons;

    std::string to_text() const;
    std::string to_json() const;  // machine-readable key/value form
};

struct AuditOptions {
    double balance_tol = kBalanceTol;
    double edge_tol = kEdgeTol;
    int average_samples = 32;
    bool epsilon_search = false;  // run the empirical bisection (simulates)
};

ConditionReport audit_scenario(const ClusterScenario& scenario, const GainSet& gains,
                               const AuditOptions& options = {});

struct ContractionResult {
    double lambda_max = 0.0;
    bool pass = false;
};

/// lambda_max of sym(Theta V J V^T Theta^{-1}); pass iff <= -tol. Rows of V
/// must be orthonormal and Theta invertible (projected check with a constant
/// metric factor).
ContractionResult contraction_check(const Matrix& jacobian, const Matrix& V, const Matrix& Theta,
                                    double tol);

struct KernelWitness {
    Matrix kernel_basis;  // N x k, orthonormal columns spanning ker(Lt_avg)
    Matrix initial_error; // N x n initial error inside the kernel
    Vector mode;          // plant direction w used for the witness
    double retention = 0.0;  // ||proj e(T)|| / ||proj e(0)|| from simulation
};

/// Witness for the necessity direction: requires the averaged
/// spanning-tree check to FAIL. Returns a kernel basis of the averaged
/// grounded Laplacian, an initial error in that kernel, and the simulated
/// retention of the kernel component (>= 0.5 certifies the obstruction).
KernelWitness necessity_witness_no_average_tree(const ClusterScenario& scenario,
                                                const GainSet& gains);

/// Largest epsilon in [lo, hi] whose simulated run has positive fitted decay
/// rate, found by bisection over independent runs.
double epsilon_guidance(const ClusterScenario& scenario, const GainSet& gains, double lo,
                        double hi, int iterations = 8, double horizon = 6.0);

}  // namespace clustersync
