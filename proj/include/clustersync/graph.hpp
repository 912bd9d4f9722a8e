#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "clustersync/partition.hpp"

namespace clustersync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weighted digraph on N nodes. adjacency(i, j) is the weight of the edge
/// (j, i), i.e. information flows from j to i. The diagonal is zero.
/// Intra-cluster weights must be nonnegative; inter-cluster weights may carry
/// either sign (negative couplings act against synchronization). Pass
/// allow_negative_intra = true to relax the sign check for adversarial
/// experiments.
class WeightedDigraph {
public:
    explicit WeightedDigraph(Matrix adjacency);
    WeightedDigraph(Matrix adjacency, const ClusterPartition& partition,
                    bool allow_negative_intra = false);

    int node_count() const { return static_cast<int>(adjacency_.rows()); }
    const Matrix& adjacency() const { return adjacency_; }
    double weight(int to, int from) const { return adjacency_(to, from); }

private:
    Matrix adjacency_;
};

/// Piecewise-constant trust weights gamma_ij(t) in [0, 1], one function per
/// edge, on the switching (fast) clock. An edge without an entry has trust 1.
/// Each breakpoint (t, v) sets the value from t onward (right-continuous);
/// before the first breakpoint the value is 1.
class TrustSchedule {
public:
    TrustSchedule() = default;

    void set_edge(int to, int from, std::vector<std::pair<double, double>> breakpoints);
    double value(int to, int from, double t) const;
    /// Value after the last breakpoint; the long-run trust used for averages.
    double final_value(int to, int from) const;
    bool empty() const { return edges_.empty(); }

    /// Adjacency scaled entrywise by gamma(t). Exact identity when the
    /// schedule is empty or gamma = 1.
    Matrix scale(const Matrix& adjacency, double t) const;
    Matrix scale_final(const Matrix& adjacency) const;

    /// All breakpoint instants, sorted and deduplicated.
    std::vector<double> breakpoints() const;
    const std::map<std::pair<int, int>, std::vector<std::pair<double, double>>>& edges() const {
        return edges_;
    }

private:
    std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> edges_;
};

/// One phase of the switching signal: which graph is active, the pinning
/// gains d_i >= 0, and the dwell in fast time units. The slow-time dwell is
/// epsilon * dwell.
struct Phase {
    int graph_id = 0;
    Vector pinning;
    double dwell = 0.0;
};

/// Periodic (or one-shot) switching signal on the fast clock t/epsilon.
/// Acyclic signals hold their last phase beyond the end of the schedule.
class SwitchingSignal {
public:
    SwitchingSignal(std::vector<Phase> phases, bool cyclic, double epsilon);

    int phase_count() const { return static_cast<int>(phases_.size()); }
    const Phase& phase(int k) const { return phases_.at(k); }
    const std::vector<Phase>& phases() const { return phases_; }
    bool cyclic() const { return cyclic_; }
    double epsilon() const { return epsilon_; }
    /// Sum of dwells (fast time).
    double period() const { return period_; }
    double min_dwell() const;

    /// Phase index active at fast time tau (right-continuous at switches).
    int phase_at(double tau) const;
    /// Switch instants in slow time strictly inside (t0, t1).
    std::vector<double> switch_times_between(double t0, double t1) const;

private:
    std::vector<Phase> phases_;
    std::vector<double> cumulative_;  // fast-time phase end offsets
    bool cyclic_;
    double epsilon_;
    double period_;
};

/// Laplacian of a trust-scaled, cluster-gain-scaled graph together with the
/// pinning diagonal D = diag{c_i_bar * d_i}. Row sums of matrix() are zero.
class BlockLaplacian {
public:
    BlockLaplacian(Matrix laplacian, Vector pinning_diag, ClusterPartition partition);

    const Matrix& matrix() const { return laplacian_; }
    const Vector& pinning() const { return pinning_; }
    const ClusterPartition& partition() const { return partition_; }
    /// L + D.
    Matrix grounded() const;
    /// Submatrix L_{lk} of matrix() (rows cluster l, columns cluster k).
    Matrix block(int l, int k) const;

private:
    Matrix laplacian_;
    Vector pinning_;
    ClusterPartition partition_;
};

/// Average graph data: dwell-weighted mean adjacency/pinning, the averaged
/// Laplacian L_inf, and the witness trace for the averaging bound
/// beta(t) = ||(1/t) int L - L_inf||_2 with kappa = max beta.
struct AverageResult {
    Matrix adjacency_avg;
    Vector pinning_avg;
    Matrix L_inf;
    double kappa = 0.0;
    std::vector<std::pair<double, double>> beta_trace;  // (t, beta)
};

struct BalanceViolation {
    int node;
    int cluster;
    double magnitude;
};

struct BalanceReport {
    bool pass = true;
    std::vector<BalanceViolation> violations;
};

struct SpanningTreeReport {
    std::vector<bool> cluster_ok;
    std::vector<std::vector<int>> unreachable;  // per cluster
    bool all_ok() const;
};

/// Laplacian L = D - A of the trust-scaled graph at fast time t, with
/// intra-cluster weights scaled by the per-cluster gains and the pinning
/// diagonal assembled as c_i_bar * d_i.
BlockLaplacian laplacian_of(const WeightedDigraph& graph, const TrustSchedule& trust, double t,
                            const ClusterPartition& partition, const Vector& pinning,
                            const Vector& cluster_gains);

/// Assumption-2 check: for every node i and every foreign cluster l,
/// |sum_{j in V_l} a_ij| <= tol. Total function, never throws.
BalanceReport in_degree_balance_check(const BlockLaplacian& laplacian, double tol);

/// Integral of the switched, trust-scaled adjacency over slow time [t0, t1],
/// computed exactly from the piecewise-constant schedule.
WeightedDigraph union_graph(const SwitchingSignal& signal,
                            const std::vector<WeightedDigraph>& graphs, double t0, double t1,
                            const TrustSchedule& trust = {});

/// Averaged pinning vector over slow time [t0, t1] (same piecewise rule).
Vector union_pinning(const SwitchingSignal& signal, double t0, double t1);

/// Average Laplacian. Cyclic signals get the exact dwell-weighted period mean
/// (with long-run trust); acyclic signals the finite-horizon mean. beta_trace
/// is sampled at `samples` instants up to `horizon` (slow time).
AverageResult average_laplacian(const SwitchingSignal& signal,
                                const std::vector<WeightedDigraph>& graphs, double horizon,
                                int samples, const ClusterPartition& partition,
                                const TrustSchedule& trust = {});

/// Assumption-3 check on averaged data: per cluster, every node must be
/// reachable from the virtual leader through edges with |weight| > tol
/// (pinned nodes with averaged d_i > tol get a leader edge).
SpanningTreeReport spanning_tree_check(const Matrix& L_inf, const ClusterPartition& partition,
                                       const Vector& pinning, double tol);

/// Laplacian of the intra-cluster subgraph of cluster l (diagonal counts
/// intra-cluster in-degrees only), plus the pinning diagonal.
Matrix intra_grounded_block(const Matrix& adjacency, const Vector& pinning,
                            const ClusterPartition& partition, int l);

/// L minus the block-diagonal of intra-cluster Laplacians: the inter-cluster
/// part L_0. Under in-degree balance its diagonal blocks vanish.
Matrix inter_cluster_part(const Matrix& adjacency, const ClusterPartition& partition);

/// Default tolerances (see module notes): exact-arithmetic checks vs
/// edge-existence decisions.
inline constexpr double kBalanceTol = 1e-9;
inline constexpr double kEdgeTol = 1e-6;

}  // namespace clustersync
