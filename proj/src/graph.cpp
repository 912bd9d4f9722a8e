#include "clustersync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace clustersync {

namespace {

void check_adjacency(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("graph: adjacency must be square");
    if (!a.allFinite()) throw std::invalid_argument("graph: adjacency has non-finite weight");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a(i, i) != 0.0)
            throw std::invalid_argument("graph: diagonal weight a_" + std::to_string(i) + "," +
                                        std::to_string(i) + " must be zero");
    }
}

Matrix laplacian_from_weights(const Matrix& w) {
    Matrix l = -w;
    l.diagonal().setZero();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        double deg = 0.0;
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            if (j != i) deg += w(i, j);
        l(i, i) = deg;
    }
    return l;
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// Walks the piecewise-constant structure of (signal, trust) over slow time
// [t0, t1] and calls fn(phase_index, a, b) for each maximal constant piece.
template <class Fn>
void for_each_constant_piece(const SwitchingSignal& signal, const TrustSchedule& trust, double t0,
                             double t1, Fn&& fn) {
    std::vector<double> cuts = signal.switch_times_between(t0, t1);
    const double eps = signal.epsilon();
    for (double tau : trust.breakpoints()) {
        const double t = tau * eps;
        if (t > t0 && t < t1) cuts.push_back(t);
    }
    cuts.push_back(t1);
    std::sort(cuts.begin(), cuts.end());
    const double min_len = 1e-12 * std::max(1.0, std::abs(t1 - t0));
    double a = t0;
    for (double b : cuts) {
        if (b - a < min_len) continue;
        fn(signal.phase_at(0.5 * (a + b) / eps), a, b);
        a = b;
    }
}

}  // namespace

WeightedDigraph::WeightedDigraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
    check_adjacency(adjacency_);
}

WeightedDigraph::WeightedDigraph(Matrix adjacency, const ClusterPartition& partition,
                                 bool allow_negative_intra)
    : adjacency_(std::move(adjacency)) {
    check_adjacency(adjacency_);
    if (adjacency_.rows() != partition.node_count())
        throw std::invalid_argument("graph: adjacency size does not match partition");
    if (!allow_negative_intra) {
        for (int i = 0; i < partition.node_count(); ++i)
            for (int j = 0; j < partition.node_count(); ++j)
                if (i != j && partition.same_cluster(i, j) && adjacency_(i, j) < 0.0)
                    throw std::invalid_argument("graph: negative intra-cluster weight a_" +
                                                std::to_string(i) + "," + std::to_string(j));
    }
}

void TrustSchedule::set_edge(int to, int from,
                             std::vector<std::pair<double, double>> breakpoints) {
    if (breakpoints.empty()) throw std::invalid_argument("trust: empty breakpoint list");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end(),
                        [](auto& a, auto& b) { return a.first < b.first; }))
        throw std::invalid_argument("trust: breakpoints must be sorted by time");
    for (auto& [t, v] : breakpoints) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("trust: value " + std::to_string(v) +
                                        " outside [0, 1]");
        if (!std::isfinite(t)) throw std::invalid_argument("trust: non-finite breakpoint time");
    }
    edges_[{to, from}] = std::move(breakpoints);
}

double TrustSchedule::value(int to, int from, double t) const {
    auto it = edges_.find({to, from});
    if (it == edges_.end()) return 1.0;
    const auto& bp = it->second;
    double v = 1.0;
    for (const auto& [bt, bv] : bp) {
        if (t >= bt)
            v = bv;
        else
            break;
    }
    return v;
}

double TrustSchedule::final_value(int to, int from) const {
    auto it = edges_.find({to, from});
    if (it == edges_.end()) return 1.0;
    return it->second.back().second;
}

Matrix TrustSchedule::scale(const Matrix& adjacency, double t) const {
    if (edges_.empty()) return adjacency;
    Matrix out = adjacency;
    for (const auto& [edge, bp] : edges_) {
        (void)bp;
        out(edge.first, edge.second) = adjacency(edge.first, edge.second) *
                                       value(edge.first, edge.second, t);
    }
    return out;
}

Matrix TrustSchedule::scale_final(const Matrix& adjacency) const {
    if (edges_.empty()) return adjacency;
    Matrix out = adjacency;
    for (const auto& [edge, bp] : edges_)
        out(edge.first, edge.second) =
            adjacency(edge.first, edge.second) * bp.back().second;
    return out;
}

std::vector<double> TrustSchedule::breakpoints() const {
    std::vector<double> out;
    for (const auto& [edge, bp] : edges_) {
        (void)edge;
        for (const auto& [t, v] : bp) {
            (void)v;
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SwitchingSignal::SwitchingSignal(std::vector<Phase> phases, bool cyclic, double epsilon)
    : phases_(std::move(phases)), cyclic_(cyclic), epsilon_(epsilon) {
    if (phases_.empty()) throw std::invalid_argument("signal: need at least one phase");
    if (!(epsilon_ > 0.0)) throw std::invalid_argument("signal: epsilon must be positive");
    double acc = 0.0;
    for (const auto& p : phases_) {
        if (!(p.dwell > 0.0))
            throw std::invalid_argument("signal: dwell times must be strictly positive");
        if ((p.pinning.array() < 0.0).any())
            throw std::invalid_argument("signal: pinning gains must be nonnegative");
        acc += p.dwell;
        cumulative_.push_back(acc);
    }
    period_ = acc;
}

double SwitchingSignal::min_dwell() const {
    double m = phases_[0].dwell;
    for (const auto& p : phases_) m = std::min(m, p.dwell);
    return m;
}

int SwitchingSignal::phase_at(double tau) const {
    if (tau < 0.0) tau = 0.0;
    if (cyclic_) {
        tau = std::fmod(tau, period_);
    } else if (tau >= period_) {
        return phase_count() - 1;
    }
    for (int k = 0; k < phase_count(); ++k) {
        if (tau < cumulative_[k]) return k;
    }
    return phase_count() - 1;
}

std::vector<double> SwitchingSignal::switch_times_between(double t0, double t1) const {
    std::vector<double> out;
    if (!(t1 > t0)) return out;
    const double slow_period = epsilon_ * period_;
    if (cyclic_) {
        const double m0 = std::floor(t0 / slow_period) - 1.0;
        const double m1 = std::ceil(t1 / slow_period) + 1.0;
        for (double m = m0; m <= m1; m += 1.0) {
            for (double cum : cumulative_) {
                const double t = (m * period_ + cum) * epsilon_;
                if (t > t0 && t < t1) out.push_back(t);
            }
        }
    } else {
        for (size_t k = 0; k + 1 < cumulative_.size(); ++k) {
            const double t = cumulative_[k] * epsilon_;
            if (t > t0 && t < t1) out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

BlockLaplacian::BlockLaplacian(Matrix laplacian, Vector pinning_diag, ClusterPartition partition)
    : laplacian_(std::move(laplacian)),
      pinning_(std::move(pinning_diag)),
      partition_(std::move(partition)) {
    if (laplacian_.rows() != partition_.node_count() ||
        laplacian_.cols() != partition_.node_count())
        throw std::invalid_argument("laplacian: size does not match partition");
    if (pinning_.size() != partition_.node_count())
        throw std::invalid_argument("laplacian: pinning size does not match partition");
    if ((pinning_.array() < 0.0).any())
        throw std::invalid_argument("laplacian: pinning diagonal must be nonnegative");
}

Matrix BlockLaplacian::grounded() const {
    Matrix g = laplacian_;
    g.diagonal() += pinning_;
    return g;
}

Matrix BlockLaplacian::block(int l, int k) const {
    const auto& rows = partition_.cluster(l);
    const auto& cols = partition_.cluster(k);
    Matrix b(rows.size(), cols.size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < cols.size(); ++c) b(r, c) = laplacian_(rows[r], cols[c]);
    return b;
}

bool SpanningTreeReport::all_ok() const {
    for (bool ok : cluster_ok)
        if (!ok) return false;
    return true;
}

BlockLaplacian laplacian_of(const WeightedDigraph& graph, const TrustSchedule& trust, double t,
                            const ClusterPartition& partition, const Vector& pinning,
                            const Vector& cluster_gains) {
    const int n = graph.node_count();
    if (n != partition.node_count())
        throw std::invalid_argument("laplacian_of: graph/partition size mismatch");
    if (pinning.size() != n) throw std::invalid_argument("laplacian_of: pinning size mismatch");
    if (cluster_gains.size() != partition.cluster_count())
        throw std::invalid_argument("laplacian_of: one gain per cluster required");
    if ((cluster_gains.array() <= 0.0).any())
        throw std::invalid_argument("laplacian_of: cluster gains must be positive");

    Matrix w = trust.scale(graph.adjacency(), t);
    if (!w.allFinite()) throw std::invalid_argument("laplacian_of: NaN weight");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && partition.same_cluster(i, j))
                w(i, j) *= cluster_gains(partition.cluster_of(i));

    Vector d(n);
    for (int i = 0; i < n; ++i) d(i) = cluster_gains(partition.cluster_of(i)) * pinning(i);
    return BlockLaplacian(laplacian_from_weights(w), d, partition);
}

BalanceReport in_degree_balance_check(const BlockLaplacian& laplacian, double tol) {
    BalanceReport report;
    const Matrix& l = laplacian.matrix();
    const ClusterPartition& part = laplacian.partition();
    for (int i = 0; i < part.node_count(); ++i) {
        for (int cl = 0; cl < part.cluster_count(); ++cl) {
            if (cl == part.cluster_of(i)) continue;
            double sum = 0.0;
            for (int j : part.cluster(cl)) sum += -l(i, j);  // a_ij = -l_ij off-diagonal
            if (std::abs(sum) > tol) {
                report.pass = false;
                report.violations.push_back({i, cl, std::abs(sum)});
            }
        }
    }
    return report;
}

WeightedDigraph union_graph(const SwitchingSignal& signal,
                            const std::vector<WeightedDigraph>& graphs, double t0, double t1,
                            const TrustSchedule& trust) {
    if (!(t1 > t0)) throw std::invalid_argument("union_graph: t1 must exceed t0");
    if (graphs.empty()) throw std::invalid_argument("union_graph: no graphs");
    const int n = graphs[0].node_count();
    Matrix acc = Matrix::Zero(n, n);
    for_each_constant_piece(signal, trust, t0, t1, [&](int ph, double a, double b) {
        const WeightedDigraph& g = graphs.at(signal.phase(ph).graph_id);
        acc += trust.scale(g.adjacency(), 0.5 * (a + b) / signal.epsilon()) * (b - a);
    });
    return WeightedDigraph(acc);
}

Vector union_pinning(const SwitchingSignal& signal, double t0, double t1) {
    if (!(t1 > t0)) throw std::invalid_argument("union_pinning: t1 must exceed t0");
    Vector acc = Vector::Zero(signal.phase(0).pinning.size());
    TrustSchedule none;
    for_each_constant_piece(signal, none, t0, t1, [&](int ph, double a, double b) {
        acc += signal.phase(ph).pinning * (b - a);
    });
    return acc;
}

AverageResult average_laplacian(const SwitchingSignal& signal,
                                const std::vector<WeightedDigraph>& graphs, double horizon,
                                int samples, const ClusterPartition& partition,
                                const TrustSchedule& trust) {
    if (!(horizon > 0.0)) throw std::invalid_argument("average_laplacian: horizon must be > 0");
    if (samples < 2) throw std::invalid_argument("average_laplacian: need at least 2 samples");
    if (graphs.empty()) throw std::invalid_argument("average_laplacian: empty signal");

    const int n = graphs[0].node_count();
    AverageResult out;
    if (signal.cyclic()) {
        // Exact dwell-weighted period mean with the long-run trust values.
        Matrix acc = Matrix::Zero(n, n);
        Vector dacc = Vector::Zero(n);
        for (const Phase& p : signal.phases()) {
            acc += trust.scale_final(graphs.at(p.graph_id).adjacency()) * p.dwell;
            dacc += p.pinning * p.dwell;
        }
        out.adjacency_avg = acc / signal.period();
        out.pinning_avg = dacc / signal.period();
    } else {
        out.adjacency_avg = union_graph(signal, graphs, 0.0, horizon, trust).adjacency() / horizon;
        out.pinning_avg = union_pinning(signal, 0.0, horizon) / horizon;
    }
    out.L_inf = [&] {
        Matrix l = -out.adjacency_avg;
        l.diagonal().setZero();
        for (int i = 0; i < n; ++i) {
            double deg = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) deg += out.adjacency_avg(i, j);
            l(i, i) = deg;
        }
        return l;
    }();

    for (int k = 1; k <= samples; ++k) {
        const double t = horizon * k / samples;
        Matrix mean = union_graph(signal, graphs, 0.0, t, trust).adjacency() / t;
        Matrix l = -mean;
        l.diagonal().setZero();
        for (int i = 0; i < n; ++i) {
            double deg = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) deg += mean(i, j);
            l(i, i) = deg;
        }
        out.beta_trace.emplace_back(t, spectral_norm(l - out.L_inf));
    }
    out.kappa = 0.0;
    for (const auto& [t, beta] : out.beta_trace) {
        (void)t;
        out.kappa = std::max(out.kappa, beta);
    }
    (void)partition;
    return out;
}

SpanningTreeReport spanning_tree_check(const Matrix& L_inf, const ClusterPartition& partition,
                                       const Vector& pinning, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("spanning_tree_check: tol must be positive");
    SpanningTreeReport report;
    for (int l = 0; l < partition.cluster_count(); ++l) {
        const auto& nodes = partition.cluster(l);
        std::vector<bool> reached(nodes.size(), false);
        std::deque<int> queue;
        for (size_t k = 0; k < nodes.size(); ++k) {
            if (pinning(nodes[k]) > tol) {
                reached[k] = true;
                queue.push_back(static_cast<int>(k));
            }
        }
        while (!queue.empty()) {
            const int k = queue.front();
            queue.pop_front();
            for (size_t m = 0; m < nodes.size(); ++m) {
                if (reached[m]) continue;
                // edge nodes[k] -> nodes[m] exists iff |a| = |-L(m, k)| > tol
                if (std::abs(L_inf(nodes[m], nodes[k])) > tol) {
                    reached[m] = true;
                    queue.push_back(static_cast<int>(m));
                }
            }
        }
        std::vector<int> missing;
        for (size_t k = 0; k < nodes.size(); ++k)
            if (!reached[k]) missing.push_back(nodes[k]);
        report.cluster_ok.push_back(missing.empty());
        report.unreachable.push_back(std::move(missing));
    }
    return report;
}

Matrix intra_grounded_block(const Matrix& adjacency, const Vector& pinning,
                            const ClusterPartition& partition, int l) {
    const auto& nodes = partition.cluster(l);
    const int m = static_cast<int>(nodes.size());
    Matrix sub(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) sub(r, c) = adjacency(nodes[r], nodes[c]);
    Matrix block = laplacian_from_weights(sub);
    for (int r = 0; r < m; ++r) block(r, r) += pinning(nodes[r]);
    return block;
}

Matrix inter_cluster_part(const Matrix& adjacency, const ClusterPartition& partition) {
    Matrix l0 = [&] {
        Matrix l = -adjacency;
        l.diagonal().setZero();
        for (int i = 0; i < partition.node_count(); ++i) {
            double deg = 0.0;
            for (int j = 0; j < partition.node_count(); ++j)
                if (j != i) deg += adjacency(i, j);
            l(i, i) = deg;
        }
        return l;
    }();
    for (int cl = 0; cl < partition.cluster_count(); ++cl) {
        const auto& nodes = partition.cluster(cl);
        Matrix intra = intra_grounded_block(adjacency, Vector::Zero(partition.node_count()),
                                            partition, cl);
        for (size_t r = 0; r < nodes.size(); ++r)
            for (size_t c = 0; c < nodes.size(); ++c)
                l0(nodes[r], nodes[c]) -= intra(r, c);
    }
    return l0;
}

}  // namespace clustersync
