#include <random>

#include "clustersync/graph.hpp"
#include "clustersync/scenario_library.hpp"
#include "doctest.h"

using namespace clustersync;

namespace {

ClusterPartition two_node_partition() { return ClusterPartition(2, {{0, 1}}); }

// Midpoint quadrature of the switched adjacency; independent of the exact
// piecewise integration in union_graph.
Matrix quadrature_union(const SwitchingSignal& signal, const std::vector<WeightedDigraph>& graphs,
                        double t0, double t1, double dt) {
    const int n = graphs[0].node_count();
    Matrix acc = Matrix::Zero(n, n);
    const long long steps = std::llround((t1 - t0) / dt);
    for (long long k = 0; k < steps; ++k) {
        const double mid = t0 + (static_cast<double>(k) + 0.5) * dt;
        acc += graphs[signal.phase(signal.phase_at(mid / signal.epsilon())).graph_id].adjacency() *
               dt;
    }
    return acc;
}

}  // namespace

TEST_CASE("laplacian of a single edge") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = 1.0;  // edge node2 -> node1
    WeightedDigraph g(a);
    BlockLaplacian lap = laplacian_of(g, {}, 0.0, two_node_partition(), Vector::Zero(2),
                                      Vector::Ones(1));
    Matrix expected(2, 2);
    expected << 1, -1, 0, 0;
    CHECK((lap.matrix() - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("laplacian of the empty graph is zero") {
    WeightedDigraph g(Matrix::Zero(3, 3));
    BlockLaplacian lap = laplacian_of(g, {}, 0.0, ClusterPartition(3, {{0, 1, 2}}),
                                      Vector::Zero(3), Vector::Ones(1));
    CHECK(lap.matrix().norm() == 0.0);
}

TEST_CASE("trust scaling of a 3-cycle") {
    // cycle 1 -> 2 -> 3 -> 1, unit weights, gamma = 0.5 everywhere
    Matrix a = Matrix::Zero(3, 3);
    a(1, 0) = 1.0;
    a(2, 1) = 1.0;
    a(0, 2) = 1.0;
    WeightedDigraph g(a);
    TrustSchedule trust;
    trust.set_edge(1, 0, {{0.0, 0.5}});
    trust.set_edge(2, 1, {{0.0, 0.5}});
    trust.set_edge(0, 2, {{0.0, 0.5}});
    ClusterPartition part(3, {{0, 1, 2}});
    BlockLaplacian lap = laplacian_of(g, trust, 1.0, part, Vector::Zero(3), Vector::Ones(1));

    Matrix expected(3, 3);
    expected << 0.5, 0, -0.5, -0.5, 0.5, 0, 0, -0.5, 0.5;
    CHECK((lap.matrix() - expected).norm() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(lap.matrix().rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("trust of one reproduces the raw adjacency exactly") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix a = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) a(i, j) = dist(rng);
    TrustSchedule trust;
    trust.set_edge(0, 1, {{0.0, 1.0}});
    trust.set_edge(2, 3, {{0.0, 1.0}, {5.0, 1.0}});
    CHECK((trust.scale(a, 10.0) - a).norm() == 0.0);
    CHECK((trust.scale(a, 0.0) - a).norm() == 0.0);
}

TEST_CASE("row sums of constructed Laplacians vanish") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    ClusterPartition part(5, {{0, 1, 2}, {3, 4}});
    for (int trial = 0; trial < 25; ++trial) {
        Matrix a = Matrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                if (i != j) a(i, j) = part.same_cluster(i, j) ? std::abs(dist(rng)) : dist(rng);
        WeightedDigraph g(a, part);
        Vector gains(2);
        gains << 1.7, 0.4;
        BlockLaplacian lap = laplacian_of(g, {}, 0.0, part, Vector::Zero(5), gains);
        CHECK(lap.matrix().rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("in-degree balance") {
    ClusterPartition part(3, {{0}, {1, 2}});
    SUBCASE("cancelling pair passes") {
        Matrix a = Matrix::Zero(3, 3);
        a(0, 1) = 1.0;
        a(0, 2) = -1.0;
        WeightedDigraph g(a, part);
        BlockLaplacian lap = laplacian_of(g, {}, 0.0, part, Vector::Zero(3), Vector::Ones(2));
        CHECK(in_degree_balance_check(lap, kBalanceTol).pass);
    }
    SUBCASE("single inter-cluster weight fails at that node") {
        Matrix a = Matrix::Zero(3, 3);
        a(0, 1) = 1.0;
        WeightedDigraph g(a, part);
        BlockLaplacian lap = laplacian_of(g, {}, 0.0, part, Vector::Zero(3), Vector::Ones(2));
        BalanceReport report = in_degree_balance_check(lap, kBalanceTol);
        CHECK_FALSE(report.pass);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].node == 0);
        CHECK(report.violations[0].cluster == 1);
    }
    SUBCASE("paired random weights always balance") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> dist(0.1, 2.0);
        ClusterPartition p2(6, {{0, 1, 2}, {3, 4, 5}});
        for (int trial = 0; trial < 20; ++trial) {
            Matrix a = Matrix::Zero(6, 6);
            for (int i = 0; i < 3; ++i) {
                const double w = dist(rng);
                a(i, 3) = w;
                a(i, 4) = -w;  // pair +w with -w from the foreign cluster
            }
            for (int i = 3; i < 6; ++i) {
                const double w = dist(rng);
                a(i, 0) = w;
                a(i, 2) = -w;
            }
            WeightedDigraph g(a, p2);
            BlockLaplacian lap = laplacian_of(g, {}, 0.0, p2, Vector::Zero(6), Vector::Ones(2));
            CHECK(in_degree_balance_check(lap, kBalanceTol).pass);
        }
    }
}

TEST_CASE("union graph closed forms") {
    Matrix a1 = Matrix::Zero(2, 2);
    a1(0, 1) = 1.0;
    Matrix a2 = Matrix::Zero(2, 2);
    a2(1, 0) = 2.0;
    std::vector<WeightedDigraph> graphs{WeightedDigraph(a1), WeightedDigraph(a2)};

    SUBCASE("constant graph over [0,1]") {
        SwitchingSignal signal({{0, Vector::Zero(2), 1.0}}, true, 1.0);
        CHECK((union_graph(signal, graphs, 0.0, 1.0).adjacency() - a1).norm() <= 1e-15);
    }
    SUBCASE("equal dwell over one period") {
        SwitchingSignal signal({{0, Vector::Zero(2), 0.5}, {1, Vector::Zero(2), 0.5}}, true, 1.0);
        Matrix expected = 0.5 * (a1 + a2);  // times (t1 - t0) = 1
        CHECK((union_graph(signal, graphs, 0.0, 1.0).adjacency() - expected).norm() <= 1e-14);
    }
    SUBCASE("dwell ratio 1:3 matches the quadrature oracle") {
        SwitchingSignal signal({{0, Vector::Zero(2), 0.25}, {1, Vector::Zero(2), 0.75}}, true,
                               0.37);
        Matrix expected = 0.25 * a1 + 0.75 * a2;  // per unit slow time
        const double t1 = 0.37;  // one slow-time period
        Matrix got = union_graph(signal, graphs, 0.0, t1).adjacency();
        CHECK((got / t1 - expected).norm() <= 1e-12);
        Matrix oracle = quadrature_union(signal, graphs, 0.0, t1, 1e-4 * t1);
        CHECK((got - oracle).norm() <= 1e-9);
    }
    SUBCASE("additive over adjacent intervals") {
        SwitchingSignal signal({{0, Vector::Zero(2), 0.3}, {1, Vector::Zero(2), 0.7}}, true, 0.05);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> dist(0.0, 2.0);
        for (int trial = 0; trial < 10; ++trial) {
            double t0 = dist(rng), tm = t0 + dist(rng), t1 = tm + dist(rng);
            Matrix left = union_graph(signal, graphs, t0, tm).adjacency();
            Matrix right = union_graph(signal, graphs, tm, t1).adjacency();
            Matrix whole = union_graph(signal, graphs, t0, t1).adjacency();
            CHECK((left + right - whole).norm() <= 1e-12);
        }
    }
    SUBCASE("rejects empty window") {
        SwitchingSignal signal({{0, Vector::Zero(2), 1.0}}, true, 1.0);
        CHECK_THROWS_AS(union_graph(signal, graphs, 1.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("average laplacian") {
    ClusterPartition part(2, {{0, 1}});
    Matrix a1 = Matrix::Zero(2, 2);
    a1(0, 1) = 1.0;
    Matrix a2 = Matrix::Zero(2, 2);
    a2(1, 0) = 3.0;
    std::vector<WeightedDigraph> graphs{WeightedDigraph(a1), WeightedDigraph(a2)};

    SUBCASE("single constant graph") {
        SwitchingSignal signal({{0, Vector::Zero(2), 0.4}}, true, 1.0);
        AverageResult avg = average_laplacian(signal, graphs, 5.0, 8, part);
        CHECK((avg.adjacency_avg - a1).norm() <= 1e-15);
        CHECK(avg.kappa <= 1e-13);
    }
    SUBCASE("period-2 equal dwell averages and beta decays") {
        SwitchingSignal signal({{0, Vector::Zero(2), 0.1}, {1, Vector::Zero(2), 0.1}}, true, 1.0);
        AverageResult avg = average_laplacian(signal, graphs, 40.0, 20, part);
        CHECK((avg.adjacency_avg - 0.5 * (a1 + a2)).norm() <= 1e-14);
        CHECK(avg.L_inf.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
        // beta(t) ~ O(1/t): eventually non-increasing
        for (size_t k = avg.beta_trace.size() / 2; k + 1 < avg.beta_trace.size(); ++k)
            CHECK(avg.beta_trace[k + 1].second <= avg.beta_trace[k].second + 1e-9);
    }
    SUBCASE("period average is invariant to the phase offset") {
        SwitchingSignal signal({{0, Vector::Zero(2), 0.25}, {1, Vector::Zero(2), 0.75}}, true,
                               0.01);
        AverageResult avg = average_laplacian(signal, graphs, 1.0, 4, part);
        const double period = signal.epsilon() * signal.period();
        for (double t0 : {0.0, 0.0013, 0.51, 2.7}) {
            Matrix window = union_graph(signal, graphs, t0, t0 + period).adjacency() / period;
            CHECK((window - avg.adjacency_avg).norm() <= 1e-10);
        }
    }
}

TEST_CASE("spanning tree checks") {
    SUBCASE("pinned chain passes") {
        ClusterPartition part(3, {{0, 1, 2}});
        Matrix a = Matrix::Zero(3, 3);
        a(1, 0) = 1.0;
        a(2, 1) = 1.0;
        Vector pin = Vector::Zero(3);
        pin(0) = 1.0;
        Matrix l = laplacian_of(WeightedDigraph(a), {}, 0.0, part, pin, Vector::Ones(1)).matrix();
        CHECK(spanning_tree_check(l, part, pin, kEdgeTol).all_ok());
    }
    SUBCASE("unpinned unreachable node fails") {
        ClusterPartition part(3, {{0, 1, 2}});
        Matrix a = Matrix::Zero(3, 3);
        a(1, 0) = 1.0;
        Vector pin = Vector::Zero(3);
        pin(0) = 1.0;
        Matrix l = laplacian_of(WeightedDigraph(a), {}, 0.0, part, pin, Vector::Ones(1)).matrix();
        SpanningTreeReport report = spanning_tree_check(l, part, pin, kEdgeTol);
        CHECK_FALSE(report.all_ok());
        REQUIRE(report.unreachable[0].size() == 1);
        CHECK(report.unreachable[0][0] == 2);
    }
    SUBCASE("benchmark phases fail individually, the average passes") {
        ClusterScenario s = benchmark_scenario();
        AverageResult avg = s.average(8);
        CHECK(spanning_tree_check(avg.L_inf, s.partition, avg.pinning_avg, kEdgeTol).all_ok());
        for (int k = 0; k < s.signal.phase_count(); ++k) {
            const Phase& ph = s.signal.phase(k);
            Matrix l = laplacian_of(s.graphs[ph.graph_id], {}, 0.0, s.partition, ph.pinning,
                                    Vector::Ones(2))
                           .matrix();
            CHECK_FALSE(spanning_tree_check(l, s.partition, ph.pinning, kEdgeTol).all_ok());
        }
    }
    SUBCASE("invariant under uniform positive rescaling") {
        ClusterScenario s = benchmark_scenario();
        AverageResult avg = s.average(8);
        for (double scale : {0.05, 1.0, 40.0}) {
            SpanningTreeReport report = spanning_tree_check(scale * avg.L_inf, s.partition,
                                                            (scale * avg.pinning_avg).eval(),
                                                            kEdgeTol);
            CHECK(report.all_ok());
        }
    }
}

TEST_CASE("graph construction rejects bad input") {
    CHECK_THROWS_AS(WeightedDigraph(Matrix::Ones(2, 2)), std::invalid_argument);  // diagonal
    Matrix nan2 = Matrix::Zero(2, 2);
    nan2(0, 1) = std::nan("");
    CHECK_THROWS_AS(WeightedDigraph{nan2}, std::invalid_argument);
    ClusterPartition part(2, {{0, 1}});
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 1) = -1.0;  // negative intra-cluster weight
    CHECK_THROWS_AS(WeightedDigraph(neg, part), std::invalid_argument);
    CHECK_NOTHROW(WeightedDigraph(neg, part, true));
    WeightedDigraph g(Matrix::Zero(2, 2));
    Vector bad_gain(1);
    bad_gain << -0.5;
    CHECK_THROWS_AS(laplacian_of(g, {}, 0.0, part, Vector::Zero(2), bad_gain),
                    std::invalid_argument);
}

TEST_CASE("partition invariants") {
    CHECK_THROWS_AS(ClusterPartition(3, {{0, 1}}), std::invalid_argument);          // not covering
    CHECK_THROWS_AS(ClusterPartition(3, {{0, 1}, {1, 2}}), std::invalid_argument);  // overlap
    CHECK_THROWS_AS(ClusterPartition(3, {{0, 1, 2}, {}}), std::invalid_argument);   // empty
    ClusterPartition part(4, {{2, 0}, {1, 3}});
    CHECK(part.cluster_of(2) == 0);
    CHECK(part.cluster_of(3) == 1);
}
