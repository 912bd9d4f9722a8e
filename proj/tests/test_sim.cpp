#include <cmath>
#include <random>

#include "clustersync/sim.hpp"
#include "clustersync/scenario_library.hpp"
#include "doctest.h"

using namespace clustersync;

namespace {

// Single agent, single cluster, no edges; pinning and plant configurable.
ClusterScenario single_agent(const Matrix& a, const Matrix& b, double pin, double horizon,
                             double dt) {
    ClusterPartition part(1, {{0}});
    const int n = static_cast<int>(a.rows());
    std::vector<WeightedDigraph> graphs;
    graphs.emplace_back(Matrix::Zero(1, 1));
    Vector pinning(1);
    pinning << pin;
    SwitchingSignal signal({{0, pinning, 1.0}}, true, 1.0);
    SimConfig sim;
    sim.dt = dt;
    sim.horizon = horizon;
    sim.epsilon = 1.0;
    sim.record_stride = 1;
    return ClusterScenario{"single",
                           PlantModel(a, b),
                           Matrix::Identity(n, n),
                           std::move(part),
                           {"g"},
                           std::move(graphs),
                           std::move(signal),
                           TrustSchedule{},
                           CouplingConfig{Vector::Ones(1), {}},
                           {Vector::Zero(n)},
                           sim};
}

GainSet unit_gains(int n, int m) {
    GainSet g;
    g.P = Matrix::Identity(n, n);
    g.K = Matrix::Ones(m, n);
    return g;
}

}  // namespace

TEST_CASE("control input") {
    ClusterScenario s = benchmark_scenario();
    const Phase& ph = s.signal.phase(0);
    BlockLaplacian lap = laplacian_of(s.graphs[ph.graph_id], {}, 0.0, s.partition, ph.pinning,
                                      s.coupling.cluster_gains);
    Matrix k(1, 4);
    k << 1, 2, 3, 4;

    SUBCASE("vanishes on the consensus manifold") {
        Matrix leaders(2, 4);
        leaders << 1, 2, 3, 4, -1, -2, -3, -4;
        Matrix states(7, 4);
        for (int i = 0; i < 7; ++i) states.row(i) = leaders.row(s.partition.cluster_of(i));
        for (int i = 0; i < 7; ++i)
            CHECK(control_input(i, states, leaders, lap, k).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("single pinned scalar agent gives u = s - x") {
        ClusterPartition part(1, {{0}});
        Vector pin(1);
        pin << 1.0;
        BlockLaplacian scalar_lap = laplacian_of(WeightedDigraph(Matrix::Zero(1, 1)), {}, 0.0,
                                                 part, pin, Vector::Ones(1));
        Matrix states(1, 1), leaders(1, 1), gain(1, 1);
        states << 2.0;
        leaders << 5.0;
        gain << 1.0;
        Vector u = control_input(0, states, leaders, scalar_lap, gain);
        CHECK(u(0) == doctest::Approx(3.0));
    }
    SUBCASE("3-agent line matches the hand expansion") {
        // agents 0 - 1 - 2 in one cluster, weights w01 = 2 (1->0), w12 = 3
        // (2->1), pin d0 = 0.5, cluster gain c = 2.
        ClusterPartition part(3, {{0, 1, 2}});
        Matrix adj = Matrix::Zero(3, 3);
        adj(0, 1) = 2.0;
        adj(1, 2) = 3.0;
        Vector pin(3);
        pin << 0.5, 0, 0;
        Vector c(1);
        c << 2.0;
        BlockLaplacian line = laplacian_of(WeightedDigraph(adj), {}, 0.0, part, pin, c);
        Matrix states(3, 1), leaders(1, 1), gain(1, 1);
        states << 1.0, 2.0, 4.0;
        leaders << 0.0;
        gain << 1.0;
        // u_0 = c*w01*(x1 - x0) + c*d0*(s - x0) = 2*2*(2-1) + 2*0.5*(0-1) = 3
        CHECK(control_input(0, states, leaders, line, gain)(0) == doctest::Approx(3.0));
        // u_1 = c*w12*(x2 - x1) = 2*3*(4-2) = 12
        CHECK(control_input(1, states, leaders, line, gain)(0) == doctest::Approx(12.0));
        // u_2 = 0 (no incoming edges, no pinning)
        CHECK(control_input(2, states, leaders, line, gain)(0) == 0.0);
    }
    SUBCASE("index out of range") {
        Matrix states(7, 4), leaders(2, 4);
        states.setZero();
        leaders.setZero();
        CHECK_THROWS_AS(control_input(9, states, leaders, lap, k), std::out_of_range);
    }
}

TEST_CASE("stepper basics") {
    SUBCASE("zero dynamics leaves the state untouched") {
        ClusterScenario s = single_agent(Matrix::Zero(1, 1), Matrix::Identity(1, 1), 0.0, 1.0,
                                         0.1);
        SimulatorEngine engine(s, unit_gains(1, 1));
        auto state = engine.initial_state_from((Matrix(1, 1) << 3.25).finished());
        engine.step(state, 0.0, 0.1);
        CHECK(state.agents(0, 0) == 3.25);
    }
    SUBCASE("scalar decay matches exp(-dt)") {
        ClusterScenario s = single_agent(-Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0.0,
                                         1.0, 0.1);
        SimulatorEngine engine(s, unit_gains(1, 1));
        auto state = engine.initial_state_from((Matrix(1, 1) << 1.0).finished());
        engine.step(state, 0.0, 0.1);
        CHECK(state.agents(0, 0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-7));
    }
    SUBCASE("halving dt reduces the global error about sixteenfold") {
        auto run_error = [&](double dt) {
            ClusterScenario s = single_agent(-Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                             0.0, 1.0, dt);
            GainSet g = unit_gains(1, 1);
            Trajectory traj = simulate_from(s, g, s.sim, (Matrix(1, 1) << 1.0).finished());
            double x = traj.agent_states.back()(0, 0);
            return std::abs(x - std::exp(-1.0));
        };
        const double ratio = run_error(0.05) / run_error(0.025);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }
}

TEST_CASE("simulation invariants") {
    ClusterScenario s = benchmark_scenario();
    s.sim.horizon = 1.0;  // keep the unit test quick; acceptance runs 10 s
    GainSet gains = synthesize_gain(s.plant, s.gain_weight);

    SUBCASE("starting on the leaders stays on the leaders") {
        Matrix agents0(7, 4);
        for (int i = 0; i < 7; ++i)
            agents0.row(i) = s.leaders[s.partition.cluster_of(i)].transpose();
        Trajectory traj = simulate_from(s, gains, s.sim, agents0);
        CHECK(traj.error_series.maxCoeff() <= 1e-9);
    }
    SUBCASE("deterministic replay") {
        Trajectory a = simulate(s, gains, s.sim);
        Trajectory b = simulate(s, gains, s.sim);
        REQUIRE(a.sample_count() == b.sample_count());
        for (int k = 0; k < a.sample_count(); ++k)
            CHECK((a.agent_states[k] - b.agent_states[k]).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("leaders are autonomous") {
        SimConfig other = s.sim;
        other.seed = 99;
        Trajectory a = simulate(s, gains, s.sim);
        Trajectory b = simulate(s, gains, other);
        for (int k = 0; k < a.sample_count(); ++k)
            CHECK((a.leader_states[k] - b.leader_states[k]).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("superposition of the error system") {
        // zero leaders make the agent states equal the errors exactly
        ClusterScenario zs = s;
        zs.leaders = {Vector::Zero(4), Vector::Zero(4)};
        std::mt19937_64 rng(41);
        std::normal_distribution<double> dist;
        Matrix e0 = Matrix::NullaryExpr(7, 4, [&] { return dist(rng); });
        const double alpha = 3.7;
        Trajectory base = simulate_from(zs, gains, zs.sim, e0);
        Trajectory scaled = simulate_from(zs, gains, zs.sim, (alpha * e0).eval());
        for (int k = 0; k < base.sample_count(); ++k) {
            const double diff =
                (scaled.agent_states[k] - alpha * base.agent_states[k]).cwiseAbs().maxCoeff();
            const double scale = std::max(1.0, scaled.agent_states[k].cwiseAbs().maxCoeff());
            CHECK(diff / scale <= 1e-9);
        }
    }
}

TEST_CASE("error metrics") {
    ClusterPartition part(3, {{0, 1}, {2}});
    Trajectory traj;
    traj.times = {0.0};
    Matrix leaders(2, 2);
    leaders << 0, 0, 1, 1;
    SUBCASE("agents on leaders give zero") {
        Matrix x(3, 2);
        x << 0, 0, 0, 0, 1, 1;
        traj.agent_states = {x};
        traj.leader_states = {leaders};
        Matrix e = error_metrics(traj, part);
        CHECK(e(0, 0) == 0.0);
        CHECK(e(0, 1) == 0.0);
    }
    SUBCASE("unit offset and 3-4-5 offsets") {
        Matrix x(3, 2);
        x << 1, 0,  // unit offset
            3, 4,   // norm 5
            1, 1;
        traj.agent_states = {x};
        traj.leader_states = {leaders};
        Matrix e = error_metrics(traj, part);
        CHECK(e(0, 0) == doctest::Approx(6.0));  // 1 + 5
        CHECK(e(0, 1) == doctest::Approx(0.0));
    }
}

TEST_CASE("decay rate estimation") {
    SUBCASE("pure exponential") {
        std::vector<double> times;
        Vector series(101);
        for (int k = 0; k <= 100; ++k) {
            times.push_back(0.1 * k);
            series(k) = std::exp(-2.0 * 0.1 * k);
        }
        DecayFit fit = estimate_decay_rate(times, series, 0.0, 10.0);
        CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(fit.r_squared >= 1.0 - 1e-12);
    }
    SUBCASE("constant series has zero rate") {
        std::vector<double> times{0, 1, 2, 3};
        Vector series = Vector::Ones(4);
        DecayFit fit = estimate_decay_rate(times, series, 0.0, 3.0);
        CHECK(fit.rate == doctest::Approx(0.0));
    }
    SUBCASE("zero touching series is rejected") {
        std::vector<double> times{0, 1};
        Vector series(2);
        series << 1.0, 0.0;
        CHECK_THROWS_AS(estimate_decay_rate(times, series, 0.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("uncontrollable mode trace with zero initial component") {
    // e(0) orthogonal to the mode: the trace stays at integrator noise.
    ClusterScenario s = repro_scenario("fig6");
    s.sim.horizon = 0.5;
    PlantModel nominal = example_plant();
    GainSet gains = synthesize_gain(nominal, s.gain_weight);
    PbhResult pbh = pbh_stabilizability_check(s.plant);
    REQUIRE(pbh.worst() != nullptr);

    Matrix agents0(7, 4);
    for (int i = 0; i < 7; ++i) {
        agents0.row(i) = s.leaders[s.partition.cluster_of(i)].transpose();
        agents0(i, 0) += 1.0 + i;  // offset only in the first coordinate
        agents0(i, 1) += 0.5;
        agents0(i, 2) -= 0.25;
        // fourth coordinate matches the leader: v = e4 gives v^T e(0) = 0
    }
    Trajectory traj = simulate_from(s, gains, s.sim, agents0);
    ModeTrace trace = uncontrollable_mode_trace(traj, s.partition, s.plant.A,
                                                pbh.worst()->left_vector, pbh.worst()->lambda);
    CHECK(trace.deviation.maxCoeff() <= 1e-8);
}

TEST_CASE("per-edge coupling overrides") {
    // Overriding an edge gain to zero must match removing the edge.
    ClusterScenario s = benchmark_scenario();
    s.sim.horizon = 0.2;
    s.sim.record_stride = 1;
    GainSet gains = synthesize_gain(s.plant, s.gain_weight);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> dist;
    Matrix x0 = Matrix::NullaryExpr(7, 4, [&] { return dist(rng); });

    ClusterScenario overridden = s;
    overridden.coupling.overrides.push_back({1, 0, 0.0});  // kill 1 <- 0

    ClusterScenario removed = s;
    std::vector<Matrix> adj;
    for (const auto& g : removed.graphs) adj.push_back(g.adjacency());
    for (auto& a : adj) a(1, 0) = 0.0;
    removed.graphs.clear();
    for (const auto& a : adj) removed.graphs.emplace_back(a, removed.partition);

    Trajectory ta = simulate_from(overridden, gains, overridden.sim, x0);
    Trajectory tb = simulate_from(removed, gains, removed.sim, x0);
    CHECK((ta.agent_states.back() - tb.agent_states.back()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mode trace rejects a non-eigenpair") {
    ClusterScenario s = benchmark_scenario();
    s.sim.horizon = 0.1;
    GainSet gains = synthesize_gain(s.plant, s.gain_weight);
    Trajectory traj = simulate(s, gains, s.sim);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(4);
    CHECK_THROWS_AS(uncontrollable_mode_trace(traj, s.partition, s.plant.A, v, 5.0),
                    std::invalid_argument);
}

TEST_CASE("trust breakpoints stitch exactly") {
    // One run with a mid-horizon trust drop must equal two stitched runs
    // whose second leg uses the pre-scaled weight.
    ClusterScenario s = benchmark_scenario();
    s.sim.horizon = 0.2;
    s.sim.record_stride = 1;
    const double t_cut = 0.1;                       // slow time, on the dt grid
    const double tau_cut = t_cut / s.sim.epsilon;   // fast time
    GainSet gains = synthesize_gain(s.plant, s.gain_weight);

    ClusterScenario with_trust = s;
    with_trust.trust.set_edge(1, 0, {{tau_cut, 0.5}});

    std::mt19937_64 rng(9);
    std::normal_distribution<double> dist;
    Matrix x0 = Matrix::NullaryExpr(7, 4, [&] { return dist(rng); });
    Trajectory full = simulate_from(with_trust, gains, with_trust.sim, x0);

    // leg 1: trust = 1 up to the cut
    ClusterScenario leg1 = s;
    leg1.sim.horizon = t_cut;
    Trajectory first = simulate_from(leg1, gains, leg1.sim, x0);

    // leg 2: edge (1,0) scaled by 0.5 in every graph, leaders advanced
    ClusterScenario leg2 = s;
    leg2.sim.horizon = s.sim.horizon - t_cut;
    std::vector<Matrix> adj;
    for (const auto& g : leg2.graphs) adj.push_back(g.adjacency());
    for (auto& a : adj) a(1, 0) *= 0.5;
    leg2.graphs.clear();
    for (const auto& a : adj) leg2.graphs.emplace_back(a, leg2.partition);
    for (int l = 0; l < 2; ++l)
        leg2.leaders[l] = first.leader_states.back().row(l).transpose();
    // phases are cyclic with period 0.004 s; t_cut = 25 periods, so the
    // signal phase at the cut matches the signal phase at 0
    Trajectory second = simulate_from(leg2, gains, leg2.sim, first.agent_states.back());

    const Matrix& full_end = full.agent_states.back();
    const Matrix& stitched_end = second.agent_states.back();
    CHECK((full_end - stitched_end).cwiseAbs().maxCoeff() <=
          1e-10 * std::max(1.0, full_end.cwiseAbs().maxCoeff()));
}

TEST_CASE("divergence is detected and flagged") {
    // unstable scalar plant with no pinning: x grows like e^{5t}
    Matrix a(1, 1), b(1, 1);
    a << 5.0;
    b << 1.0;
    ClusterScenario s = single_agent(a, b, 0.0, 8.0, 0.02);
    s.sim.init_range = {9.0, 10.0};
    GainSet gains = synthesize_gain(s.plant, s.gain_weight);
    gains.K.setZero();  // open loop
    Trajectory traj = simulate(s, gains, s.sim);
    CHECK(traj.diverged);
    CHECK(traj.last_time < 8.0);
}
