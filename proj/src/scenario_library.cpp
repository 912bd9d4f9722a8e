#include "clustersync/scenario_library.hpp"

#include <stdexcept>

namespace clustersync {

namespace {

constexpr double kIntra = 2.8;   // phase intra-cluster weight (average 0.7)
constexpr double kPin = 4.0;     // phase pinning gain (average 1.0)
constexpr double kInter = 1.0;   // phase inter-cluster weight (average 0.25)

struct PhaseSpec {
    Matrix adjacency;
    Vector pinning;
};

std::vector<PhaseSpec> benchmark_phases(bool isolate_node7) {
    const int n = 7;
    std::vector<PhaseSpec> phases;
    for (int k = 0; k < 4; ++k)
        phases.push_back({Matrix::Zero(n, n), Vector::Zero(n)});

    // Cluster 1 = {0,1,2,3}, cluster 2 = {4,5,6}. Each phase carries one
    // slice; the union over a period is two pinned undirected chains plus
    // balanced signed inter-cluster pairs.
    phases[0].pinning(0) = kPin;
    phases[0].adjacency(0, 1) = phases[0].adjacency(1, 0) = kIntra;
    phases[0].pinning(4) = kPin;
    phases[0].adjacency(0, 4) = kInter;
    phases[0].adjacency(0, 5) = -kInter;

    phases[1].adjacency(1, 2) = phases[1].adjacency(2, 1) = kIntra;
    phases[1].adjacency(4, 5) = phases[1].adjacency(5, 4) = kIntra;
    phases[1].adjacency(5, 1) = kInter;
    phases[1].adjacency(5, 2) = -kInter;

    phases[2].adjacency(2, 3) = phases[2].adjacency(3, 2) = kIntra;
    if (!isolate_node7) {
        phases[2].adjacency(5, 6) = phases[2].adjacency(6, 5) = kIntra;
        phases[2].adjacency(2, 5) = kInter;
        phases[2].adjacency(2, 6) = -kInter;
    }

    phases[3].pinning(2) = kPin;
    if (!isolate_node7) phases[3].pinning(6) = kPin;
    phases[3].adjacency(4, 0) = kInter;
    phases[3].adjacency(4, 1) = -kInter;
    return phases;
}

ClusterScenario build(const std::string& name, const PlantModel& plant, const Matrix& weight,
                      double epsilon, bool isolate_node7, const Vector& cluster_gains_or_empty,
                      double horizon, int record_stride) {
    ClusterPartition partition(7, {{0, 1, 2, 3}, {4, 5, 6}});
    const auto specs = benchmark_phases(isolate_node7);

    std::vector<std::string> names = {"ga", "gb", "gc", "gd"};
    std::vector<WeightedDigraph> graphs;
    std::vector<Phase> phases;
    for (size_t k = 0; k < specs.size(); ++k) {
        graphs.emplace_back(specs[k].adjacency, partition);
        phases.push_back({static_cast<int>(k), specs[k].pinning, 0.1});
    }
    SwitchingSignal signal(std::move(phases), true, epsilon);

    Vector gains = cluster_gains_or_empty;
    if (gains.size() == 0) {
        // c = c* + 1 from the averaged topology.
        AverageResult avg = average_laplacian(signal, graphs, horizon, 8, partition);
        std::vector<Vector> xi_blocks;
        for (int l = 0; l < partition.cluster_count(); ++l)
            xi_blocks.push_back(
                compute_xi(intra_grounded_block(avg.adjacency_avg, avg.pinning_avg, partition, l))
                    .diag);
        gains = coupling_thresholds(avg, partition, xi_blocks).array() + 1.0;
    }

    SimConfig sim;
    sim.dt = 2.5e-4;
    sim.horizon = horizon;
    sim.epsilon = epsilon;
    sim.seed = 0;
    sim.init_range = {-10.0, 10.0};
    sim.record_stride = record_stride;

    return ClusterScenario{name,
                           plant,
                           weight,
                           std::move(partition),
                           std::move(names),
                           std::move(graphs),
                           std::move(signal),
                           TrustSchedule{},
                           CouplingConfig{gains, {}},
                           {(Vector(4) << 0.2, 0.1, 0.0, -0.1).finished(),
                            (Vector(4) << -0.3, 0.0, 0.1, 0.2).finished()},
                           sim};
}

}  // namespace

PlantModel example_plant() {
    Matrix a(4, 4);
    a << 0, 1, 0, 0,
         0, 0, -1, 0,
         0, 0, 0, 1,
         0, 0, 5, 0;
    Matrix b(4, 1);
    b << 0, 1, 0, -2;
    return PlantModel(std::move(a), std::move(b));
}

PlantModel uncontrollable_plant() {
    Matrix a(4, 4);
    a << 0, 1, 0, 0,
         0, 0, -1, 0,
         0, 0, 0, 1,
         0, 0, 0, 5;
    Matrix b(4, 1);
    b << 0, 1, 0, 0;
    return PlantModel(std::move(a), std::move(b));
}

ClusterScenario benchmark_scenario() {
    return build("fig2", example_plant(), 1000.0 * Matrix::Identity(4, 4), 0.01, false, {}, 10.0,
                 40);
}

ClusterScenario repro_scenario(const std::string& name) {
    if (name == "fig2") return benchmark_scenario();
    if (name == "fig3") {
        ClusterScenario s =
            build("fig3", example_plant(), 1000.0 * Matrix::Identity(4, 4), 0.5, false, {}, 10.0,
                  40);
        return s;
    }
    if (name == "fig4")
        return build("fig4", example_plant(), 1000.0 * Matrix::Identity(4, 4), 1.0, false, {},
                     10.0, 40);
    if (name == "fig5_topology") {
        // The isolated node makes cluster 2's grounded block singular, so the
        // thresholds cannot be computed here; reuse the benchmark's gains.
        const Vector gains = benchmark_scenario().coupling.cluster_gains;
        return build("fig5_topology", example_plant(), 1000.0 * Matrix::Identity(4, 4), 0.01,
                     true, gains, 10.0, 40);
    }
    if (name == "fig5_unstable")
        return build("fig5_unstable", uncontrollable_plant(), Matrix::Identity(4, 4), 0.5, true,
                     (Vector(2) << 1.0, 1.0).finished(), 1.0, 4);
    if (name == "fig6")
        return build("fig6", uncontrollable_plant(), Matrix::Identity(4, 4), 0.01, false,
                     (Vector(2) << 1.0, 1.0).finished(), 1.0, 1);
    throw std::invalid_argument("unknown reproduction scenario '" + name + "'");
}

std::vector<std::string> repro_scenario_names() {
    return {"fig2", "fig3", "fig4", "fig5_topology", "fig5_unstable", "fig6"};
}

}  // namespace clustersync
