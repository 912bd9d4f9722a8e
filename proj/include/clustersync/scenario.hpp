#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clustersync/gains.hpp"
#include "clustersync/graph.hpp"
#include "clustersync/sim_config.hpp"

namespace clustersync {

/// Validation failure with the offending field path, e.g.
/// "graphs.ga.adjacency[2]: expected 7 entries, got 6".
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EdgeOverride {
    int to = 0;    // 0-based
    int from = 0;  // 0-based
    double gain = 1.0;
};

struct CouplingConfig {
    Vector cluster_gains;                 // c_l > 0
    std::vector<EdgeOverride> overrides;  // per-edge c_ij replacements
};

/// Everything that defines one experiment: plant, partition, the switching
/// family of graphs with pinning, trust weights, coupling gains, leader
/// starts, and integration settings.
struct ClusterScenario {
    std::string name = "scenario";
    PlantModel plant;
    Matrix gain_weight;  // Riccati weight; identity when not given in the file
    ClusterPartition partition;
    std::vector<std::string> graph_names;
    std::vector<WeightedDigraph> graphs;
    SwitchingSignal signal;
    TrustSchedule trust;
    CouplingConfig coupling;
    std::vector<Vector> leaders;  // s_l(0), one per cluster
    SimConfig sim;

    int node_count() const { return partition.node_count(); }
    int cluster_count() const { return partition.cluster_count(); }

    /// Cross-field consistency: dimensions, graph references, dwell vs dt.
    void validate() const;

    /// Averaged data of the switching family (period mean for cyclic signals).
    AverageResult average(int samples = 64) const;
};

ClusterScenario load_scenario(const std::filesystem::path& path);
ClusterScenario parse_scenario(const std::string& json_text);
std::string serialize_scenario(const ClusterScenario& scenario);
void save_scenario(const ClusterScenario& scenario, const std::filesystem::path& path);

/// Gain files round-trip with 12 significant digits; rewriting the same gains
/// yields byte-identical output.
std::string serialize_gains(const GainSet& gains);
GainSet parse_gains(const std::string& json_text);
GainSet load_gains(const std::filesystem::path& path);
void save_gains(const GainSet& gains, const std::filesystem::path& path);

}  // namespace clustersync
