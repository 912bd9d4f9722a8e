#pragma once

#include <string>
#include <vector>

#include "clustersync/scenario.hpp"

namespace clustersync {

/// The 7-agent, 2-cluster benchmark: four cyclic phases of 0.1 fast-time
/// dwell, each carrying one slice of the structure so no instantaneous graph
/// has a spanning tree while the average does. Cluster gains are set to
/// c* + 1 from the computed thresholds.
ClusterScenario benchmark_scenario();

/// The 4-d double-integrator-like plant used by the benchmark.
PlantModel example_plant();

/// The modified plant whose unstable mode (eigenvalue 5) no actuation
/// reaches: A with last row [0 0 0 5] and B = (0, 1, 0, 0)^T.
PlantModel uncontrollable_plant();

/// Named reproduction scenarios:
///   fig2          benchmark, epsilon = 0.01 (certified, converges)
///   fig3          epsilon = 0.5 (converges slower)
///   fig4          epsilon = 1 (no time-scale separation, fails)
///   fig5_topology node 7 isolated: average graph loses its spanning tree
///   fig5_unstable uncontrollable plant at epsilon = 0.5
///   fig6          uncontrollable plant at epsilon = 0.01
ClusterScenario repro_scenario(const std::string& name);
std::vector<std::string> repro_scenario_names();

}  // namespace clustersync
