#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "clustersync/sim.hpp"

namespace clustersync {

/// Floating-point CSV field with 9 significant digits.
std::string format_csv_value(double x);

/// Header `t,E_1,...,E_p[,x_<i>_<k>...]`; one row per recorded sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const ClusterPartition& partition, bool full_state);

struct SweepRow {
    double param = 0.0;
    double final_error_ratio = 0.0;
    double decay_rate = 0.0;
    bool certified = false;
    std::string status = "ok";  // "ok", "diverged", or an error note
};

/// Header `param,final_error_ratio,decay_rate,certified,status`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace clustersync
