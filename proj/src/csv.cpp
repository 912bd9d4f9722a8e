#include "clustersync/csv.hpp"

#include <cmath>
#include <cstdio>

namespace clustersync {

std::string format_csv_value(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", x);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const ClusterPartition& partition, bool full_state) {
    out << "t";
    for (int l = 0; l < partition.cluster_count(); ++l) out << ",E_" << (l + 1);
    if (full_state && traj.sample_count() > 0) {
        const Matrix& x0 = traj.agent_states.front();
        for (int i = 0; i < x0.rows(); ++i)
            for (int k = 0; k < x0.cols(); ++k) out << ",x_" << (i + 1) << "_" << (k + 1);
    }
    out << "\n";
    for (int s = 0; s < traj.sample_count(); ++s) {
        out << format_csv_value(traj.times[s]);
        for (int l = 0; l < partition.cluster_count(); ++l)
            out << "," << format_csv_value(traj.error_series(s, l));
        if (full_state) {
            const Matrix& x = traj.agent_states[s];
            for (int i = 0; i < x.rows(); ++i)
                for (int k = 0; k < x.cols(); ++k) out << "," << format_csv_value(x(i, k));
        }
        out << "\n";
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "param,final_error_ratio,decay_rate,certified,status\n";
    for (const SweepRow& r : rows) {
        out << format_csv_value(r.param) << "," << format_csv_value(r.final_error_ratio) << ","
            << format_csv_value(r.decay_rate) << "," << (r.certified ? 1 : 0) << "," << r.status
            << "\n";
    }
}

}  // namespace clustersync
