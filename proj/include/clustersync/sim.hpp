#pragma once

#include <complex>
#include <vector>

#include "clustersync/scenario.hpp"

namespace clustersync {

/// Recorded run: sample times, per-agent and per-leader states, and the
/// per-cluster error series E_l(t) = sum_{i in V_l} ||x_i(t) - s_l(t)||.
struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> agent_states;   // one N x n matrix per sample (row i = x_i)
    std::vector<Matrix> leader_states;  // one p x n matrix per sample
    Matrix error_series;                // samples x p
    bool diverged = false;
    double last_time = 0.0;

    int sample_count() const { return static_cast<int>(times.size()); }
    /// Error e_i(t_k) = x_i - s_{cluster(i)} for one sample.
    Matrix errors_at(int k, const ClusterPartition& partition) const;
};

/// Control input of Eq.-style coupling: u_i = K [ sum_j c_ij a_ij (x_j - x_i)
/// + c_ibar d_i (s_ibar - x_i) ], evaluated in difference form so the
/// consensus manifold is an exact fixed point in floating point.
Vector control_input(int agent, const Matrix& states, const Matrix& leaders,
                     const BlockLaplacian& laplacian, const Matrix& K);

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

/// Single-run integrator. Holds the per-phase coupling tables so repeated
/// stepping is cheap; switching and trust changes snap the internal RK4
/// sub-steps so no phase straddles a step.
class SimulatorEngine {
public:
    SimulatorEngine(const ClusterScenario& scenario, const GainSet& gains);

    struct State {
        Matrix agents;   // N x n
        Matrix leaders;  // p x n
    };

    /// One output step of length dt from slow time t (internally split at
    /// switching/trust instants). Throws DivergenceError on non-finite or
    /// > 1e12 states.
    void step(State& state, double t, double dt) const;

    State initial_state(const SimConfig& config) const;
    State initial_state_from(const Matrix& agents0) const;

private:
    struct PieceTable {
        Matrix weights;  // gain- and trust-scaled adjacency
        Vector pinning;  // c_ibar * d_i
    };
    const PieceTable& table_at(double tau) const;
    void derivative(const PieceTable& table, const State& s, State& ds) const;

    const ClusterScenario& scenario_;
    Matrix bk_;  // B * K
    Matrix a_;
    std::vector<std::vector<PieceTable>> tables_;  // [phase][trust segment]
    std::vector<double> trust_cuts_;               // fast-time trust breakpoints
};

/// Integrate the closed loop from random initial agent states (uniform in
/// init_range, seeded) with leaders from the scenario. Deterministic per seed.
Trajectory simulate(const ClusterScenario& scenario, const GainSet& gains,
                    const SimConfig& config);

/// Same, from explicit initial agent states (N x n).
Trajectory simulate_from(const ClusterScenario& scenario, const GainSet& gains,
                         const SimConfig& config, const Matrix& agents0);

/// Per-cluster error series of a recorded trajectory.
Matrix error_metrics(const Trajectory& traj, const ClusterPartition& partition);

struct DecayFit {
    double rate = 0.0;       // slope of -ln E over the window, 1/s
    double r_squared = 0.0;  // goodness of fit
    int points = 0;
};

/// Least-squares exponential fit of a positive error series over [t_a, t_b].
DecayFit estimate_decay_rate(const std::vector<double>& times, const Vector& series, double t_a,
                             double t_b);

struct ModeTrace {
    std::vector<double> times;
    Matrix deviation;     // samples x N: |v^T e_i(t) - e^{lambda t} v^T e_i(0)|
    Matrix expected_mag;  // samples x N: |e^{lambda t} v^T e_i(0)|
    double max_rel_error = 0.0;
};

/// Deviation of each agent's error from the autonomous evolution of an
/// uncontrollable mode: v^T e_i(t) vs e^{lambda t} v^T e_i(0). v must be a
/// left eigenpair of the plant A within 1e-8 (relative).
ModeTrace uncontrollable_mode_trace(const Trajectory& traj, const ClusterPartition& partition,
                                    const Matrix& plant_A, const Eigen::VectorXcd& v,
                                    std::complex<double> lambda);

}  // namespace clustersync
