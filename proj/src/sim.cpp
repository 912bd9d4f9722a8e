#include "clustersync/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace clustersync {

Matrix Trajectory::errors_at(int k, const ClusterPartition& partition) const {
    const Matrix& x = agent_states.at(k);
    const Matrix& s = leader_states.at(k);
    Matrix e(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i) e.row(i) = x.row(i) - s.row(partition.cluster_of(i));
    return e;
}

Vector control_input(int agent, const Matrix& states, const Matrix& leaders,
                     const BlockLaplacian& laplacian, const Matrix& K) {
    const int n_nodes = static_cast<int>(states.rows());
    if (agent < 0 || agent >= n_nodes)
        throw std::out_of_range("control_input: agent index out of range");
    if (laplacian.matrix().rows() != n_nodes)
        throw std::invalid_argument("control_input: laplacian/state size mismatch");
    if (K.cols() != states.cols())
        throw std::invalid_argument("control_input: gain/state dimension mismatch");

    const ClusterPartition& part = laplacian.partition();
    Vector coupling = Vector::Zero(states.cols());
    for (int j = 0; j < n_nodes; ++j) {
        if (j == agent) continue;
        const double w = -laplacian.matrix()(agent, j);  // c_ij a_ij
        if (w != 0.0) coupling += w * (states.row(j) - states.row(agent)).transpose();
    }
    const double pin = laplacian.pinning()(agent);
    if (pin != 0.0)
        coupling +=
            pin * (leaders.row(part.cluster_of(agent)) - states.row(agent)).transpose();
    return K * coupling;
}

SimulatorEngine::SimulatorEngine(const ClusterScenario& scenario, const GainSet& gains)
    : scenario_(scenario), a_(scenario.plant.A) {
    if (gains.K.cols() != scenario.plant.state_dim() ||
        gains.K.rows() != scenario.plant.input_dim())
        throw std::invalid_argument("simulator: gain dimensions do not match plant");
    bk_ = scenario.plant.B * gains.K;

    trust_cuts_ = scenario.trust.breakpoints();
    const int segments = static_cast<int>(trust_cuts_.size()) + 1;
    tables_.resize(scenario.signal.phase_count());
    for (int ph = 0; ph < scenario.signal.phase_count(); ++ph) {
        const Phase& phase = scenario.signal.phase(ph);
        const WeightedDigraph& graph = scenario.graphs.at(phase.graph_id);
        for (int seg = 0; seg < segments; ++seg) {
            const double tau = seg == 0 ? (trust_cuts_.empty() ? 0.0 : trust_cuts_[0] - 1.0)
                                        : trust_cuts_[seg - 1];
            BlockLaplacian lap = laplacian_of(graph, scenario.trust, tau, scenario.partition,
                                              phase.pinning, scenario.coupling.cluster_gains);
            PieceTable table;
            table.weights = -lap.matrix();
            table.weights.diagonal().setZero();
            table.pinning = lap.pinning();
            for (const EdgeOverride& ov : scenario.coupling.overrides) {
                table.weights(ov.to, ov.from) = ov.gain *
                                                scenario.trust.value(ov.to, ov.from, tau) *
                                                graph.adjacency()(ov.to, ov.from);
            }
            tables_[ph].push_back(std::move(table));
        }
    }
}

const SimulatorEngine::PieceTable& SimulatorEngine::table_at(double tau) const {
    const int ph = scenario_.signal.phase_at(tau);
    int seg = static_cast<int>(
        std::upper_bound(trust_cuts_.begin(), trust_cuts_.end(), tau) - trust_cuts_.begin());
    return tables_[ph][seg];
}

void SimulatorEngine::derivative(const PieceTable& table, const State& s, State& ds) const {
    const int n_nodes = static_cast<int>(s.agents.rows());
    ds.agents = s.agents * a_.transpose();
    for (int i = 0; i < n_nodes; ++i) {
        Eigen::RowVectorXd coupling = Eigen::RowVectorXd::Zero(s.agents.cols());
        for (int j = 0; j < n_nodes; ++j) {
            const double w = table.weights(i, j);
            if (w != 0.0) coupling += w * (s.agents.row(j) - s.agents.row(i));
        }
        const double pin = table.pinning(i);
        if (pin != 0.0)
            coupling +=
                pin * (s.leaders.row(scenario_.partition.cluster_of(i)) - s.agents.row(i));
        ds.agents.row(i) += coupling * bk_.transpose();
    }
    ds.leaders = s.leaders * a_.transpose();
}

void SimulatorEngine::step(State& state, double t, double dt) const {
    const double eps = scenario_.signal.epsilon();
    // Split the output step at switching and trust instants so every RK4
    // sub-step sees one constant topology.
    std::vector<double> cuts = scenario_.signal.switch_times_between(t, t + dt);
    for (double tau : trust_cuts_) {
        const double tc = tau * eps;
        if (tc > t && tc < t + dt) cuts.push_back(tc);
    }
    cuts.push_back(t + dt);
    std::sort(cuts.begin(), cuts.end());

    State k1, k2, k3, k4, tmp;
    double a = t;
    for (double b : cuts) {
        const double h = b - a;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) continue;
        const PieceTable& table = table_at(0.5 * (a + b) / eps);
        derivative(table, state, k1);
        tmp.agents = state.agents + 0.5 * h * k1.agents;
        tmp.leaders = state.leaders + 0.5 * h * k1.leaders;
        derivative(table, tmp, k2);
        tmp.agents = state.agents + 0.5 * h * k2.agents;
        tmp.leaders = state.leaders + 0.5 * h * k2.leaders;
        derivative(table, tmp, k3);
        tmp.agents = state.agents + h * k3.agents;
        tmp.leaders = state.leaders + h * k3.leaders;
        derivative(table, tmp, k4);
        state.agents += (h / 6.0) * (k1.agents + 2.0 * k2.agents + 2.0 * k3.agents + k4.agents);
        state.leaders +=
            (h / 6.0) * (k1.leaders + 2.0 * k2.leaders + 2.0 * k3.leaders + k4.leaders);
        a = b;
    }
    if (!state.agents.allFinite() || !state.leaders.allFinite() ||
        state.agents.cwiseAbs().maxCoeff() > 1e12)
        throw DivergenceError("state diverged", t + dt);
}

SimulatorEngine::State SimulatorEngine::initial_state(const SimConfig& config) const {
    const int n = scenario_.plant.state_dim();
    Matrix agents(scenario_.node_count(), n);
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(config.init_range[0], config.init_range[1]);
    for (int i = 0; i < agents.rows(); ++i)
        for (int k = 0; k < n; ++k) agents(i, k) = dist(rng);
    return initial_state_from(agents);
}

SimulatorEngine::State SimulatorEngine::initial_state_from(const Matrix& agents0) const {
    const int n = scenario_.plant.state_dim();
    if (agents0.rows() != scenario_.node_count() || agents0.cols() != n)
        throw std::invalid_argument("simulator: initial state must be N x n");
    State s;
    s.agents = agents0;
    s.leaders.resize(scenario_.cluster_count(), n);
    for (int l = 0; l < scenario_.cluster_count(); ++l)
        s.leaders.row(l) = scenario_.leaders.at(l).transpose();
    return s;
}

namespace {

Trajectory run(const ClusterScenario& scenario, const GainSet& gains, const SimConfig& config,
               SimulatorEngine::State state) {
    if (!(config.dt > 0.0) || config.horizon < config.dt || config.record_stride < 1)
        throw std::invalid_argument("simulate: invalid dt/horizon/record_stride");
    const double max_dt = scenario.signal.epsilon() * scenario.signal.min_dwell() / 4.0;
    if (config.dt > max_dt * (1.0 + 1e-12))
        throw std::invalid_argument("simulate: dt exceeds (epsilon * min dwell) / 4");

    SimulatorEngine engine(scenario, gains);
    const long long steps = std::llround(config.horizon / config.dt);

    Trajectory traj;
    auto record = [&](double t, const SimulatorEngine::State& s) {
        traj.times.push_back(t);
        traj.agent_states.push_back(s.agents);
        traj.leader_states.push_back(s.leaders);
        traj.last_time = t;
    };
    record(0.0, state);
    for (long long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        try {
            engine.step(state, t, config.dt);
        } catch (const DivergenceError&) {
            traj.diverged = true;
            break;
        }
        if ((k + 1) % config.record_stride == 0 || k + 1 == steps)
            record(static_cast<double>(k + 1) * config.dt, state);
    }
    traj.error_series = error_metrics(traj, scenario.partition);
    return traj;
}

}  // namespace

Trajectory simulate(const ClusterScenario& scenario, const GainSet& gains,
                    const SimConfig& config) {
    SimulatorEngine engine(scenario, gains);
    return run(scenario, gains, config, engine.initial_state(config));
}

Trajectory simulate_from(const ClusterScenario& scenario, const GainSet& gains,
                         const SimConfig& config, const Matrix& agents0) {
    SimulatorEngine engine(scenario, gains);
    return run(scenario, gains, config, engine.initial_state_from(agents0));
}

Matrix error_metrics(const Trajectory& traj, const ClusterPartition& partition) {
    Matrix errors(traj.sample_count(), partition.cluster_count());
    for (int k = 0; k < traj.sample_count(); ++k) {
        const Matrix& x = traj.agent_states[k];
        const Matrix& s = traj.leader_states[k];
        for (int l = 0; l < partition.cluster_count(); ++l) {
            double sum = 0.0;
            for (int i : partition.cluster(l)) sum += (x.row(i) - s.row(l)).norm();
            errors(k, l) = sum;
        }
    }
    return errors;
}

DecayFit estimate_decay_rate(const std::vector<double>& times, const Vector& series, double t_a,
                             double t_b) {
    if (static_cast<Eigen::Index>(times.size()) != series.size())
        throw std::invalid_argument("decay_rate: times/series size mismatch");
    std::vector<double> ts, ys;
    for (size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_a || times[k] > t_b) continue;
        if (!(series(k) > 0.0))
            throw std::invalid_argument("decay_rate: series not strictly positive on window");
        ts.push_back(times[k]);
        ys.push_back(-std::log(series(k)));
    }
    if (ts.size() < 2) throw std::invalid_argument("decay_rate: window contains < 2 samples");

    const double n = static_cast<double>(ts.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (size_t k = 0; k < ts.size(); ++k) {
        st += ts[k];
        sy += ys[k];
        stt += ts[k] * ts[k];
        sty += ts[k] * ys[k];
    }
    const double denom = n * stt - st * st;
    DecayFit fit;
    fit.points = static_cast<int>(ts.size());
    fit.rate = (n * sty - st * sy) / denom;
    const double intercept = (sy - fit.rate * st) / n;

    double ss_res = 0.0, ss_tot = 0.0;
    const double mean = sy / n;
    for (size_t k = 0; k < ts.size(); ++k) {
        const double pred = fit.rate * ts[k] + intercept;
        ss_res += (ys[k] - pred) * (ys[k] - pred);
        ss_tot += (ys[k] - mean) * (ys[k] - mean);
    }
    fit.r_squared = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

ModeTrace uncontrollable_mode_trace(const Trajectory& traj, const ClusterPartition& partition,
                                    const Matrix& plant_A, const Eigen::VectorXcd& v,
                                    std::complex<double> lambda) {
    const Eigen::RowVectorXcd vt = v.transpose();
    const double pair_defect =
        (vt * plant_A.cast<std::complex<double>>() - lambda * vt).norm();
    if (pair_defect > 1e-8 * std::max(1.0, plant_A.norm()) * v.norm())
        throw std::invalid_argument("mode_trace: (lambda, v) is not a left eigenpair of A");

    const int n_agents = partition.node_count();
    ModeTrace trace;
    trace.times = traj.times;
    trace.deviation.resize(traj.sample_count(), n_agents);
    trace.expected_mag.resize(traj.sample_count(), n_agents);

    const Matrix e0 = traj.errors_at(0, partition);
    Eigen::VectorXcd eta0(n_agents);
    for (int i = 0; i < n_agents; ++i)
        eta0(i) = vt * e0.row(i).transpose().cast<std::complex<double>>();

    double scale = 0.0;
    for (int i = 0; i < n_agents; ++i) scale = std::max(scale, std::abs(eta0(i)));
    for (int k = 0; k < traj.sample_count(); ++k) {
        const Matrix ek = traj.errors_at(k, partition);
        const std::complex<double> growth = std::exp(lambda * traj.times[k]);
        for (int i = 0; i < n_agents; ++i) {
            const std::complex<double> eta =
                vt * ek.row(i).transpose().cast<std::complex<double>>();
            const std::complex<double> expected = growth * eta0(i);
            trace.deviation(k, i) = std::abs(eta - expected);
            trace.expected_mag(k, i) = std::abs(expected);
            if (std::abs(eta0(i)) > 1e-9 * std::max(1.0, scale))
                trace.max_rel_error = std::max(
                    trace.max_rel_error, trace.deviation(k, i) / trace.expected_mag(k, i));
        }
    }
    return trace;
}

}  // namespace clustersync
