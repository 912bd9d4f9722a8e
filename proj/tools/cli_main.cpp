#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clustersync/analysis.hpp"
#include "clustersync/csv.hpp"
#include "clustersync/scenario.hpp"
#include "clustersync/scenario_library.hpp"
#include "clustersync/sim.hpp"

namespace cs = clustersync;
namespace fs = std::filesystem;

namespace {

// Exit codes: 0 certified/success, 1 parse or usage error, 10..13 the failing
// assumption (1, 2, 3, coupling), 20 divergence during simulation.
enum ExitCode {
    kOk = 0,
    kUsage = 1,
    kAssumption1 = 10,
    kAssumption2 = 11,
    kAssumption3 = 12,
    kCoupling = 13,
    kDiverged = 20,
};

int log_level() {
    const char* env = std::getenv("CLUSTERSYNC_LOG");
    if (!env) return 1;
    const std::string v(env);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[clustersync] " << msg << "\n";
}

int exit_code_of(const cs::ConditionReport& report) {
    if (!report.pbh.is_stabilizable() || !report.pbh.is_controllable()) return kAssumption1;
    if (!report.assumption2_ok) return kAssumption2;
    if (!report.assumption3_ok) return kAssumption3;
    if (!report.coupling_ok) return kCoupling;
    return kOk;
}

cs::ClusterScenario load_with_overrides(const std::string& path, std::optional<double> epsilon,
                                        std::optional<std::uint64_t> seed) {
    cs::ClusterScenario scenario = cs::load_scenario(path);
    if (epsilon) {
        std::vector<cs::Phase> phases = scenario.signal.phases();
        scenario.signal = cs::SwitchingSignal(std::move(phases), scenario.signal.cyclic(),
                                              *epsilon);
        scenario.sim.epsilon = *epsilon;
        scenario.validate();
    }
    if (seed) scenario.sim.seed = *seed;
    return scenario;
}

cs::GainSet synthesize_for(const cs::ClusterScenario& scenario) {
    cs::GainSet gains = cs::synthesize_gain(scenario.plant, scenario.gain_weight);
    // Attach topology-level data when the averaged structure admits it.
    try {
        const cs::AverageResult avg = scenario.average();
        std::vector<cs::Vector> xi_blocks;
        for (int l = 0; l < scenario.cluster_count(); ++l)
            xi_blocks.push_back(cs::compute_xi(cs::intra_grounded_block(
                                                   avg.adjacency_avg, avg.pinning_avg,
                                                   scenario.partition, l))
                                    .diag);
        gains.thresholds = cs::coupling_thresholds(avg, scenario.partition, xi_blocks);
        cs::Vector xi_diag(scenario.node_count());
        for (int l = 0; l < scenario.cluster_count(); ++l) {
            const auto& nodes = scenario.partition.cluster(l);
            for (size_t k = 0; k < nodes.size(); ++k) xi_diag(nodes[k]) = xi_blocks[l](k);
        }
        gains.xi_diag = xi_diag;
    } catch (const std::exception& e) {
        log_info(std::string("thresholds unavailable: ") + e.what());
    }
    return gains;
}

int cmd_analyze(const std::string& path, bool json, bool epsilon_search) {
    cs::ClusterScenario scenario = cs::load_scenario(path);
    cs::GainSet gains;
    if (cs::pbh_stabilizability_check(scenario.plant).is_stabilizable())
        gains = cs::synthesize_gain(scenario.plant, scenario.gain_weight);
    cs::AuditOptions options;
    options.epsilon_search = epsilon_search;
    const cs::ConditionReport report = cs::audit_scenario(scenario, gains, options);
    std::cout << (json ? report.to_json() : report.to_text());
    return exit_code_of(report);
}

int cmd_synthesize(const std::string& path, const std::string& out) {
    const cs::ClusterScenario scenario = cs::load_scenario(path);
    if (!cs::pbh_stabilizability_check(scenario.plant).is_stabilizable()) {
        std::cerr << "error: plant is not stabilizable; no gains written\n";
        return kAssumption1;
    }
    const cs::GainSet gains = synthesize_for(scenario);
    cs::save_gains(gains, out);
    log_info("gains written to " + out);
    return kOk;
}

int cmd_simulate(const std::string& path, const std::string& gains_path, const std::string& out,
                 bool full_state, std::optional<double> epsilon,
                 std::optional<std::uint64_t> seed) {
    const cs::ClusterScenario scenario = load_with_overrides(path, epsilon, seed);
    const cs::GainSet gains =
        gains_path.empty() ? synthesize_for(scenario) : cs::load_gains(gains_path);
    const cs::Trajectory traj = cs::simulate(scenario, gains, scenario.sim);
    std::ofstream os(out);
    if (!os) {
        std::cerr << "error: cannot write " << out << "\n";
        return kUsage;
    }
    cs::write_trajectory_csv(os, traj, scenario.partition, full_state);
    if (traj.diverged) {
        std::cerr << "error: simulation diverged; last finite time " << traj.last_time << "\n";
        return kDiverged;
    }
    return kOk;
}

cs::SweepRow sweep_row(const cs::ClusterScenario& base, const std::string& param, double value) {
    cs::SweepRow row;
    row.param = value;
    try {
        cs::ClusterScenario scenario = base;
        if (param == "epsilon") {
            std::vector<cs::Phase> phases = base.signal.phases();
            scenario.signal = cs::SwitchingSignal(std::move(phases), base.signal.cyclic(), value);
            scenario.sim.epsilon = value;
        } else {  // uniform cluster gain
            scenario.coupling.cluster_gains.setConstant(value);
        }
        scenario.validate();
        cs::GainSet gains = cs::synthesize_gain(scenario.plant, scenario.gain_weight);
        const cs::ConditionReport report = cs::audit_scenario(scenario, gains);
        row.certified = report.verdict == cs::AuditVerdict::certified;

        const cs::Trajectory traj = cs::simulate(scenario, gains, scenario.sim);
        const cs::Vector total = traj.error_series.rowwise().sum();
        row.final_error_ratio = total(total.size() - 1) / total(0);
        if (traj.diverged) row.status = "diverged";
        const cs::DecayFit fit = cs::estimate_decay_rate(
            traj.times, total, 0.1 * scenario.sim.horizon, 0.9 * scenario.sim.horizon);
        row.decay_rate = fit.rate;
    } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
        row.final_error_ratio = std::nan("");
        row.decay_rate = std::nan("");
    }
    return row;
}

int cmd_sweep(const std::string& path, const std::string& param,
              const std::vector<double>& grid, const std::string& out,
              std::optional<std::uint64_t> seed) {
    if (param != "epsilon" && param != "c") {
        std::cerr << "error: --param must be 'epsilon' or 'c'\n";
        return kUsage;
    }
    if (grid.empty()) {
        std::cerr << "error: empty grid\n";
        return kUsage;
    }
    for (double g : grid)
        if (!(g > 0.0)) {
            std::cerr << "error: grid values must be positive\n";
            return kUsage;
        }
    const cs::ClusterScenario base = load_with_overrides(path, std::nullopt, seed);

    // Rows are independent; run them concurrently and merge in grid order.
    std::vector<std::future<cs::SweepRow>> futures;
    for (double g : grid)
        futures.push_back(std::async(std::launch::async,
                                     [&base, &param, g] { return sweep_row(base, param, g); }));
    std::vector<cs::SweepRow> rows;
    for (auto& f : futures) rows.push_back(f.get());

    std::ofstream os(out);
    if (!os) {
        std::cerr << "error: cannot write " << out << "\n";
        return kUsage;
    }
    cs::write_sweep_csv(os, rows);
    return kOk;
}

int cmd_repro(const std::string& name, const std::string& out_dir) {
    std::vector<std::string> names;
    if (name == "fig5")
        names = {"fig5_topology", "fig5_unstable"};
    else
        names = {name};

    int worst = kOk;
    for (const std::string& n : names) {
        cs::ClusterScenario scenario = cs::repro_scenario(n);  // throws on unknown name
        const fs::path dir = fs::path(out_dir) / n;
        fs::create_directories(dir);
        cs::save_scenario(scenario, dir / "scenario.json");

        // Audit with the gains the run will use. An unstabilizable plant gets
        // the nominal benchmark gains so the failure run is still integrable.
        cs::GainSet gains;
        bool stabilizable = cs::pbh_stabilizability_check(scenario.plant).is_stabilizable();
        if (stabilizable) {
            gains = synthesize_for(scenario);
        } else {
            cs::PlantModel nominal = cs::example_plant();
            gains = cs::synthesize_gain(nominal, scenario.gain_weight);
            log_info(n + ": plant not stabilizable; simulating with nominal-plant gains");
        }
        cs::save_gains(gains, dir / "gains.json");

        const cs::ConditionReport report = cs::audit_scenario(scenario, gains);
        {
            std::ofstream os(dir / "report.txt");
            os << report.to_text();
        }

        const cs::Trajectory traj = cs::simulate(scenario, gains, scenario.sim);
        {
            std::ofstream os(dir / "trajectory.csv");
            cs::write_trajectory_csv(os, traj, scenario.partition, false);
        }
        log_info(n + ": audit exit " + std::to_string(exit_code_of(report)) +
                 (traj.diverged ? ", simulation diverged" : ""));
        worst = std::max(worst, exit_code_of(report));
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster synchronization laboratory for switched pinned networks"};
    app.require_subcommand(1);

    std::string scenario_path, gains_path, out_path, out_dir, param, repro_name;
    std::vector<double> grid;
    bool json = false, full_state = false, epsilon_search = false;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;

    auto* analyze = app.add_subcommand("analyze", "audit a scenario against the conditions");
    analyze->add_option("scenario", scenario_path, "scenario file")->required();
    analyze->add_flag("--json", json, "machine-readable output");
    analyze->add_flag("--epsilon-search", epsilon_search, "bisect for the empirical epsilon bound");

    auto* synth = app.add_subcommand("synthesize-gains", "solve the Riccati design and write gains");
    synth->add_option("scenario", scenario_path, "scenario file")->required();
    synth->add_option("--out", out_path, "output gains file")->required();

    auto* sim = app.add_subcommand("simulate", "integrate the closed loop and write a CSV");
    sim->add_option("scenario", scenario_path, "scenario file")->required();
    sim->add_option("--gains", gains_path, "gains file (default: synthesize)");
    sim->add_option("--out", out_path, "output CSV")->required();
    sim->add_flag("--full-state", full_state, "include agent states in the CSV");
    sim->add_option("--epsilon", epsilon, "override the time-scale ratio");
    sim->add_option("--seed", seed, "override the random seed");

    auto* sweep = app.add_subcommand("sweep", "run a parameter grid and summarize");
    sweep->add_option("scenario", scenario_path, "scenario file")->required();
    sweep->add_option("--param", param, "epsilon or c")->required();
    sweep->add_option("--grid", grid, "grid values")->required()->delimiter(',');
    sweep->add_option("--out", out_path, "output CSV")->required();
    sweep->add_option("--seed", seed, "override the random seed");

    auto* repro = app.add_subcommand("repro-example", "materialize a named scenario and run it");
    repro->add_option("name", repro_name, "fig2|fig3|fig4|fig5|fig6")->required();
    repro->add_option("--out-dir", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return cmd_analyze(scenario_path, json, epsilon_search);
        if (*synth) return cmd_synthesize(scenario_path, out_path);
        if (*sim)
            return cmd_simulate(scenario_path, gains_path, out_path, full_state, epsilon, seed);
        if (*sweep) return cmd_sweep(scenario_path, param, grid, out_path, seed);
        if (*repro) return cmd_repro(repro_name, out_dir);
    } catch (const cs::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
