#include "clustersync/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace clustersync {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ScenarioError(path + ": " + what);
}

const Json& member(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing field");
    return *it;
}

double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

Matrix parse_matrix(const Json& j, const std::string& path, int rows = -1, int cols = -1) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    const int r = static_cast<int>(j.size());
    if (rows >= 0 && r != rows)
        fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(r));
    if (!j[0].is_array()) fail(path + "[0]", "expected an array");
    const int c = static_cast<int>(j[0].size());
    if (cols >= 0 && c != cols)
        fail(path + "[0]", "expected " + std::to_string(cols) + " entries, got " +
                               std::to_string(c));
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array()) fail(rp, "expected an array");
        if (static_cast<int>(j[i].size()) != c)
            fail(rp, "expected " + std::to_string(c) + " entries, got " +
                         std::to_string(j[i].size()));
        for (int k = 0; k < c; ++k) m(i, k) = as_number(j[i][k], rp + "[" + std::to_string(k) + "]");
    }
    return m;
}

Vector parse_vector(const Json& j, const std::string& path, int size = -1) {
    if (!j.is_array()) fail(path, "expected an array");
    if (size >= 0 && static_cast<int>(j.size()) != size)
        fail(path, "expected " + std::to_string(size) + " entries, got " +
                       std::to_string(j.size()));
    Vector v(j.size());
    for (size_t k = 0; k < j.size(); ++k)
        v(static_cast<Eigen::Index>(k)) = as_number(j[k], path + "[" + std::to_string(k) + "]");
    return v;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

// Rounds to 12 significant digits through the decimal representation, so
// serialized gains are stable under write -> read -> write.
double round12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.11e", x);
    return std::strtod(buf, nullptr);
}

Json matrix_to_json_12(const Matrix& m) {
    Matrix r = m.unaryExpr([](double x) { return round12(x); });
    return matrix_to_json(r);
}

Json vector_to_json_12(const Vector& v) {
    Vector r = v.unaryExpr([](double x) { return round12(x); });
    return vector_to_json(r);
}

}  // namespace

void ClusterScenario::validate() const {
    const int n_nodes = partition.node_count();
    const int n = plant.state_dim();
    if (gain_weight.rows() != n || gain_weight.cols() != n)
        throw ScenarioError("plant.gain_weight: expected a " + std::to_string(n) + " x " +
                            std::to_string(n) + " matrix");
    if (graphs.empty()) throw ScenarioError("graphs: need at least one graph");
    for (size_t g = 0; g < graphs.size(); ++g) {
        if (graphs[g].node_count() != n_nodes)
            throw ScenarioError("graphs." + graph_names[g] + ".adjacency: expected " +
                                std::to_string(n_nodes) + " nodes");
    }
    for (int k = 0; k < signal.phase_count(); ++k) {
        const Phase& ph = signal.phase(k);
        const std::string path = "switching.phases[" + std::to_string(k) + "]";
        if (ph.graph_id < 0 || ph.graph_id >= static_cast<int>(graphs.size()))
            throw ScenarioError(path + ".graph: unresolved graph reference");
        if (ph.pinning.size() != n_nodes)
            throw ScenarioError(path + ".pinning: expected " + std::to_string(n_nodes) +
                                " entries");
    }
    if (coupling.cluster_gains.size() != partition.cluster_count())
        throw ScenarioError("coupling.cluster_gains: expected one gain per cluster");
    if ((coupling.cluster_gains.array() <= 0.0).any())
        throw ScenarioError("coupling.cluster_gains: gains must be positive");
    for (size_t k = 0; k < coupling.overrides.size(); ++k) {
        const EdgeOverride& ov = coupling.overrides[k];
        if (ov.to < 0 || ov.to >= n_nodes || ov.from < 0 || ov.from >= n_nodes)
            throw ScenarioError("coupling.overrides[" + std::to_string(k) +
                                "]: node index out of range");
    }
    if (static_cast<int>(leaders.size()) != partition.cluster_count())
        throw ScenarioError("leaders: expected one initial state per cluster");
    for (size_t l = 0; l < leaders.size(); ++l)
        if (leaders[l].size() != n)
            throw ScenarioError("leaders[" + std::to_string(l) + "]: expected " +
                                std::to_string(n) + " entries");
    for (const auto& [edge, bp] : trust.edges()) {
        (void)bp;
        if (edge.first < 0 || edge.first >= n_nodes || edge.second < 0 ||
            edge.second >= n_nodes)
            throw ScenarioError("trust: node index out of range");
    }
    if (!(sim.dt > 0.0)) throw ScenarioError("sim.dt: must be positive");
    if (sim.horizon < sim.dt) throw ScenarioError("sim.horizon: must be at least dt");
    if (sim.record_stride < 1) throw ScenarioError("sim.record_stride: must be >= 1");
    if (!(sim.init_range[0] < sim.init_range[1]))
        throw ScenarioError("sim.init_range: lower bound must be below upper bound");
    if (std::abs(sim.epsilon - signal.epsilon()) >
        1e-12 * std::max(1.0, std::abs(signal.epsilon())))
        throw ScenarioError("sim.epsilon: must match switching.epsilon");
    const double max_dt = signal.epsilon() * signal.min_dwell() / 4.0;
    if (sim.dt > max_dt * (1.0 + 1e-12))
        throw ScenarioError("sim.dt: exceeds (epsilon * min dwell) / 4 = " +
                            std::to_string(max_dt));
}

AverageResult ClusterScenario::average(int samples) const {
    return average_laplacian(signal, graphs, sim.horizon, samples, partition, trust);
}

ClusterScenario parse_scenario(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
    }

    const Json& jplant = member(j, "plant", "scenario");
    Matrix a = parse_matrix(member(jplant, "A", "plant"), "plant.A");
    if (a.rows() != a.cols()) fail("plant.A", "must be square");
    const int n = static_cast<int>(a.rows());
    Matrix b = parse_matrix(member(jplant, "B", "plant"), "plant.B", n);
    PlantModel plant(std::move(a), std::move(b));

    Matrix weight = Matrix::Identity(n, n);
    if (jplant.contains("gain_weight"))
        weight = parse_matrix(jplant["gain_weight"], "plant.gain_weight", n, n);

    const Json& jpart = member(j, "partition", "scenario");
    if (!jpart.is_array() || jpart.empty()) fail("partition", "expected a non-empty array");
    std::vector<std::vector<int>> clusters;
    int n_nodes = 0;
    for (size_t l = 0; l < jpart.size(); ++l) {
        const std::string path = "partition[" + std::to_string(l) + "]";
        if (!jpart[l].is_array()) fail(path, "expected an array of 1-based node ids");
        std::vector<int> nodes;
        for (size_t k = 0; k < jpart[l].size(); ++k) {
            const int id = as_int(jpart[l][k], path + "[" + std::to_string(k) + "]");
            if (id < 1) fail(path + "[" + std::to_string(k) + "]", "node ids are 1-based");
            nodes.push_back(id - 1);
            n_nodes = std::max(n_nodes, id);
        }
        clusters.push_back(std::move(nodes));
    }
    ClusterPartition partition(n_nodes, std::move(clusters));

    const Json& jgraphs = member(j, "graphs", "scenario");
    if (!jgraphs.is_object() || jgraphs.empty()) fail("graphs", "expected a non-empty object");
    std::vector<std::string> graph_names;
    std::vector<WeightedDigraph> graphs;
    std::vector<Vector> graph_pinning;
    for (auto it = jgraphs.begin(); it != jgraphs.end(); ++it) {
        const std::string path = "graphs." + it.key();
        Matrix adj = parse_matrix(member(*it, "adjacency", path), path + ".adjacency", n_nodes,
                                  n_nodes);
        Vector pin = Vector::Zero(n_nodes);
        if (it->contains("pinning")) pin = parse_vector((*it)["pinning"], path + ".pinning", n_nodes);
        if ((pin.array() < 0.0).any()) fail(path + ".pinning", "pinning gains must be >= 0");
        try {
            graphs.emplace_back(std::move(adj), partition);
        } catch (const std::invalid_argument& e) {
            fail(path + ".adjacency", e.what());
        }
        graph_names.push_back(it.key());
        graph_pinning.push_back(std::move(pin));
    }

    const Json& jsw = member(j, "switching", "scenario");
    const double epsilon = as_number(member(jsw, "epsilon", "switching"), "switching.epsilon");
    const bool cyclic = jsw.contains("cyclic") ? jsw["cyclic"].get<bool>() : true;
    const Json& jphases = member(jsw, "phases", "switching");
    if (!jphases.is_array() || jphases.empty())
        fail("switching.phases", "expected a non-empty array");
    std::vector<Phase> phases;
    for (size_t k = 0; k < jphases.size(); ++k) {
        const std::string path = "switching.phases[" + std::to_string(k) + "]";
        const Json& jp = jphases[k];
        const std::string gname = member(jp, "graph", path).get<std::string>();
        int gid = -1;
        for (size_t g = 0; g < graph_names.size(); ++g)
            if (graph_names[g] == gname) gid = static_cast<int>(g);
        if (gid < 0) fail(path + ".graph", "unknown graph '" + gname + "'");
        Phase phase;
        phase.graph_id = gid;
        phase.dwell = as_number(member(jp, "dwell", path), path + ".dwell");
        phase.pinning = graph_pinning[gid];
        phases.push_back(std::move(phase));
    }
    SwitchingSignal signal(std::move(phases), cyclic, epsilon);

    TrustSchedule trust;
    if (j.contains("trust")) {
        const Json& jt = j["trust"];
        if (!jt.is_array()) fail("trust", "expected an array of edge schedules");
        for (size_t k = 0; k < jt.size(); ++k) {
            const std::string path = "trust[" + std::to_string(k) + "]";
            const int to = as_int(member(jt[k], "to", path), path + ".to") - 1;
            const int from = as_int(member(jt[k], "from", path), path + ".from") - 1;
            const Json& jbp = member(jt[k], "breakpoints", path);
            if (!jbp.is_array() || jbp.empty())
                fail(path + ".breakpoints", "expected a non-empty array of [t, value] pairs");
            std::vector<std::pair<double, double>> bp;
            for (size_t m = 0; m < jbp.size(); ++m) {
                const std::string bpath = path + ".breakpoints[" + std::to_string(m) + "]";
                if (!jbp[m].is_array() || jbp[m].size() != 2)
                    fail(bpath, "expected a [time, value] pair");
                bp.emplace_back(as_number(jbp[m][0], bpath + "[0]"),
                                as_number(jbp[m][1], bpath + "[1]"));
            }
            try {
                trust.set_edge(to, from, std::move(bp));
            } catch (const std::invalid_argument& e) {
                fail(path, e.what());
            }
        }
    }

    const Json& jcoup = member(j, "coupling", "scenario");
    CouplingConfig coupling;
    coupling.cluster_gains = parse_vector(member(jcoup, "cluster_gains", "coupling"),
                                          "coupling.cluster_gains", partition.cluster_count());
    if (jcoup.contains("overrides")) {
        const Json& jov = jcoup["overrides"];
        if (!jov.is_array()) fail("coupling.overrides", "expected an array");
        for (size_t k = 0; k < jov.size(); ++k) {
            const std::string path = "coupling.overrides[" + std::to_string(k) + "]";
            EdgeOverride ov;
            ov.to = as_int(member(jov[k], "to", path), path + ".to") - 1;
            ov.from = as_int(member(jov[k], "from", path), path + ".from") - 1;
            ov.gain = as_number(member(jov[k], "gain", path), path + ".gain");
            coupling.overrides.push_back(ov);
        }
    }

    const Json& jleaders = member(j, "leaders", "scenario");
    if (!jleaders.is_array()) fail("leaders", "expected an array");
    std::vector<Vector> leaders;
    for (size_t l = 0; l < jleaders.size(); ++l)
        leaders.push_back(
            parse_vector(jleaders[l], "leaders[" + std::to_string(l) + "]", n));

    const Json& jsim = member(j, "sim", "scenario");
    SimConfig sim;
    sim.dt = as_number(member(jsim, "dt", "sim"), "sim.dt");
    sim.horizon = as_number(member(jsim, "horizon", "sim"), "sim.horizon");
    sim.epsilon = epsilon;
    if (jsim.contains("seed")) sim.seed = jsim["seed"].get<std::uint64_t>();
    if (jsim.contains("init_range")) {
        Vector r = parse_vector(jsim["init_range"], "sim.init_range", 2);
        sim.init_range = {r(0), r(1)};
    }
    if (jsim.contains("record_stride"))
        sim.record_stride = as_int(jsim["record_stride"], "sim.record_stride");

    ClusterScenario scenario{
        j.contains("name") ? j["name"].get<std::string>() : "scenario",
        std::move(plant),
        std::move(weight),
        std::move(partition),
        std::move(graph_names),
        std::move(graphs),
        std::move(signal),
        std::move(trust),
        std::move(coupling),
        std::move(leaders),
        sim};
    scenario.validate();
    return scenario;
}

ClusterScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const ClusterScenario& s) {
    Json j;
    j["name"] = s.name;
    j["plant"]["A"] = matrix_to_json(s.plant.A);
    j["plant"]["B"] = matrix_to_json(s.plant.B);
    if (!s.gain_weight.isIdentity(0.0)) j["plant"]["gain_weight"] = matrix_to_json(s.gain_weight);

    Json jpart = Json::array();
    for (const auto& cluster : s.partition.clusters()) {
        Json c = Json::array();
        for (int node : cluster) c.push_back(node + 1);
        jpart.push_back(std::move(c));
    }
    j["partition"] = std::move(jpart);

    Json jgraphs = Json::object();
    for (size_t g = 0; g < s.graphs.size(); ++g) {
        Json jg;
        jg["adjacency"] = matrix_to_json(s.graphs[g].adjacency());
        // pinning lives on phases; emit the vector attached to this graph's
        // first phase use (graphs and pinning are paired in the schema)
        Vector pin = Vector::Zero(s.node_count());
        for (const Phase& ph : s.signal.phases())
            if (ph.graph_id == static_cast<int>(g)) {
                pin = ph.pinning;
                break;
            }
        jg["pinning"] = vector_to_json(pin);
        jgraphs[s.graph_names[g]] = std::move(jg);
    }
    j["graphs"] = std::move(jgraphs);

    j["switching"]["epsilon"] = s.signal.epsilon();
    j["switching"]["cyclic"] = s.signal.cyclic();
    Json jphases = Json::array();
    for (const Phase& ph : s.signal.phases()) {
        Json jp;
        jp["graph"] = s.graph_names[ph.graph_id];
        jp["dwell"] = ph.dwell;
        jphases.push_back(std::move(jp));
    }
    j["switching"]["phases"] = std::move(jphases);

    if (!s.trust.empty()) {
        Json jt = Json::array();
        for (const auto& [edge, bp] : s.trust.edges()) {
            Json je;
            je["to"] = edge.first + 1;
            je["from"] = edge.second + 1;
            Json jbp = Json::array();
            for (const auto& [t, v] : bp) jbp.push_back(Json::array({t, v}));
            je["breakpoints"] = std::move(jbp);
            jt.push_back(std::move(je));
        }
        j["trust"] = std::move(jt);
    }

    j["coupling"]["cluster_gains"] = vector_to_json(s.coupling.cluster_gains);
    if (!s.coupling.overrides.empty()) {
        Json jov = Json::array();
        for (const EdgeOverride& ov : s.coupling.overrides)
            jov.push_back(Json{{"to", ov.to + 1}, {"from", ov.from + 1}, {"gain", ov.gain}});
        j["coupling"]["overrides"] = std::move(jov);
    }

    Json jleaders = Json::array();
    for (const Vector& l : s.leaders) jleaders.push_back(vector_to_json(l));
    j["leaders"] = std::move(jleaders);

    j["sim"]["dt"] = s.sim.dt;
    j["sim"]["horizon"] = s.sim.horizon;
    j["sim"]["seed"] = s.sim.seed;
    j["sim"]["init_range"] = Json::array({s.sim.init_range[0], s.sim.init_range[1]});
    j["sim"]["record_stride"] = s.sim.record_stride;
    return j.dump(2) + "\n";
}

void save_scenario(const ClusterScenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("scenario: cannot write '" + path.string() + "'");
    out << serialize_scenario(scenario);
}

std::string serialize_gains(const GainSet& gains) {
    Json j;
    j["P"] = matrix_to_json_12(gains.P);
    j["K"] = matrix_to_json_12(gains.K);
    j["xi"] = round12(gains.xi);
    if (gains.xi_diag.size() > 0) j["Xi"] = vector_to_json_12(gains.xi_diag);
    if (gains.thresholds.size() > 0) j["thresholds"] = vector_to_json_12(gains.thresholds);
    j["are_residual"] = round12(gains.are_residual);
    j["remark_residual"] = round12(gains.remark_residual);
    j["closed_loop_abscissa"] = round12(gains.closed_loop_abscissa);
    return j.dump(2) + "\n";
}

GainSet parse_gains(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(std::string("gains: invalid JSON: ") + e.what());
    }
    GainSet gains;
    gains.P = parse_matrix(member(j, "P", "gains"), "gains.P");
    gains.K = parse_matrix(member(j, "K", "gains"), "gains.K");
    gains.xi = as_number(member(j, "xi", "gains"), "gains.xi");
    if (j.contains("Xi")) gains.xi_diag = parse_vector(j["Xi"], "gains.Xi");
    if (j.contains("thresholds")) gains.thresholds = parse_vector(j["thresholds"], "gains.thresholds");
    if (j.contains("are_residual")) gains.are_residual = j["are_residual"].get<double>();
    if (j.contains("remark_residual")) gains.remark_residual = j["remark_residual"].get<double>();
    if (j.contains("closed_loop_abscissa"))
        gains.closed_loop_abscissa = j["closed_loop_abscissa"].get<double>();
    return gains;
}

GainSet load_gains(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("gains: cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_gains(ss.str());
}

void save_gains(const GainSet& gains, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("gains: cannot write '" + path.string() + "'");
    out << serialize_gains(gains);
}

}  // namespace clustersync
