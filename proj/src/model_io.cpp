#include "epictrl/model_io.hpp"

#include <fstream>

namespace epictrl {

json graph_to_json(const StaticGraph& g) {
    json edges = json::array();
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    return json{{"n", g.node_count()}, {"edges", edges}};
}

StaticGraph graph_from_json(const json& j) {
    if (!j.contains("n") || !j.contains("edges"))
        throw Error("graph json: expected keys \"n\" and \"edges\"");
    std::vector<NodePair> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw Error("graph json: each edge must be a pair");
        edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return StaticGraph(j.at("n").get<int>(), std::move(edges));
}

json markov_to_json(const MarkovTemporalNet& net) {
    json configs = json::array();
    for (int l = 0; l < net.config_count(); ++l) configs.push_back(graph_to_json(net.config(l)));
    json rates = json::array();
    for (int k = 0; k < net.config_count(); ++k) {
        json row = json::array();
        for (int l = 0; l < net.config_count(); ++l)
            row.push_back(k == l ? 0.0 : net.rates()(k, l));
        rates.push_back(row);
    }
    return json{{"configs", configs}, {"rates", rates}};
}

MarkovTemporalNet markov_from_json(const json& j) {
    std::vector<StaticGraph> configs;
    for (const auto& c : j.at("configs")) configs.push_back(graph_from_json(c));
    const auto& jr = j.at("rates");
    const int l = static_cast<int>(configs.size());
    Eigen::MatrixXd rates(l, l);
    if (static_cast<int>(jr.size()) != l) throw Error("markov json: rates must be LxL");
    for (int k = 0; k < l; ++k) {
        if (static_cast<int>(jr.at(k).size()) != l) throw Error("markov json: rates must be LxL");
        for (int c = 0; c < l; ++c) rates(k, c) = jr.at(k).at(c).get<double>();
    }
    return MarkovTemporalNet(std::move(configs), std::move(rates));
}

json amei_to_json(const AmeiNet& net) {
    json pairs = json::array();
    for (const auto& [pair, ep] : net.processes()) {
        const int m = ep.state_count();
        // two-state shorthand when it matches the canonical two_state layout
        if (m == 2 && ep.active_states == std::vector<int>{0}) {
            pairs.push_back(json{{"i", pair.first},
                                 {"j", pair.second},
                                 {"p", ep.generator(1, 0)},
                                 {"q", ep.generator(0, 1)}});
            continue;
        }
        json q = json::array();
        for (int r = 0; r < m; ++r) {
            json row = json::array();
            for (int c = 0; c < m; ++c) row.push_back(ep.generator(r, c));
            q.push_back(row);
        }
        pairs.push_back(json{{"i", pair.first},
                             {"j", pair.second},
                             {"M", m},
                             {"Q", q},
                             {"active", ep.active_states}});
    }
    return json{{"n", net.node_count()}, {"pairs", pairs}};
}

AmeiNet amei_from_json(const json& j) {
    AmeiNet net(j.at("n").get<int>());
    for (const auto& pj : j.at("pairs")) {
        const int i = pj.at("i").get<int>();
        const int jj = pj.at("j").get<int>();
        if (pj.contains("p")) {
            net.set_process(i, jj,
                            EdgeProcess::two_state(pj.at("p").get<double>(),
                                                   pj.at("q").get<double>()));
            continue;
        }
        const int m = pj.at("M").get<int>();
        Eigen::MatrixXd q(m, m);
        const auto& jq = pj.at("Q");
        if (static_cast<int>(jq.size()) != m) throw Error("amei json: Q must be MxM");
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) q(r, c) = jq.at(r).at(c).get<double>();
        net.set_process(i, jj, EdgeProcess(std::move(q), pj.at("active").get<std::vector<int>>()));
    }
    return net;
}

json asis_to_json(const AsisModel& m) {
    json psi = json::array();
    for (const auto& [pair, rate] : m.psi)
        psi.push_back(json{{"i", pair.first}, {"j", pair.second}, {"rate", rate}});
    return json{{"g0", graph_to_json(m.g0)},
                {"phi", std::vector<double>(m.phi.data(), m.phi.data() + m.phi.size())},
                {"psi", psi}};
}

AsisModel asis_from_json(const json& j) {
    StaticGraph g0 = graph_from_json(j.at("g0"));
    const auto phi_v = j.at("phi").get<std::vector<double>>();
    Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(phi_v.data(), phi_v.size());
    std::map<NodePair, double> psi;
    for (const auto& pj : j.at("psi")) {
        int a = pj.at("i").get<int>(), b = pj.at("j").get<int>();
        if (a > b) std::swap(a, b);
        psi[NodePair{a, b}] = pj.at("rate").get<double>();
    }
    return AsisModel(std::move(g0), std::move(phi), std::move(psi));
}

ModelKind detect_model_kind(const json& j) {
    if (j.contains("configs")) return ModelKind::Markov;
    if (j.contains("pairs")) return ModelKind::Amei;
    if (j.contains("g0")) return ModelKind::Asis;
    if (j.contains("edges")) return ModelKind::Static;
    throw Error("unrecognized model file: expected configs/pairs/g0/edges");
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

const char* status_name(GpSolution::Status s) {
    switch (s) {
        case GpSolution::Status::Optimal: return "optimal";
        case GpSolution::Status::Infeasible: return "infeasible";
        default: return "max-iterations";
    }
}

} // namespace

json allocation_to_json(const AllocationResult& r) {
    json rates;
    if (r.phi_star.size() > 0) {
        rates = json{{"beta", nullptr}, {"delta", nullptr}, {"phi", vector_to_json(r.phi_star)}};
    } else {
        rates = json{{"beta", vector_to_json(r.beta_star)},
                     {"delta", vector_to_json(r.delta_star)},
                     {"phi", nullptr}};
    }
    return json{{"lambda_star", r.lambda_star},
                {"rates", rates},
                {"spend", vector_to_json(r.spend)},
                {"total_spend", r.total_spend},
                {"status", status_name(r.solver.status)},
                {"kkt_residual", r.solver.kkt_residual},
                {"newton_iterations", r.solver.newton_iterations}};
}

namespace {

json posynomial_to_json(const GpProblem& gp, const Posynomial& p) {
    json terms = json::array();
    for (const auto& t : p.terms) {
        json exps = json::object();
        for (const auto& [v, a] : t.exponents)
            if (a != 0.0) exps[gp.variable_name(v)] = a;
        terms.push_back(json{{"coeff", t.coeff}, {"exponents", exps}});
    }
    return terms;
}

} // namespace

json gp_to_json(const GpProblem& gp) {
    json vars = json::array();
    for (int v = 0; v < gp.variable_count(); ++v) vars.push_back(gp.variable_name(v));
    json ineqs = json::array();
    for (const auto& p : gp.ineqs()) ineqs.push_back(posynomial_to_json(gp, p));
    json eqs = json::array();
    for (const auto& m : gp.eqs()) eqs.push_back(posynomial_to_json(gp, Posynomial{m}).at(0));
    return json{{"variables", vars},
                {"objective", posynomial_to_json(gp, gp.objective())},
                {"constraints", ineqs},
                {"equalities", eqs}};
}

GpProblem gp_from_json(const json& j) {
    GpProblem gp;
    std::map<std::string, VarId> ids;
    for (const auto& name : j.at("variables"))
        ids[name.get<std::string>()] = gp.add_variable(name.get<std::string>());

    const auto parse_mono = [&](const json& t) {
        std::map<VarId, double> exps;
        for (const auto& [name, a] : t.at("exponents").items()) {
            const auto it = ids.find(name);
            if (it == ids.end()) throw Error("gp json: unknown variable " + name);
            exps[it->second] = a.get<double>();
        }
        return Monomial(t.at("coeff").get<double>(), std::move(exps));
    };
    const auto parse_posy = [&](const json& arr) {
        Posynomial p;
        for (const auto& t : arr) p += parse_mono(t);
        return p;
    };

    gp.set_objective(parse_posy(j.at("objective")));
    for (const auto& c : j.at("constraints")) gp.add_ineq(parse_posy(c));
    if (j.contains("equalities"))
        for (const auto& e : j.at("equalities")) gp.add_eq(parse_mono(e));
    return gp;
}

json gp_solution_to_json(const GpProblem& gp, const GpSolution& s) {
    json values = json::object();
    for (int v = 0; v < gp.variable_count(); ++v)
        if (v < static_cast<int>(s.values.size())) values[gp.variable_name(v)] = s.values[v];
    return json{{"status", status_name(s.status)},
                {"objective_value", s.objective_value},
                {"values", values},
                {"kkt_residual", s.kkt_residual},
                {"max_violation", s.max_violation},
                {"newton_iterations", s.newton_iterations}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

} // namespace epictrl
