// epictrl: spectral extinction analysis, budgeted rate allocation, and exact
// stochastic simulation for SIS epidemics on temporal and adaptive networks.
#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "epictrl/allocation.hpp"
#include "epictrl/csvfmt.hpp"
#include "epictrl/model_io.hpp"
#include "epictrl/simulate.hpp"
#include "epictrl/spectral.hpp"
#include "epictrl/svg.hpp"
#include "epictrl/validate.hpp"

namespace {

using namespace epictrl;

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 success, 2 usage, 3 infeasible, 4 resource cap
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitCap = 4;

struct ManifestWriter {
    std::string command;
    json inputs = json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;

    void write(const std::string& base) const {
        const json m{{"command", command},
                     {"inputs", inputs},
                     {"seed", seed},
                     {"tool_version", kVersion},
                     {"outputs", outputs}};
        write_text_file(base + ".manifest.json", m.dump(2) + "\n");
    }
};

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

struct GridSpec {
    double lo = 0, hi = 0, step = 0;
    std::vector<double> values() const {
        std::vector<double> v;
        for (double x = lo; x <= hi + 1e-12 * std::max(1.0, std::abs(hi)); x += step)
            v.push_back(x);
        return v;
    }
};

GridSpec parse_grid(const std::string& s) {
    GridSpec g;
    char colon1, colon2;
    std::istringstream in(s);
    if (!(in >> g.lo >> colon1 >> g.hi >> colon2 >> g.step) || colon1 != ':' ||
        colon2 != ':' || g.step <= 0)
        throw CLI::ValidationError("grid", "expected lo:hi:step with step > 0: " + s);
    return g;
}

std::string strip_ext(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

// deterministic circle layout for graphs without bundled coordinates
std::vector<std::array<double, 2>> layout_for(const StaticGraph& g) {
    if (g.node_count() == 34) {
        const auto& fixed = karate_layout();
        return {fixed.begin(), fixed.end()};
    }
    std::vector<std::array<double, 2>> pts(g.node_count());
    for (int i = 0; i < g.node_count(); ++i) {
        const double a = 2.0 * M_PI * i / g.node_count();
        pts[i] = {0.5 + 0.45 * std::cos(a), 0.5 + 0.45 * std::sin(a)};
    }
    return pts;
}

struct LoadedModel {
    ModelKind kind;
    std::optional<StaticGraph> graph;
    std::optional<MarkovTemporalNet> markov;
    std::optional<AmeiNet> amei;
    std::optional<AsisModel> asis;

    int node_count() const {
        switch (kind) {
            case ModelKind::Static: return graph->node_count();
            case ModelKind::Markov: return markov->node_count();
            case ModelKind::Amei: return amei->node_count();
            default: return asis->g0.node_count();
        }
    }
};

LoadedModel load_model(const std::string& path) {
    const json j = load_json_file(path);
    LoadedModel m{detect_model_kind(j), {}, {}, {}, {}};
    switch (m.kind) {
        case ModelKind::Static: m.graph = graph_from_json(j); break;
        case ModelKind::Markov: m.markov = markov_from_json(j); break;
        case ModelKind::Amei: m.amei = amei_from_json(j); break;
        case ModelKind::Asis: m.asis = asis_from_json(j); break;
    }
    return m;
}

// ---- net build --------------------------------------------------------------

int cmd_net_build(const std::string& kind, double p1, double q1, double p2, double q2,
                  double p3, double q3, double phi, double psi, const std::string& out,
                  ManifestWriter manifest) {
    json model;
    if (kind == "markov-karate") {
        model = markov_to_json(markov_karate(p1, q1, p2, q2, p3, q3));
    } else if (kind == "amei-karate") {
        model = amei_to_json(amei_karate(p1, q1, p2, q2, p3, q3));
    } else if (kind == "asis-karate") {
        if (!(phi > 0) || !(psi > 0)) throw Error("asis-karate: --phi and --psi must be positive");
        model = asis_to_json(AsisModel::homogeneous(karate(), phi, psi));
    } else {
        throw CLI::ValidationError("kind", "unknown network kind: " + kind);
    }
    write_text_file(out, model.dump(2) + "\n");

    const StaticGraph g = karate();
    const Partition part = spectral_bisection(g);
    const EdgeClassification ec = classify_edges(g, part);
    const json report{{"clusters", part.cluster_of},
                      {"edge_class_sizes",
                       {{"within_cluster_1", ec.count_class(1)},
                        {"within_cluster_2", ec.count_class(2)},
                        {"between_clusters", ec.count_class(3)}}}};
    const std::string report_path = strip_ext(out) + ".report.json";
    write_text_file(report_path, report.dump(2) + "\n");

    manifest.outputs = {out, report_path};
    manifest.write(strip_ext(out));
    return 0;
}

// ---- threshold -----------------------------------------------------------------

int cmd_threshold(const std::string& model_path, const std::string& grid_s, double tol,
                  double beta_hi, const std::string& out, const std::string& svg_path,
                  ManifestWriter manifest) {
    const LoadedModel m = load_model(model_path);
    const GridSpec grid = parse_grid(grid_s);
    const int n = m.node_count();

    const auto evaluator_for = [&](double delta) {
        return std::function<double(double)>([&m, n, delta](double beta) {
            const EpidemicParams ep = EpidemicParams::homogeneous(n, beta, delta);
            switch (m.kind) {
                case ModelKind::Static:
                    return lambda_max(build_static(*m.graph, ep), 1e-9);
                case ModelKind::Markov:
                    return lambda_max(build_A1(*m.markov, ep), 1e-9);
                case ModelKind::Amei: {
                    const AmeiMargin mg = amei_margin(*m.amei, ep);
                    const double lam = lambda_max(build_A2(*m.amei, ep), 1e-9);
                    if (mg.kind == AmeiMargin::Kind::NoMargin) return 1.0; // not certifiable
                    return lam - mg.tau; // certified extinction needs lam < tau
                }
                default:
                    return lambda_max(build_A3(*m.asis, ep), 1e-9);
            }
        });
    };

    ThresholdCurve curve;
    std::ostringstream csv;
    csv << "delta,beta_c\n";
    for (double delta : grid.values()) {
        double bc = std::numeric_limits<double>::quiet_NaN();
        try {
            bc = threshold_beta(evaluator_for(delta), 0.0, 1e-6, beta_hi, tol);
        } catch (const Error& e) {
            std::cerr << "warning: delta=" << delta << ": " << e.what() << "\n";
        }
        curve.points.emplace_back(delta, bc);
        csv << csv_double(delta) << "," << csv_double(bc) << "\n";
    }
    write_text_file(out, csv.str());
    manifest.outputs = {out};
    if (!svg_path.empty()) {
        write_text_file(svg_path, svg_line_plot(curve.points, "delta", "beta_c"));
        manifest.outputs.push_back(svg_path);
    }
    manifest.write(strip_ext(out));
    return 0;
}

// ---- optimize -------------------------------------------------------------------

int cmd_optimize(const std::string& model_path, double budget, double cost_q, double cost_r,
                 double cost_s, double delta_lower, double beta_lower_frac,
                 double delta_upper_frac, double beta_upper, double delta_hat_mult,
                 double phi_lower, double phi_upper, double phi_hat_mult, double fixed_beta,
                 double fixed_delta, double feas_tol, double opt_tol, const std::string& out,
                 ManifestWriter manifest) {
    const LoadedModel m = load_model(model_path);
    const int n = m.node_count();
    const GpTols tols{feas_tol, opt_tol};

    AllocationResult res;
    const StaticGraph* map_graph = nullptr;
    StaticGraph karate_g = karate();

    if (m.kind == ModelKind::Markov || m.kind == ModelKind::Amei) {
        if (beta_upper <= 0) {
            // natural infection rate: the model's own stability threshold at
            // the natural recovery rate
            const auto eval = [&](double beta) {
                const EpidemicParams ep = EpidemicParams::homogeneous(n, beta, delta_lower);
                return m.kind == ModelKind::Markov
                           ? lambda_max(build_A1(*m.markov, ep), 1e-9)
                           : lambda_max(build_A2(*m.amei, ep), 1e-9);
            };
            beta_upper = threshold_beta(eval, 0.0, 1e-6, 10.0, 1e-9);
        }
        const double delta_upper = delta_upper_frac * delta_lower;
        const CostModel f = CostModel::normalize(CostKind::InfectionF, cost_q, 0,
                                                 beta_lower_frac * beta_upper, beta_upper);
        const CostModel g = CostModel::normalize(CostKind::RecoveryG, cost_r,
                                                 delta_hat_mult * delta_upper, delta_lower,
                                                 delta_upper);
        res = (m.kind == ModelKind::Markov) ? optimize_markov(*m.markov, f, g, budget, tols)
                                            : optimize_amei(*m.amei, f, g, budget, tols);
        manifest.inputs["beta_upper"] = beta_upper;
    } else if (m.kind == ModelKind::Asis) {
        const CostModel h = CostModel::normalize(CostKind::CuttingH, cost_s,
                                                 phi_hat_mult * phi_upper, phi_lower,
                                                 phi_upper);
        const EpidemicParams ep = EpidemicParams::homogeneous(n, fixed_beta, fixed_delta);
        res = optimize_asis(*m.asis, ep, h, budget, tols);
        map_graph = &m.asis->g0;
    } else {
        throw Error("optimize: static graphs have no temporal allocation problem; build a model first");
    }

    const std::string json_path = out + ".json";
    write_text_file(json_path, allocation_to_json(res).dump(2) + "\n");

    std::ostringstream csv;
    csv << "node,spend";
    const bool has_rates = res.beta_star.size() > 0;
    csv << (has_rates ? ",beta,delta" : ",phi") << "\n";
    for (int i = 0; i < n; ++i) {
        csv << i << "," << csv_double(res.spend(i));
        if (has_rates)
            csv << "," << csv_double(res.beta_star(i)) << "," << csv_double(res.delta_star(i));
        else
            csv << "," << csv_double(res.phi_star(i));
        csv << "\n";
    }
    const std::string csv_path = out + ".csv";
    write_text_file(csv_path, csv.str());

    const StaticGraph& gmap = map_graph ? *map_graph : karate_g;
    std::string svg_path;
    if (gmap.node_count() == n) {
        svg_path = out + ".svg";
        write_text_file(svg_path, svg_network_map(gmap, layout_for(gmap), res.spend));
    }

    manifest.outputs = {json_path, csv_path};
    if (!svg_path.empty()) manifest.outputs.push_back(svg_path);
    manifest.write(out);
    return 0;
}

// ---- simulate -------------------------------------------------------------------

struct SweepSpec {
    std::optional<GridSpec> beta, phi;
};

SweepSpec parse_sweep(const std::string& s) {
    SweepSpec sw;
    std::istringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("sweep", "expected name=lo:hi:step");
        const std::string name = part.substr(0, eq);
        const GridSpec g = parse_grid(part.substr(eq + 1));
        if (name == "beta")
            sw.beta = g;
        else if (name == "phi")
            sw.phi = g;
        else
            throw CLI::ValidationError("sweep", "unknown sweep variable: " + name);
    }
    return sw;
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Recovery: return "recovery";
        case EventKind::Infection: return "infection";
        case EventKind::NetworkSwitch: return "network-switch";
        case EventKind::PairTransition: return "pair-transition";
        case EventKind::EdgeCut: return "edge-cut";
        default: return "edge-restore";
    }
}

int cmd_simulate(const std::string& model_path, int runs, double horizon,
                 std::uint64_t seed, double beta, double delta, const std::string& sweep_s,
                 double burn_in, double sample_dt, const std::string& x0_mode,
                 bool with_events, const std::string& out, ManifestWriter manifest) {
    const LoadedModel m = load_model(model_path);
    const int n = m.node_count();

    SimConfig cfg;
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.sample_dt = sample_dt;
    if (x0_mode == "all")
        cfg.x0.assign(n, 1);
    else if (x0_mode == "none")
        cfg.x0.assign(n, 0);
    else if (x0_mode == "first") {
        cfg.x0.assign(n, 0);
        cfg.x0[0] = 1;
    } else {
        throw CLI::ValidationError("x0", "expected all, none, or first");
    }

    if (sweep_s.empty()) {
        // single-run trajectory
        const EpidemicParams ep = EpidemicParams::homogeneous(n, beta, delta);
        Trajectory tr;
        switch (m.kind) {
            case ModelKind::Static: {
                Eigen::MatrixXd none = Eigen::MatrixXd::Zero(1, 1);
                MarkovTemporalNet as_markov({*m.graph}, none);
                tr = gillespie_markov(as_markov, ep, cfg);
                break;
            }
            case ModelKind::Markov: tr = gillespie_markov(*m.markov, ep, cfg); break;
            case ModelKind::Amei: tr = gillespie_amei(*m.amei, ep, cfg); break;
            default: tr = gillespie_asis(*m.asis, ep, cfg); break;
        }
        std::ostringstream csv;
        csv << "time,prevalence\n";
        for (std::size_t k = 0; k < tr.sampled.size(); ++k)
            csv << csv_double(k * tr.sample_dt) << "," << csv_double(tr.sampled[k]) << "\n";
        write_text_file(out, csv.str());
        manifest.outputs = {out};
        if (with_events) {
            std::ostringstream jsonl;
            for (const auto& e : tr.events) {
                jsonl << json{{"t", e.time},
                              {"kind", event_kind_name(e.kind)},
                              {"a", e.a},
                              {"b", e.b},
                              {"c", e.c}}
                             .dump()
                      << "\n";
            }
            const std::string events_path = strip_ext(out) + ".events.jsonl";
            write_text_file(events_path, jsonl.str());
            manifest.outputs.push_back(events_path);
        }
        manifest.write(strip_ext(out));
        return 0;
    }

    // metastable sweep
    const SweepSpec sw = parse_sweep(sweep_s);
    if (sw.phi && m.kind != ModelKind::Asis)
        throw CLI::ValidationError("sweep", "phi sweeps need an adaptive model");
    std::vector<double> betas = sw.beta ? sw.beta->values() : std::vector<double>{beta};
    std::vector<double> phis;
    if (m.kind == ModelKind::Asis && sw.phi)
        phis = sw.phi->values();
    else
        phis = {-1.0}; // keep the model's own rates; reported as 0

    const std::size_t cells = betas.size() * phis.size();
    if (cells > 4096) throw CapError("sweep exceeds 4096 cells");
    if (runs > 1000000) throw CapError("more than 1e6 runs per cell");
    if (runs < 100) throw Error("sweep needs --runs >= 100");

    std::ostringstream csv;
    csv << "beta,phi,y_star,stderr,survived_fraction\n";
    for (double b : betas) {
        for (double p : phis) {
            MetastableEstimate est;
            if (b > 0.0) {
                const EpidemicParams ep = EpidemicParams::homogeneous(n, b, delta);
                switch (m.kind) {
                    case ModelKind::Static: {
                        Eigen::MatrixXd none = Eigen::MatrixXd::Zero(1, 1);
                        MarkovTemporalNet as_markov({*m.graph}, none);
                        est = metastable_count(make_markov_runner(as_markov, ep, cfg, burn_in),
                                               runs, burn_in);
                        break;
                    }
                    case ModelKind::Markov:
                        est = metastable_count(make_markov_runner(*m.markov, ep, cfg, burn_in),
                                               runs, burn_in);
                        break;
                    case ModelKind::Amei:
                        est = metastable_count(make_amei_runner(*m.amei, ep, cfg, burn_in),
                                               runs, burn_in);
                        break;
                    default: {
                        AsisModel cell_model = p >= 0.0
                                                   ? AsisModel(m.asis->g0,
                                                               Eigen::VectorXd::Constant(n, p),
                                                               m.asis->psi)
                                                   : *m.asis;
                        est = metastable_count(make_asis_runner(cell_model, ep, cfg, burn_in),
                                               runs, burn_in);
                        break;
                    }
                }
            }
            csv << csv_double(b) << "," << csv_double(p < 0 ? 0.0 : p) << ","
                << csv_double(est.y_star) << "," << csv_double(est.stderr_) << ","
                << csv_double(est.survived_fraction) << "\n";
        }
    }
    write_text_file(out, csv.str());
    manifest.outputs = {out};
    manifest.write(strip_ext(out));
    return 0;
}

// ---- matrix export ------------------------------------------------------------

int cmd_matrix(const std::string& model_path, const std::string& kind, double beta,
               double delta, const std::string& out, ManifestWriter manifest) {
    const LoadedModel m = load_model(model_path);
    const EpidemicParams ep = EpidemicParams::homogeneous(m.node_count(), beta, delta);
    Eigen::MatrixXd mat;
    if (kind == "static" && m.kind == ModelKind::Static)
        mat = build_static(*m.graph, ep).matrix();
    else if (kind == "a1" && m.kind == ModelKind::Markov)
        mat = build_A1(*m.markov, ep).matrix();
    else if (kind == "a2" && m.kind == ModelKind::Amei)
        mat = build_A2(*m.amei, ep).matrix();
    else if (kind == "a3" && m.kind == ModelKind::Asis)
        mat = build_A3(*m.asis, ep).matrix();
    else
        throw CLI::ValidationError("kind", "matrix kind does not match the model file");

    std::ostringstream csv;
    for (int i = 0; i < mat.rows(); ++i) {
        for (int j = 0; j < mat.cols(); ++j) {
            if (j) csv << ",";
            csv << csv_double(mat(i, j));
        }
        csv << "\n";
    }
    write_text_file(out, csv.str());
    manifest.outputs = {out};
    manifest.write(strip_ext(out));
    return 0;
}

// ---- gp solve -------------------------------------------------------------------

int cmd_gp_solve(const std::string& problem_path, double feas_tol, double opt_tol,
                 const std::string& out, ManifestWriter manifest) {
    const GpProblem gp = gp_from_json(load_json_file(problem_path));
    const GpSolution sol = solve(gp, feas_tol, opt_tol);
    write_text_file(out, gp_solution_to_json(gp, sol).dump(2) + "\n");
    manifest.outputs = {out};
    manifest.write(strip_ext(out));
    if (sol.status == GpSolution::Status::Infeasible) return kExitInfeasible;
    return 0;
}

// ---- validate -------------------------------------------------------------------

int cmd_validate(const std::string& suite, const std::string& out) {
    std::vector<std::string> names;
    if (suite == "all")
        names = validation_suites();
    else
        names = {suite};

    json report = json::array();
    bool all_pass = true;
    for (const auto& name : names) {
        std::vector<CheckResult> checks;
        try {
            checks = run_validation_suite(name);
        } catch (const Error& e) {
            std::cerr << e.what() << "\n";
            return kExitUsage;
        }
        json jc = json::array();
        bool pass = true;
        for (const auto& c : checks) {
            jc.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
            pass = pass && c.pass;
        }
        report.push_back(json{{"suite", name}, {"pass", pass}, {"checks", jc}});
        all_pass = all_pass && pass;
    }
    const json full{{"pass", all_pass}, {"suites", report}};
    if (out.empty())
        std::cout << full.dump(2) << "\n";
    else
        write_text_file(out, full.dump(2) + "\n");
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"epidemic containment on temporal and adaptive networks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    ManifestWriter manifest;
    manifest.command = join_args(argc, argv);

    // net build
    auto* net = app.add_subcommand("net", "model construction");
    net->require_subcommand(1);
    auto* build = net->add_subcommand("build", "build a bundled Karate-based model");
    std::string build_kind, build_out = "model.json";
    double p1 = 0, q1 = 0, p2 = 0, q2 = 0, p3 = 0, q3 = 0, phi = 0, psi = 0;
    build->add_option("kind", build_kind, "markov-karate | amei-karate | asis-karate")
        ->required();
    build->add_option("--p1", p1, "class-1 activation rate");
    build->add_option("--q1", q1, "class-1 deactivation rate");
    build->add_option("--p2", p2, "class-2 activation rate");
    build->add_option("--q2", q2, "class-2 deactivation rate");
    build->add_option("--p3", p3, "class-3 activation rate");
    build->add_option("--q3", q3, "class-3 deactivation rate");
    build->add_option("--phi", phi, "homogeneous cutting rate (asis)");
    build->add_option("--psi", psi, "homogeneous reconnecting rate (asis)");
    build->add_option("--out", build_out, "model output path");

    // threshold
    auto* thr = app.add_subcommand("threshold", "epidemic-threshold curve by bisection");
    std::string thr_model, thr_grid, thr_out = "threshold.csv", thr_svg;
    double thr_tol = 1e-6, thr_beta_hi = 10.0;
    thr->add_option("--model", thr_model)->required();
    thr->add_option("--delta-grid", thr_grid, "lo:hi:step")->required();
    thr->add_option("--tol", thr_tol, "bisection tolerance on beta");
    thr->add_option("--beta-hi", thr_beta_hi, "upper bracket for beta");
    thr->add_option("--out", thr_out);
    thr->add_option("--svg", thr_svg, "optional SVG plot path");

    // optimize
    auto* opt = app.add_subcommand("optimize", "budgeted resource allocation");
    std::string opt_model, opt_out = "alloc";
    double opt_budget = 0, cost_q = 0.1, cost_r = 0.1, cost_s = 1.0;
    double delta_lower = 0.05, beta_lower_frac = 0.8, delta_upper_frac = 1.2;
    double beta_upper = 0, delta_hat_mult = 2.0;
    double phi_lower = 0.5, phi_upper = 1.5, phi_hat_mult = 100.0;
    double fixed_beta = 0.18, fixed_delta = 1.0;
    double feas_tol = 1e-8, opt_tol = 1e-6;
    opt->add_option("--model", opt_model)->required();
    opt->add_option("--budget", opt_budget)->required();
    opt->add_option("--cost-q", cost_q, "infection-cost shape exponent");
    opt->add_option("--cost-r", cost_r, "recovery-cost shape exponent");
    opt->add_option("--cost-s", cost_s, "cutting-cost shape exponent");
    opt->add_option("--delta-lower", delta_lower, "natural recovery rate");
    opt->add_option("--beta-lower-frac", beta_lower_frac);
    opt->add_option("--delta-upper-frac", delta_upper_frac);
    opt->add_option("--beta-upper", beta_upper, "0 = model threshold at --delta-lower");
    opt->add_option("--delta-hat-mult", delta_hat_mult, "delta_hat = mult * delta_upper");
    opt->add_option("--phi-lower", phi_lower);
    opt->add_option("--phi-upper", phi_upper);
    opt->add_option("--phi-hat-mult", phi_hat_mult, "phi_hat = mult * phi_upper");
    opt->add_option("--beta", fixed_beta, "fixed infection rate (asis)");
    opt->add_option("--delta", fixed_delta, "fixed recovery rate (asis)");
    opt->add_option("--feas-tol", feas_tol);
    opt->add_option("--opt-tol", opt_tol);
    opt->add_option("--out", opt_out, "output base path");

    // simulate
    auto* sim = app.add_subcommand("simulate", "exact stochastic simulation");
    std::string sim_model, sim_sweep, sim_x0 = "all", sim_out = "sim.csv";
    int sim_runs = 1;
    double sim_horizon = 50.0, sim_beta = 0.1, sim_delta = 1.0, sim_burn_in = 0.5,
           sim_sample_dt = 0.0;
    std::uint64_t sim_seed = 0;
    sim->add_option("--model", sim_model)->required();
    sim->add_option("--runs", sim_runs);
    sim->add_option("--horizon", sim_horizon);
    sim->add_option("--seed", sim_seed);
    sim->add_option("--beta", sim_beta, "homogeneous infection rate");
    sim->add_option("--delta", sim_delta, "homogeneous recovery rate");
    sim->add_option("--sweep", sim_sweep, "beta=lo:hi:step[,phi=lo:hi:step]");
    sim->add_option("--burn-in", sim_burn_in, "burn-in fraction for sweeps");
    sim->add_option("--sample-dt", sim_sample_dt);
    sim->add_option("--x0", sim_x0, "all | none | first");
    bool sim_events = false;
    sim->add_flag("--events", sim_events, "also write the full event log as JSON lines");
    sim->add_option("--out", sim_out);

    // matrix
    auto* mtx = app.add_subcommand("matrix", "export a stability matrix as CSV");
    std::string mtx_model, mtx_kind, mtx_out = "matrix.csv";
    double mtx_beta = 0.1, mtx_delta = 1.0;
    mtx->add_option("--model", mtx_model)->required();
    mtx->add_option("--kind", mtx_kind, "static | a1 | a2 | a3")->required();
    mtx->add_option("--beta", mtx_beta);
    mtx->add_option("--delta", mtx_delta);
    mtx->add_option("--out", mtx_out);

    // gp solve
    auto* gp = app.add_subcommand("gp", "geometric programming");
    gp->require_subcommand(1);
    auto* gps = gp->add_subcommand("solve", "solve a GP problem file");
    std::string gp_problem, gp_out = "gp_solution.json";
    double gp_feas = 1e-8, gp_opt = 1e-6;
    gps->add_option("--problem", gp_problem)->required();
    gps->add_option("--feas-tol", gp_feas);
    gps->add_option("--opt-tol", gp_opt);
    gps->add_option("--out", gp_out);

    // validate
    auto* val = app.add_subcommand("validate", "run a cross-validation suite");
    std::string val_suite, val_out;
    val->add_option("--suite", val_suite, "thresholds | gp-oracle | master-equation | all")
        ->required();
    val->add_option("--out", val_out, "report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (build->parsed()) {
            manifest.inputs = {{"kind", build_kind}, {"p1", p1}, {"q1", q1}, {"p2", p2},
                               {"q2", q2},           {"p3", p3}, {"q3", q3}, {"phi", phi},
                               {"psi", psi}};
            if (build_kind != "asis-karate" &&
                !(p1 > 0 && q1 > 0 && p2 > 0 && q2 > 0 && p3 > 0 && q3 > 0)) {
                std::cerr << "error: all of --p1 --q1 --p2 --q2 --p3 --q3 must be positive\n";
                return kExitUsage;
            }
            return cmd_net_build(build_kind, p1, q1, p2, q2, p3, q3, phi, psi, build_out,
                                 manifest);
        }
        if (thr->parsed()) {
            manifest.inputs = {{"model", thr_model}, {"delta_grid", thr_grid}, {"tol", thr_tol}};
            return cmd_threshold(thr_model, thr_grid, thr_tol, thr_beta_hi, thr_out, thr_svg,
                                 manifest);
        }
        if (opt->parsed()) {
            manifest.inputs = {{"model", opt_model},       {"budget", opt_budget},
                               {"cost_q", cost_q},         {"cost_r", cost_r},
                               {"cost_s", cost_s},         {"delta_lower", delta_lower},
                               {"beta_upper", beta_upper}, {"phi_lower", phi_lower},
                               {"phi_upper", phi_upper},   {"beta", fixed_beta},
                               {"delta", fixed_delta}};
            return cmd_optimize(opt_model, opt_budget, cost_q, cost_r, cost_s, delta_lower,
                                beta_lower_frac, delta_upper_frac, beta_upper, delta_hat_mult,
                                phi_lower, phi_upper, phi_hat_mult, fixed_beta, fixed_delta,
                                feas_tol, opt_tol, opt_out, manifest);
        }
        if (sim->parsed()) {
            manifest.seed = sim_seed;
            manifest.inputs = {{"model", sim_model},       {"runs", sim_runs},
                               {"horizon", sim_horizon},   {"beta", sim_beta},
                               {"delta", sim_delta},       {"sweep", sim_sweep},
                               {"burn_in", sim_burn_in},   {"x0", sim_x0}};
            return cmd_simulate(sim_model, sim_runs, sim_horizon, sim_seed, sim_beta,
                                sim_delta, sim_sweep, sim_burn_in, sim_sample_dt, sim_x0,
                                sim_events, sim_out, manifest);
        }
        if (mtx->parsed()) {
            manifest.inputs = {{"model", mtx_model},
                               {"kind", mtx_kind},
                               {"beta", mtx_beta},
                               {"delta", mtx_delta}};
            return cmd_matrix(mtx_model, mtx_kind, mtx_beta, mtx_delta, mtx_out, manifest);
        }
        if (gps->parsed()) {
            manifest.inputs = {{"problem", gp_problem}, {"feas_tol", gp_feas}, {"opt_tol", gp_opt}};
            return cmd_gp_solve(gp_problem, gp_feas, gp_opt, gp_out, manifest);
        }
        if (val->parsed()) return cmd_validate(val_suite, val_out);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const CapError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kExitCap;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
