#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "epictrl/model_io.hpp"

using namespace epictrl;

namespace {

const std::string kBin = EPICTRL_BIN;
const std::string kDir = "cli_scratch";

int run(const std::string& args) {
    const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

struct Setup {
    Setup() {
        const int rc = std::system(("rm -rf " + kDir + " && mkdir -p " + kDir).c_str());
        (void)rc;
    }
};
Setup setup_once;

} // namespace

TEST_CASE("net build writes model, report, and manifest") {
    const std::string out = kDir + "/mk.json";
    REQUIRE(run("net build markov-karate --p1 0.1 --q1 1 --p2 0.1 --q2 1 --p3 0.02 --q3 5 "
                "--out " + out) == 0);
    REQUIRE(exists(out));
    REQUIRE(exists(kDir + "/mk.report.json"));
    REQUIRE(exists(kDir + "/mk.manifest.json"));

    const json model = load_json_file(out);
    CHECK(model.at("configs").size() == 8);
    const json report = load_json_file(kDir + "/mk.report.json");
    const auto& sizes = report.at("edge_class_sizes");
    CHECK(sizes.at("within_cluster_1").get<int>() + sizes.at("within_cluster_2").get<int>() +
              sizes.at("between_clusters").get<int>() ==
          78);
    const json manifest = load_json_file(kDir + "/mk.manifest.json");
    CHECK(manifest.at("tool_version").get<std::string>() == "0.1.0");
    CHECK(manifest.at("outputs").size() == 2);

    REQUIRE(run("net build amei-karate --p1 0.1 --q1 1 --p2 0.1 --q2 1 --p3 0.02 --q3 5 "
                "--out " + kDir + "/am.json") == 0);
    REQUIRE(run("net build asis-karate --phi 1 --psi 2 --out " + kDir + "/as.json") == 0);
}

TEST_CASE("missing rate flags exit with the usage code") {
    CHECK(run("net build markov-karate --p1 0.1") == 2);
    CHECK(run("net build") == 2);
    CHECK(run("threshold --delta-grid 1:2:1") == 2); // missing --model
}

TEST_CASE("optimize is deterministic and respects the budget") {
    const std::string model = kDir + "/as.json";
    REQUIRE(exists(model));
    const std::string args = "optimize --model " + model +
                             " --budget 5 --beta 0.18 --delta 1 --out " + kDir + "/al";
    REQUIRE(run(args) == 0);
    REQUIRE(exists(kDir + "/al.json"));
    REQUIRE(exists(kDir + "/al.csv"));
    REQUIRE(exists(kDir + "/al.svg"));
    REQUIRE(exists(kDir + "/al.manifest.json"));
    const std::string first = slurp(kDir + "/al.json");
    const json alloc = json::parse(first);
    CHECK(alloc.at("total_spend").get<double>() <= 5.0 + 1e-6);
    CHECK(alloc.at("status").get<std::string>() == "optimal");
    CHECK(alloc.at("lambda_star").get<double>() > 0.0);

    REQUIRE(run(args) == 0);
    CHECK(slurp(kDir + "/al.json") == first); // byte-identical rerun
}

TEST_CASE("infeasible optimization exits with code 3") {
    // beta far above anything the box can stabilize
    const std::string model = kDir + "/as.json";
    CHECK(run("optimize --model " + model + " --budget 5 --beta 5 --delta 1 --out " + kDir +
              "/bad") == 3);
}

TEST_CASE("threshold curve on the static karate graph") {
    write_text_file(kDir + "/karate.json", graph_to_json(karate()).dump() + "\n");
    REQUIRE(run("threshold --model " + kDir + "/karate.json --delta-grid 1:1:1 "
                "--tol 1e-7 --out " + kDir + "/thr.csv --svg " + kDir + "/thr.svg") == 0);
    const std::string csv = slurp(kDir + "/thr.csv");
    std::istringstream in(csv);
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "delta,beta_c");
    std::getline(in, row);
    const double bc = std::stod(row.substr(row.find(',') + 1));
    CHECK(bc == doctest::Approx(1.0 / 6.725697727631729).epsilon(1e-4));
    CHECK(exists(kDir + "/thr.svg"));
    const std::string svg = slurp(kDir + "/thr.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("simulate trajectory is reproducible and sweep rows are sane") {
    const std::string model = kDir + "/mk.json";
    const std::string args = "simulate --model " + model +
                             " --runs 1 --seed 7 --beta 0.2 --delta 1 --horizon 5 --out " +
                             kDir + "/t1.csv";
    REQUIRE(run(args) == 0);
    const std::string first = slurp(kDir + "/t1.csv");
    REQUIRE(run(args) == 0);
    CHECK(slurp(kDir + "/t1.csv") == first);
    CHECK(first.substr(0, 16) == "time,prevalence\n");

    // beta = 0 sweep row reports extinction
    REQUIRE(run("simulate --model " + kDir + "/as.json" +
                " --runs 100 --seed 3 --delta 1 --horizon 10 "
                "--sweep beta=0:0.4:0.4,phi=1:1:1 --out " + kDir + "/sw.csv") == 0);
    std::istringstream in(slurp(kDir + "/sw.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "beta,phi,y_star,stderr,survived_fraction");
    std::getline(in, line); // beta = 0 row
    CHECK(line.substr(0, 4) == "0,1,");
    const auto ystar = line.substr(4, 1);
    CHECK(ystar == "0");

    // phi sweeps on non-adaptive models are usage errors
    CHECK(run("simulate --model " + kDir + "/mk.json" +
              " --runs 100 --sweep beta=0.1:0.2:0.1,phi=0:1:1 --out " + kDir + "/x.csv") == 2);
    // oversized sweeps hit the resource cap
    CHECK(run("simulate --model " + kDir + "/as.json" +
              " --runs 100 --sweep beta=0.001:1:0.001,phi=0:4:0.05 --out " + kDir +
              "/y.csv") == 4);
}

TEST_CASE("matrix export dimensions") {
    REQUIRE(run("matrix --model " + kDir + "/mk.json --kind a1 --beta 0.1 --delta 1 --out " +
                kDir + "/a1.csv") == 0);
    std::istringstream in(slurp(kDir + "/a1.csv"));
    std::string line;
    int rows = 0, cols = 0;
    while (std::getline(in, line)) {
        if (rows == 0) cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
        ++rows;
    }
    CHECK(rows == 272);
    CHECK(cols == 272);
    CHECK(run("matrix --model " + kDir + "/mk.json --kind a2 --out " + kDir + "/bad.csv") == 2);
}

TEST_CASE("gp solve on a problem file") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    const VarId y = gp.add_variable("y");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}}), Monomial(1.0, {{y, 1.0}})});
    gp.add_ineq(Posynomial{Monomial(1.0, {{x, -1.0}, {y, -1.0}})});
    write_text_file(kDir + "/prob.json", gp_to_json(gp).dump(2) + "\n");
    REQUIRE(run("gp solve --problem " + kDir + "/prob.json --out " + kDir + "/sol.json") == 0);
    const json sol = load_json_file(kDir + "/sol.json");
    CHECK(sol.at("status").get<std::string>() == "optimal");
    CHECK(sol.at("objective_value").get<double>() == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("sweep metastable level grows with beta at fixed phi") {
    REQUIRE(run("simulate --model " + kDir + "/as.json" +
                " --runs 200 --seed 17 --delta 1 --horizon 20 "
                "--sweep beta=0.3:0.6:0.3,phi=1:1:1 --out " + kDir + "/mono.csv") == 0);
    std::istringstream in(slurp(kDir + "/mono.csv"));
    std::string line;
    std::getline(in, line); // header
    double y[2], se[2];
    for (int r = 0; r < 2; ++r) {
        std::getline(in, line);
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ','); // beta
        std::getline(row, cell, ','); // phi
        std::getline(row, cell, ',');
        y[r] = std::stod(cell);
        std::getline(row, cell, ',');
        se[r] = std::stod(cell);
    }
    CHECK(y[1] >= y[0] - 3.0 * (se[0] + se[1]));
}

TEST_CASE("validate suites") {
    CHECK(run("validate --suite nosuch") == 2);
    REQUIRE(run("validate --suite master-equation --out " + kDir + "/rep.json") == 0);
    const json rep = load_json_file(kDir + "/rep.json");
    CHECK(rep.at("pass").get<bool>());
    REQUIRE(run("validate --suite gp-oracle --out " + kDir + "/rep2.json") == 0);
    CHECK(load_json_file(kDir + "/rep2.json").at("pass").get<bool>());
    REQUIRE(run("validate --suite thresholds --out " + kDir + "/rep3.json") == 0);
    CHECK(load_json_file(kDir + "/rep3.json").at("pass").get<bool>());
}
