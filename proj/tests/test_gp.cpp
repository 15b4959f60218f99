#include <doctest.h>

#include <cmath>

#include "epictrl/gp.hpp"
#include "epictrl/model_io.hpp"
#include "epictrl/rng.hpp"
#include "epictrl/validate.hpp"

using namespace epictrl;

TEST_CASE("posynomial evaluation") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    CHECK(evaluate(Monomial(3.0, {{x, 2.0}}), {2.0}) == doctest::Approx(12.0));
    const Posynomial p{Monomial(1.0, {{x, 1.0}}), Monomial(1.0, {{x, -1.0}})};
    CHECK(evaluate(p, {1.0}) == doctest::Approx(2.0));
    CHECK(evaluate(p, {3.0}) == doctest::Approx(3.0 + 1.0 / 3.0));
    CHECK_THROWS_AS(evaluate(p, {-1.0}), Error);
    CHECK_THROWS_AS(Monomial(-2.0, {}), Error);
}

TEST_CASE("log-space transform is exact") {
    CounterRng rng(11);
    GpProblem gp;
    std::vector<VarId> vars;
    for (int v = 0; v < 4; ++v) vars.push_back(gp.add_variable("x" + std::to_string(v)));

    for (int rep = 0; rep < 1000; ++rep) {
        Posynomial p;
        const int nt = 1 + static_cast<int>(rng.uniform_index(4));
        for (int t = 0; t < nt; ++t) {
            std::map<VarId, double> exps;
            for (int v = 0; v < 4; ++v) {
                const double a = 4.0 * rng.uniform01() - 2.0;
                if (std::abs(a) > 0.2) exps[vars[v]] = a;
            }
            p += Monomial(0.1 + 3.0 * rng.uniform01(), std::move(exps));
        }
        std::vector<double> x(4), y(4);
        for (int v = 0; v < 4; ++v) {
            x[v] = std::exp(2.0 * rng.uniform01() - 1.0);
            y[v] = std::log(x[v]);
        }
        GpProblem tmp;
        for (int v = 0; v < 4; ++v) tmp.add_variable("x" + std::to_string(v));
        tmp.set_objective(p);
        const ConvexProgram cp = to_convex(tmp);
        CHECK(std::abs(std::log(evaluate(p, x)) - evaluate_lse(cp.objective, y)) <= 1e-12);
    }
}

TEST_CASE("transformed x + 1/x is convex along y") {
    // log(e^y + e^-y): positive second difference at sample points
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}}), Monomial(1.0, {{x, -1.0}})});
    const ConvexProgram cp = to_convex(gp);
    const double h = 1e-4;
    for (double y : {-1.5, -0.3, 0.0, 0.7, 2.0}) {
        const double f0 = evaluate_lse(cp.objective, {y - h});
        const double f1 = evaluate_lse(cp.objective, {y});
        const double f2 = evaluate_lse(cp.objective, {y + h});
        CHECK((f0 - 2 * f1 + f2) / (h * h) > 0.0);
    }
}

TEST_CASE("transform preserves constraint counts") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}})});
    gp.add_ineq(Posynomial{Monomial(1.0, {{x, -1.0}})});
    gp.add_ineq(Posynomial{Monomial(0.5, {{x, 2.0}}), Monomial(0.5, {})});
    gp.add_eq(Monomial(2.0, {{x, 1.0}}));
    const ConvexProgram cp = to_convex(gp);
    CHECK(cp.ineqs.size() == 2);
    CHECK(cp.eqs.size() == 1);
    // single monomial becomes a single affine term
    CHECK(cp.ineqs[0].terms.size() == 1);
    CHECK(cp.ineqs[0].terms[0].b == doctest::Approx(0.0));
}

TEST_CASE("solve: tight bound") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}})});
    gp.add_ineq(Posynomial{Monomial(1.0, {{x, -1.0}})}); // 1/x <= 1
    const GpSolution s = solve(gp);
    REQUIRE(s.status == GpSolution::Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(s.kkt_residual < 1e-6);
}

TEST_CASE("solve: arithmetic-geometric equality case") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    const VarId y = gp.add_variable("y");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}}), Monomial(1.0, {{y, 1.0}})});
    gp.add_ineq(Posynomial{Monomial(1.0, {{x, -1.0}, {y, -1.0}})}); // 1/(xy) <= 1
    const GpSolution s = solve(gp);
    REQUIRE(s.status == GpSolution::Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.kkt_residual < 1e-6);
}

TEST_CASE("solve: monomial equality constraint") {
    // min x + y subject to x y = 4: optimum x = y = 2
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    const VarId y = gp.add_variable("y");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}}), Monomial(1.0, {{y, 1.0}})});
    gp.add_eq(Monomial(0.25, {{x, 1.0}, {y, 1.0}}));
    const GpSolution s = solve(gp);
    REQUIRE(s.status == GpSolution::Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(s.values[0] * s.values[1] == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("solve: infeasible constant constraint") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}})});
    gp.add_ineq(Posynomial{Monomial(2.0, {})}); // 2 <= 1
    const GpSolution s = solve(gp);
    CHECK(s.status == GpSolution::Status::Infeasible);
    CHECK(s.max_violation > 0.5);
}

TEST_CASE("solution invariance under variable rescaling") {
    // min x + 2/x vs the same problem written in z with x = 2z
    GpProblem gp1;
    const VarId x = gp1.add_variable("x");
    gp1.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}}), Monomial(2.0, {{x, -1.0}})});
    gp1.add_ineq(Posynomial{Monomial(0.25, {{x, 1.0}})}); // x <= 4
    gp1.add_ineq(Posynomial{Monomial(0.25, {{x, -1.0}})}); // x >= 0.25
    const GpSolution s1 = solve(gp1);

    GpProblem gp2;
    const VarId z = gp2.add_variable("z");
    gp2.set_objective(Posynomial{Monomial(2.0, {{z, 1.0}}), Monomial(1.0, {{z, -1.0}})});
    gp2.add_ineq(Posynomial{Monomial(0.5, {{z, 1.0}})});
    gp2.add_ineq(Posynomial{Monomial(0.125, {{z, -1.0}})});
    const GpSolution s2 = solve(gp2);

    REQUIRE(s1.status == GpSolution::Status::Optimal);
    REQUIRE(s2.status == GpSolution::Status::Optimal);
    CHECK(s1.objective_value == doctest::Approx(s2.objective_value).epsilon(1e-6));
    CHECK(s1.values[0] == doctest::Approx(2.0 * s2.values[0]).epsilon(1e-4));
}

TEST_CASE("grid oracle basics") {
    GpProblem gp;
    const VarId x = gp.add_variable("x");
    gp.set_objective(Posynomial{Monomial(1.0, {{x, 1.0}})});
    gp.add_ineq(Posynomial{Monomial(1.0, {{x, -1.0}})});
    const GridResult r = grid_oracle(gp, {{0.5, 2.0}}, 1e-3);
    REQUIRE(r.feasible);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(2e-3));

    GpProblem bad;
    const VarId y = bad.add_variable("y");
    bad.set_objective(Posynomial{Monomial(1.0, {{y, 1.0}})});
    bad.add_ineq(Posynomial{Monomial(2.0, {})});
    CHECK_FALSE(grid_oracle(bad, {{0.5, 2.0}}, 1e-2).feasible);

    CHECK_THROWS_AS(grid_oracle(gp, {{0.5, 2.0}, {1.0, 2.0}}, 1e-3), Error);
}

TEST_CASE("random problems: solver matches the grid oracle") {
    CounterRng rng(424242);
    for (int caseno = 0; caseno < 6; ++caseno) {
        RandomGpCase rc = make_random_gp(rng, 3);
        const GpSolution sol = solve(rc.gp, 1e-8, 1e-8);
        REQUIRE(sol.status == GpSolution::Status::Optimal);
        for (const auto& c : rc.gp.ineqs())
            CHECK(evaluate(c, sol.values) <= 1.0 + 1e-8);
        CHECK(sol.kkt_residual < 1e-6);
        const GridResult grid = grid_oracle(rc.gp, rc.box, 1e-3);
        REQUIRE(grid.feasible);
        CHECK(std::abs(sol.objective_value - grid.objective) <=
              1e-2 * std::abs(grid.objective));
    }
}

TEST_CASE("gp json round trip") {
    CounterRng rng(5150);
    RandomGpCase rc = make_random_gp(rng, 3);
    rc.gp.add_eq(Monomial(1.0, {{0, 1.0}, {1, -1.0}}));
    const json j = gp_to_json(rc.gp);
    const GpProblem back = gp_from_json(j);
    CHECK(back.variable_count() == rc.gp.variable_count());
    CHECK(back.ineqs().size() == rc.gp.ineqs().size());
    CHECK(back.eqs().size() == rc.gp.eqs().size());
    std::vector<double> x(3);
    for (int v = 0; v < 3; ++v) x[v] = 0.5 + rng.uniform01();
    CHECK(evaluate(back.objective(), x) == doctest::Approx(evaluate(rc.gp.objective(), x)));
    for (std::size_t k = 0; k < back.ineqs().size(); ++k)
        CHECK(evaluate(back.ineqs()[k], x) == doctest::Approx(evaluate(rc.gp.ineqs()[k], x)));
}
