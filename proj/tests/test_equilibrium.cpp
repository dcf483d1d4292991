#include "support/oracles.hpp"
#include "wardrop/equilibrium.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wardrop;

namespace {

struct Instance {
    ValidatedNetwork net;
    std::vector<Path> paths;
    CostFamily fam;
    Belief belief;
    double demand;
};

Instance make(const Scenario& sc, const Belief& b, double d) {
    ValidatedNetwork net = validate_network(sc.network);
    std::vector<Path> paths = enumerate_paths(net);
    return Instance{net, paths, sc.family(), b, d};
}

void check_against_oracle(const Instance& in, double load_tol = 1e-4) {
    EquilibriumResult eq =
        solve_wardrop(in.net, in.paths, in.fam, in.belief, in.demand, SolverOptions{});
    CHECK(eq.gap <= 1e-9);
    std::vector<double> oracle =
        oracles::oracle_grid_loads(in.net, in.paths, in.fam, in.belief, in.demand);
    REQUIRE(oracle.size() == eq.loads.size());
    for (std::size_t e = 0; e < oracle.size(); ++e)
        CHECK(std::abs(eq.loads[e] - oracle[e]) <= load_tol);
}

} // namespace

TEST_CASE("Pigou corner solution under the bad state") {
    Scenario sc = oracles::pigou_scenario(3.0, DemandDistribution(PointMass{2.0}));
    Instance in = make(sc, Belief::dirac(2, 1), 2.0); // c2 = x + 3 known
    EquilibriumResult eq = solve_wardrop(in.net, in.paths, in.fam, in.belief, in.demand);
    CHECK(eq.loads[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(eq.loads[1] == doctest::Approx(0.0).scale(1).epsilon(1e-9));
    CHECK(eq.gap <= 1e-9);
}

TEST_CASE("two identical parallel edges split evenly") {
    Scenario sc{oracles::parallel_pair(), {"only"}, {}, {1.0}, 0,
                DemandDistribution(PointMass{7.0}), RunConfig{}};
    sc.costs.push_back(oracles::same(oracles::affine(1, 0), 1));
    sc.costs.push_back(oracles::same(oracles::affine(1, 0), 1));
    Instance in = make(sc, Belief::dirac(1, 0), 7.0);
    EquilibriumResult eq = solve_wardrop(in.net, in.paths, in.fam, in.belief, in.demand);
    CHECK(eq.loads[0] == doctest::Approx(3.5).epsilon(1e-8));
    CHECK(eq.loads[1] == doctest::Approx(3.5).epsilon(1e-8));
}

TEST_CASE("weak-vs-strong instance: symmetric split, empty bridge") {
    Scenario sc = oracles::weak_vs_strong_scenario();
    Instance in = make(sc, Belief::uniform(2), 20.0);
    EquilibriumResult eq = solve_wardrop(in.net, in.paths, in.fam, in.belief, in.demand);
    // loads (10, 10, 0, 10, 10), path costs 25 / 12 / 12, potential 130
    CHECK(eq.loads[0] == doctest::Approx(10.0).epsilon(1e-7));
    CHECK(eq.loads[1] == doctest::Approx(10.0).epsilon(1e-7));
    CHECK(std::abs(eq.loads[2]) <= 1e-9);
    CHECK(eq.path_costs[0] == doctest::Approx(25.0).epsilon(1e-7));
    CHECK(eq.path_costs[1] == doctest::Approx(12.0).epsilon(1e-7));
    CHECK(eq.path_costs[2] == doctest::Approx(12.0).epsilon(1e-7));
    CHECK(eq.potential == doctest::Approx(130.0).epsilon(1e-9));
    check_against_oracle(in);
}

TEST_CASE("beckmann potential values") {
    Scenario sc = oracles::weak_vs_strong_scenario();
    ValidatedNetwork net = validate_network(sc.network);
    CostFamily fam = sc.family();
    Belief half = Belief::uniform(2);

    CHECK(beckmann_potential(net, fam, half, {0, 0, 0, 0, 0}) == 0.0);

    // term-by-term hand sum at y1 = y2 = 10, y3 = 0:
    //   F1(10) + F2(10) + F3(0) + F4(10) + F5(10)
    // = 50 + (10 + 0.05*100) + 0 + (10 + 0.05*100) + 50 = 130
    CHECK(beckmann_potential(net, fam, half, {10, 10, 0, 10, 10}) == doctest::Approx(130.0));

    RoutingNetwork single{"O", "D", {{"e1", "O", "D", Capacity::infinite()}}};
    ValidatedNetwork sn = validate_network(single);
    CostFamily sf({"only"}, {oracles::same(oracles::affine(1, 0), 1)});
    CHECK(beckmann_potential(sn, sf, Belief::dirac(1, 0), {2.0}) == doctest::Approx(2.0));
}

TEST_CASE("wardrop gap evaluations") {
    // exact symmetric split has zero gap
    Scenario sym{oracles::parallel_pair(), {"only"}, {}, {1.0}, 0,
                 DemandDistribution(PointMass{4.0}), RunConfig{}};
    sym.costs.push_back(oracles::same(oracles::affine(1, 0), 1));
    sym.costs.push_back(oracles::same(oracles::affine(1, 0), 1));
    Instance in = make(sym, Belief::dirac(1, 0), 4.0);
    CHECK(wardrop_gap(in.net, in.paths, in.fam, in.belief, FeasibleFlow{{2.0, 2.0}, 4.0}) == 0.0);

    // all demand on e1 in a Pigou pair with a = 0.5: gap = 1 - 0.5
    Scenario pig = oracles::pigou_scenario(0.5, DemandDistribution(PointMass{1.0}));
    Instance pin = make(pig, Belief::dirac(2, 1), 1.0); // bad state: c2 = x + 0.5
    CHECK(wardrop_gap(pin.net, pin.paths, pin.fam, pin.belief, FeasibleFlow{{1.0, 0.0}, 1.0}) ==
          doctest::Approx(0.5));

    // solver output always certifies within tolerance
    Scenario ws = oracles::weak_vs_strong_scenario();
    Instance win = make(ws, Belief::uniform(2), 24.0);
    EquilibriumResult eq = solve_wardrop(win.net, win.paths, win.fam, win.belief, win.demand);
    CHECK(eq.gap <= 1e-9);
}

TEST_CASE("solver matches the grid oracle on small instances") {
    // Pigou pair, several demands and beliefs
    for (double d : {1.0, 3.0, 6.0}) {
        Scenario sc = oracles::pigou_scenario(8.0, DemandDistribution(PointMass{d}));
        check_against_oracle(make(sc, Belief::uniform(2), d));
        check_against_oracle(make(sc, Belief::dirac(2, 0), d));
    }
    // bounded-cost pair
    {
        Scenario sc{oracles::parallel_pair(), {"thetaG", "thetaB"}, {}, {0.5, 0.5}, 0,
                    DemandDistribution(PointMass{5.0}), RunConfig{}};
        sc.costs.push_back(oracles::same(CostFunction(BoundedExp{1.0, 0.0}, Capacity::infinite()), 2));
        sc.costs.push_back({oracles::affine(1, 0), oracles::affine(1, 10)});
        for (double d : {1.0, 5.0, 25.0}) check_against_oracle(make(sc, Belief::uniform(2), d));
    }
    // Wheatstone under both beliefs
    {
        Scenario sc = oracles::weak_vs_strong_scenario();
        for (double d : {2.0, 20.0, 29.9}) check_against_oracle(make(sc, Belief::uniform(2), d));
        check_against_oracle(make(sc, Belief::dirac(2, 0), 1.5));
    }
    // reciprocal capacities: flow hugs the cheap edge until the pole repels it
    {
        Scenario sc{oracles::parallel_pair(Capacity::finite(2.0), Capacity::finite(3.0)),
                    {"only"}, {}, {1.0}, 0, DemandDistribution(PointMass{4.0}), RunConfig{}};
        sc.costs.push_back(oracles::same(oracles::recip(2.0), 1));
        sc.costs.push_back(oracles::same(oracles::recip(3.0), 1));
        for (double d : {0.5, 2.5, 4.9}) check_against_oracle(make(sc, Belief::dirac(1, 0), d));
    }
}

TEST_CASE("load maps are nondecreasing in demand on series-parallel networks") {
    std::mt19937_64 rng(314);
    for (int i = 0; i < 12; ++i) {
        RoutingNetwork raw = oracles::random_sp_network(rng, 4, 10);
        for (Edge& e : raw.edges)
            if ((rng() & 1u) != 0) e.capacity = Capacity::finite(oracles::urand(rng, 1.0, 5.0));
        ValidatedNetwork net = validate_network(raw);
        std::vector<Path> paths = enumerate_paths(net);

        std::vector<std::vector<CostFunction>> fns;
        for (const Edge& e : net.edges()) {
            if (e.capacity.is_finite())
                fns.push_back({oracles::recip(e.capacity.value())});
            else
                fns.push_back({oracles::affine(oracles::urand(rng, 0.3, 3.0),
                                               oracles::urand(rng, 0.0, 2.0))});
        }
        CostFamily fam({"only"}, fns);
        Belief b = Belief::dirac(1, 0);

        Capacity gamma = min_cut_capacity(net);
        double top = gamma.is_finite() ? gamma.value() * (1.0 - 1e-3) : 15.0;
        std::vector<double> grid;
        for (int g = 1; g <= 10; ++g) grid.push_back(top * g / 10.0);

        auto rows = equilibrium_load_map(net, paths, fam, b, grid);
        for (std::size_t g = 1; g < rows.size(); ++g)
            for (std::size_t e = 0; e < rows[g].second.size(); ++e)
                CHECK(rows[g].second[e] >= rows[g - 1].second[e] - 1e-6);
    }
}

TEST_CASE("unbounded costs force every edge into use near capacity") {
    std::mt19937_64 rng(2718);
    for (int i = 0; i < 8; ++i) {
        RoutingNetwork raw = oracles::random_sp_network(rng, 3, 8);
        for (Edge& e : raw.edges) e.capacity = Capacity::finite(oracles::urand(rng, 1.0, 5.0));
        ValidatedNetwork net = validate_network(raw);
        std::vector<Path> paths = enumerate_paths(net);
        std::vector<std::vector<CostFunction>> fns;
        for (const Edge& e : net.edges()) fns.push_back({oracles::recip(e.capacity.value())});
        CostFamily fam({"only"}, fns);
        Belief b = Belief::dirac(1, 0);

        double gamma = min_cut_capacity(net).value();
        auto low = solve_wardrop(net, paths, fam, b, gamma / 2.0);
        auto high = solve_wardrop(net, paths, fam, b, gamma * (1.0 - 1e-3));
        for (std::size_t e = 0; e < net.edges().size(); ++e) {
            CHECK(high.loads[e] > 1e-6); // all edges used close to capacity
            if (high.loads[e] > 1e-6) CHECK(high.loads[e] > low.loads[e] - 1e-9);
        }
    }
}

TEST_CASE("equilibrium loads are start-independent") {
    Scenario ws = oracles::weak_vs_strong_scenario();
    Instance in = make(ws, Belief::uniform(2), 23.0);
    SolverOptions first, uni;
    first.init = SolverOptions::Init::FirstPath;
    uni.init = SolverOptions::Init::Uniform;
    auto a = solve_wardrop(in.net, in.paths, in.fam, in.belief, in.demand, first);
    auto b = solve_wardrop(in.net, in.paths, in.fam, in.belief, in.demand, uni);
    for (std::size_t e = 0; e < a.loads.size(); ++e)
        CHECK(a.loads[e] == doctest::Approx(b.loads[e]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("uniform cost scaling leaves the equilibrium loads unchanged") {
    Scenario base = oracles::pigou_scenario(8.0, DemandDistribution(PointMass{6.0}));
    Scenario scaled = base;
    // multiply every cost by 3
    scaled.costs.clear();
    scaled.costs.push_back(oracles::same(oracles::affine(3, 0), 2));
    scaled.costs.push_back({oracles::affine(3, 0), oracles::affine(3, 24)});
    Instance a = make(base, Belief::uniform(2), 6.0);
    Instance b = make(scaled, Belief::uniform(2), 6.0);
    auto ra = solve_wardrop(a.net, a.paths, a.fam, a.belief, a.demand);
    auto rb = solve_wardrop(b.net, b.paths, b.fam, b.belief, b.demand);
    for (std::size_t e = 0; e < ra.loads.size(); ++e)
        CHECK(ra.loads[e] == doctest::Approx(rb.loads[e]).epsilon(1e-7));
}

TEST_CASE("demand at or above capacity is rejected") {
    RoutingNetwork two = oracles::parallel_pair(Capacity::finite(1.0), Capacity::finite(1.0));
    ValidatedNetwork net = validate_network(two);
    std::vector<Path> paths = enumerate_paths(net);
    CostFamily fam({"only"}, {{oracles::recip(1.0)}, {oracles::recip(1.0)}});
    Belief b = Belief::dirac(1, 0);
    CHECK_THROWS_AS(solve_wardrop(net, paths, fam, b, 2.0), InfeasibleDemand);
    CHECK_THROWS_AS(solve_wardrop(net, paths, fam, b, 2.5), InfeasibleDemand);
    CHECK_THROWS_AS(solve_wardrop(net, paths, fam, b, -1.0), InfeasibleDemand);
    CHECK_NOTHROW(solve_wardrop(net, paths, fam, b, 1.9));
}

TEST_CASE("load map on the bounded-costs pair never touches e2") {
    Scenario sc{oracles::parallel_pair(), {"thetaG", "thetaB"}, {}, {0.5, 0.5}, 0,
                DemandDistribution(PointMass{1.0}), RunConfig{}};
    sc.costs.push_back(oracles::same(CostFunction(BoundedExp{1.0, 0.0}, Capacity::infinite()), 2));
    sc.costs.push_back({oracles::affine(1, 0), oracles::affine(1, 10)});
    ValidatedNetwork net = validate_network(sc.network);
    std::vector<Path> paths = enumerate_paths(net);
    auto rows = equilibrium_load_map(net, paths, sc.family(), Belief::uniform(2), {1.0, 5.0, 10.0});
    for (const auto& [d, loads] : rows) {
        CHECK(loads[0] == doctest::Approx(d));
        CHECK(loads[1] <= 1e-10);
    }
    auto zero = equilibrium_load_map(net, paths, sc.family(), Belief::uniform(2), {0.0});
    CHECK(zero[0].second == std::vector<double>{0.0, 0.0});
}

TEST_CASE("a capacity-pinned optimum reports NoConvergence honestly") {
    // Everyone wants the cheap choked edge; its bounded cost never repels
    // them, so the equal-cost certificate is unreachable.
    RoutingNetwork raw = oracles::parallel_pair(Capacity::finite(1.0), Capacity::infinite());
    ValidatedNetwork net = validate_network(raw);
    std::vector<Path> paths = enumerate_paths(net);
    CostFamily fam({"only"}, {{oracles::affine(1, 0, Capacity::finite(1.0))},
                              {oracles::affine(100, 50)}});
    SolverOptions opts;
    opts.max_iters = 5000;
    CHECK_THROWS_AS(solve_wardrop(net, paths, fam, Belief::dirac(1, 0), 1.5, opts), NoConvergence);
}

TEST_CASE("zero demand yields the zero equilibrium") {
    Scenario ws = oracles::weak_vs_strong_scenario();
    Instance in = make(ws, Belief::uniform(2), 0.0);
    EquilibriumResult eq = solve_wardrop(in.net, in.paths, in.fam, in.belief, 0.0);
    for (double x : eq.loads) CHECK(x == 0.0);
    CHECK(eq.gap == 0.0);
    CHECK(eq.potential == 0.0);
}
