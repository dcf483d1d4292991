#include "support/oracles.hpp"
#include "wardrop/network.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace wardrop;
using oracles::wheatstone;

TEST_CASE("validate accepts the Wheatstone network") {
    ValidatedNetwork net = validate_network(wheatstone());
    CHECK(net.edges().size() == 5);
    CHECK(net.origin() == "O");
}

TEST_CASE("validate accepts a single edge") {
    RoutingNetwork net{"O", "D", {{"e1", "O", "D", Capacity::infinite()}}};
    CHECK_NOTHROW(validate_network(net));
}

TEST_CASE("validate rejects an edge reaching a dead end") {
    RoutingNetwork net = wheatstone();
    net.edges.push_back({"e6", "a", "a2", Capacity::infinite()});
    CHECK_THROWS_AS(validate_network(net), DanglingEdge);
}

TEST_CASE("validate rejects bad terminals and capacities") {
    RoutingNetwork same{"O", "O", {{"e1", "O", "O", Capacity::infinite()}}};
    CHECK_THROWS_AS(validate_network(same), BadTerminals);

    RoutingNetwork net{"O", "D", {{"e1", "O", "D", Capacity::finite(1.0)}}};
    net.edges[0].capacity = Capacity::finite(0.0);
    CHECK_THROWS_AS(validate_network(net), NonpositiveCapacity);
}

TEST_CASE("path enumeration on the reference networks") {
    ValidatedNetwork two = validate_network(oracles::parallel_pair());
    CHECK(enumerate_paths(two).size() == 2);

    ValidatedNetwork ws = validate_network(wheatstone());
    std::vector<Path> paths = enumerate_paths(ws);
    REQUIRE(paths.size() == 3);
    // canonical order: lexicographic by edge index sequence
    CHECK(ws.edge_sequence(paths[0]) == "e1,e3,e5");
    CHECK(ws.edge_sequence(paths[1]) == "e1,e4");
    CHECK(ws.edge_sequence(paths[2]) == "e2,e5");

    RoutingNetwork chain{"O",
                         "D",
                         {{"c1", "O", "m1", Capacity::infinite()},
                          {"c2", "m1", "m2", Capacity::infinite()},
                          {"c3", "m2", "D", Capacity::infinite()}}};
    CHECK(enumerate_paths(validate_network(chain)).size() == 1);
}

TEST_CASE("path enumeration bound raises PathExplosion") {
    ValidatedNetwork ws = validate_network(wheatstone());
    CHECK_THROWS_AS(enumerate_paths(ws, 2), PathExplosion);
}

TEST_CASE("path enumeration matches brute force on random networks") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 40; ++i) {
        RoutingNetwork raw = oracles::random_network(rng, 8);
        ValidatedNetwork net = validate_network(raw);
        std::vector<Path> got = enumerate_paths(net);
        std::vector<std::vector<int>> expect = oracles::brute_force_paths(raw);
        REQUIRE(got.size() == expect.size());
        for (std::size_t p = 0; p < got.size(); ++p) CHECK(got[p] == expect[p]);
    }
}

TEST_CASE("min cut on hand instances") {
    CHECK(min_cut_capacity(validate_network(wheatstone())).is_infinite());

    RoutingNetwork two = oracles::parallel_pair(Capacity::finite(2.0), Capacity::finite(3.0));
    Capacity c = min_cut_capacity(validate_network(two));
    REQUIRE(c.is_finite());
    CHECK(c.value() == doctest::Approx(5.0));
}

TEST_CASE("min cut matches exhaustive cut enumeration") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 30; ++i) {
        RoutingNetwork raw = oracles::random_network(rng, 12);
        Capacity fast = min_cut_capacity(validate_network(raw));
        Capacity slow = oracles::brute_force_min_cut(raw);
        CHECK(fast.is_finite() == slow.is_finite());
        if (fast.is_finite()) CHECK(fast.value() == doctest::Approx(slow.value()).epsilon(1e-9));
    }
}

TEST_CASE("series-parallel recognition on the figure networks") {
    // (A): a diamond behind an access edge, in parallel with a direct edge
    RoutingNetwork a{"O",
                     "D",
                     {{"e1", "O", "a", Capacity::infinite()},
                      {"e2", "a", "c", Capacity::infinite()},
                      {"e3", "a", "b", Capacity::infinite()},
                      {"e4", "c", "D", Capacity::infinite()},
                      {"e5", "b", "D", Capacity::infinite()},
                      {"e6", "O", "D", Capacity::infinite()}}};
    auto tree_a = is_series_parallel(validate_network(a));
    REQUIRE(tree_a.has_value());

    // (B): the same plus the cross edge c->b
    RoutingNetwork b{"O",
                     "D",
                     {{"e1", "O", "a", Capacity::infinite()},
                      {"e2", "a", "c", Capacity::infinite()},
                      {"e3", "a", "b", Capacity::infinite()},
                      {"e4", "c", "b", Capacity::infinite()},
                      {"e5", "c", "D", Capacity::infinite()},
                      {"e6", "b", "D", Capacity::infinite()},
                      {"e7", "O", "D", Capacity::infinite()}}};
    CHECK_FALSE(is_series_parallel(validate_network(b)).has_value());

    CHECK_FALSE(is_series_parallel(validate_network(wheatstone())).has_value());
}

TEST_CASE("decomposition recomposes to an equal decomposition") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 25; ++i) {
        RoutingNetwork raw = oracles::random_sp_network(rng, 2, 10);
        ValidatedNetwork net = validate_network(raw);
        auto tree = is_series_parallel(net);
        REQUIRE(tree.has_value());
        ValidatedNetwork again = validate_network(recompose(*tree, net));
        auto tree2 = is_series_parallel(again);
        REQUIRE(tree2.has_value());
        CHECK(tree->to_string(net.edges()) == tree2->to_string(again.edges()));
    }
}

TEST_CASE("paradox found on the Wheatstone and absent on SP networks") {
    ValidatedNetwork ws = validate_network(wheatstone());
    auto px = find_od_paradox(ws);
    REQUIRE(px.has_value());
    CHECK(ws.edge_sequence(px->r1) == "e1,e3,e5");
    CHECK(px->a == "O");
    CHECK(px->u == "a");
    CHECK(px->v == "b");
    CHECK(px->b == "D");
    CHECK(ws.edge_sequence(px->r2_tilde) == "e2");
    CHECK(ws.edge_sequence(px->r3_tilde) == "e4");

    RoutingNetwork single{"O", "D", {{"e1", "O", "D", Capacity::infinite()}}};
    CHECK_FALSE(find_od_paradox(validate_network(single)).has_value());
}

namespace {

// The four structural conditions of a valid paradox witness.
void check_paradox_invariants(const ValidatedNetwork& net, const OdParadox& px) {
    auto vertices_of = [&net](const Path& p, bool interior_only) {
        std::set<std::string> out;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const Edge& e = net.edges()[p[i]];
            if (!interior_only || i > 0) out.insert(e.tail);
            if (!interior_only || i + 1 < p.size()) out.insert(e.head);
        }
        return out;
    };
    // r1 visits O, a, u, v, b, D in order
    std::vector<std::string> seq{net.origin()};
    for (int e : px.r1) seq.push_back(net.edges()[e].head);
    REQUIRE(px.pos_a < px.pos_u);
    REQUIRE(px.pos_u < px.pos_v);
    REQUIRE(px.pos_v < px.pos_b);
    CHECK(seq[px.pos_a] == px.a);
    CHECK(seq[px.pos_u] == px.u);
    CHECK(seq[px.pos_v] == px.v);
    CHECK(seq[px.pos_b] == px.b);
    CHECK(seq.back() == net.destination());

    // connectors meet r1 only at their endpoints
    std::set<std::string> r1_vs(seq.begin(), seq.end());
    for (const auto& v : vertices_of(px.r2_tilde, true)) CHECK(r1_vs.count(v) == 0);
    for (const auto& v : vertices_of(px.r3_tilde, true)) CHECK(r1_vs.count(v) == 0);

    // connectors share no vertex at all
    std::set<std::string> all2 = vertices_of(px.r2_tilde, false);
    std::set<std::string> all3 = vertices_of(px.r3_tilde, false);
    for (const auto& v : all2) CHECK(all3.count(v) == 0);

    // endpoints line up
    CHECK(net.edges()[px.r2_tilde.front()].tail == px.a);
    CHECK(net.edges()[px.r2_tilde.back()].head == px.v);
    CHECK(net.edges()[px.r3_tilde.front()].tail == px.u);
    CHECK(net.edges()[px.r3_tilde.back()].head == px.b);
}

} // namespace

TEST_CASE("recognition and paradox search are complementary") {
    std::mt19937_64 rng(5150);
    int non_sp_seen = 0;
    for (int i = 0; i < 60; ++i) {
        RoutingNetwork raw =
            (i % 2 == 0) ? oracles::random_sp_network(rng, 2, 9) : oracles::random_network(rng, 9);
        ValidatedNetwork net = validate_network(raw);
        bool sp = is_series_parallel(net).has_value();
        auto px = find_od_paradox(net);
        CHECK(sp == !px.has_value());
        if (px) {
            ++non_sp_seen;
            check_paradox_invariants(net, *px);
        }
    }
    CHECK(non_sp_seen > 0); // the corpus must actually exercise the paradox branch
}

TEST_CASE("paradox search respects its node budget") {
    ValidatedNetwork ws = validate_network(wheatstone());
    CHECK_THROWS_AS(find_od_paradox(ws, 2), SearchBudgetExceeded);
}

TEST_CASE("loads_from_flows on the Wheatstone") {
    ValidatedNetwork ws = validate_network(wheatstone());
    std::vector<Path> paths = enumerate_paths(ws); // (e1,e3,e5), (e1,e4), (e2,e5)

    std::vector<double> bridge_only = loads_from_flows(paths, {1.0, 0.0, 0.0}, ws);
    CHECK(bridge_only == std::vector<double>{1, 0, 1, 0, 1});

    double d = 20.0;
    std::vector<double> split = loads_from_flows(paths, {0.0, d / 2, d / 2}, ws);
    CHECK(split == std::vector<double>{10, 10, 0, 10, 10});

    CHECK(loads_from_flows(paths, {0, 0, 0}, ws) == std::vector<double>{0, 0, 0, 0, 0});
}

TEST_CASE("loads_from_flows is linear") {
    std::mt19937_64 rng(99);
    ValidatedNetwork ws = validate_network(wheatstone());
    std::vector<Path> paths = enumerate_paths(ws);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> y1, y2;
        for (std::size_t r = 0; r < paths.size(); ++r) {
            y1.push_back(oracles::urand(rng, 0.0, 5.0));
            y2.push_back(oracles::urand(rng, 0.0, 5.0));
        }
        double alpha = oracles::urand(rng, 0.0, 3.0), beta = oracles::urand(rng, 0.0, 3.0);
        std::vector<double> mix(paths.size());
        for (std::size_t r = 0; r < paths.size(); ++r) mix[r] = alpha * y1[r] + beta * y2[r];
        std::vector<double> lhs = loads_from_flows(paths, mix, ws);
        std::vector<double> a = loads_from_flows(paths, y1, ws);
        std::vector<double> b = loads_from_flows(paths, y2, ws);
        for (std::size_t e = 0; e < lhs.size(); ++e)
            CHECK(lhs[e] == doctest::Approx(alpha * a[e] + beta * b[e]).epsilon(1e-12));
    }
}
