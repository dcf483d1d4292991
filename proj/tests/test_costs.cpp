#include "support/oracles.hpp"
#include "wardrop/costs.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wardrop;
using oracles::affine;

namespace {

CostFunction bexp(double scale, double slope = 0.0) {
    return CostFunction(BoundedExp{scale, slope}, Capacity::infinite());
}

CostFunction pw(std::vector<double> breaks, std::vector<double> slopes,
                Capacity cap = Capacity::infinite()) {
    return CostFunction(PiecewiseAffine{0.0, std::move(breaks), std::move(slopes)}, cap);
}

} // namespace

TEST_CASE("eval on the standard cost shapes") {
    CHECK(affine(1, 0).eval(3.0) == 3.0);

    CostFunction b = bexp(1.0);
    CHECK(b.eval(0.0) == 0.0);
    for (double x : {0.1, 1.0, 7.0, 30.0}) CHECK(b.eval(x) < 1.0);

    CHECK(oracles::recip(0.5).eval(0.25) == doctest::Approx(4.0));
}

TEST_CASE("eval rejects loads outside the domain") {
    CHECK_THROWS_AS(affine(1, 0).eval(-0.5), DomainViolation);
    CHECK_THROWS_AS(oracles::recip(2.0).eval(2.0), DomainViolation);
    CHECK_THROWS_AS(oracles::recip(2.0).eval(2.5), DomainViolation);
}

TEST_CASE("antiderivatives in closed form") {
    CHECK(affine(1, 0).antiderivative(2.0) == doctest::Approx(2.0));
    CHECK(affine(1, 0).antiderivative(0.0) == 0.0);

    CostFunction b = bexp(1.0);
    CHECK(b.antiderivative(0.0) == 0.0);
    double x = 1.7;
    CHECK(b.antiderivative(x) == doctest::Approx(x + std::exp(-x) - 1.0));

    CostFunction r = oracles::recip(3.0);
    CHECK(r.antiderivative(1.0) == doctest::Approx(std::log(3.0) - std::log(2.0)));

    // piecewise: slope 2 up to 1, then slope 5; F(2) = 1 + 2 + 2.5 = 5.5
    CostFunction p = pw({1.0}, {2.0, 5.0});
    CHECK(p.eval(2.0) == doctest::Approx(2.0 + 5.0));
    CHECK(p.antiderivative(2.0) == doctest::Approx(5.5));
}

TEST_CASE("numerical derivative of the antiderivative matches eval") {
    std::mt19937_64 rng(31);
    std::vector<CostFunction> fns{affine(2.5, 0.7), bexp(1.3, 0.4), oracles::recip(4.0),
                                  pw({0.5, 2.0}, {1.0, 3.0, 0.2})};
    for (const CostFunction& f : fns) {
        double hi = f.domain_cap().is_finite() ? f.domain_cap().value() * 0.9 : 20.0;
        for (int i = 0; i < 200; ++i) {
            double x = oracles::urand(rng, 1e-3, hi);
            double h = 1e-6 * std::max(1.0, x);
            double numeric = (f.antiderivative(x + h) - f.antiderivative(x - h)) / (2.0 * h);
            CHECK(numeric == doctest::Approx(f.eval(x)).epsilon(1e-6));
        }
    }
}

TEST_CASE("every variant is strictly increasing on its domain") {
    std::mt19937_64 rng(32);
    std::vector<CostFunction> fns{affine(0.3, 2.0), bexp(2.0), bexp(1.0, 0.5),
                                  oracles::recip(1.5), pw({1.0}, {4.3, 0.09})};
    for (const CostFunction& f : fns) {
        // stay where increments are representable in double (bexp flattens
        // below machine epsilon beyond x ~ 36)
        double hi = f.domain_cap().is_finite() ? f.domain_cap().value() * 0.999 : 20.0;
        for (int i = 0; i < 300; ++i) {
            double x1 = oracles::urand(rng, 0.0, hi);
            double x2 = oracles::urand(rng, 0.0, hi);
            if (x1 > x2) std::swap(x1, x2);
            if (x2 - x1 < 1e-9) continue;
            CHECK(f.eval(x1) < f.eval(x2));
        }
    }
}

TEST_CASE("unbounded-at-capacity classification") {
    CHECK(oracles::recip(1.0).unbounded_at_capacity());
    CHECK_FALSE(bexp(1.0).unbounded_at_capacity());
    CHECK(bexp(1.0, 0.2).unbounded_at_capacity());
    CHECK(affine(1, 0).unbounded_at_capacity());
    CHECK_FALSE(CostFunction(Affine{1.0, 0.0}, Capacity::finite(2.0)).unbounded_at_capacity());
    CHECK(pw({1.0}, {1.0, 2.0}).unbounded_at_capacity());
}

TEST_CASE("belief validation and helpers") {
    CHECK_THROWS_AS(Belief({0.5, 0.4}), ValidationError);
    CHECK_THROWS_AS(Belief({1.2, -0.2}), ValidationError);
    CHECK_THROWS_AS(Belief(std::vector<double>{}), ValidationError);

    Belief u = Belief::uniform(4);
    CHECK(u.support().size() == 4);
    CHECK_FALSE(u.is_dirac());

    Belief d = Belief::dirac(3, 1);
    CHECK(d.is_dirac());
    CHECK(d.dirac_state() == 1);
}

TEST_CASE("expected cost under beliefs") {
    // Pigou pair with offset a = 8: expected cost of e2 is x + a/2.
    Scenario sc = oracles::pigou_scenario(8.0, DemandDistribution(PointMass{3.0}));
    CostFamily fam = sc.family();
    Belief half = Belief::uniform(2);
    for (double x : {0.0, 1.0, 2.5}) CHECK(fam.expected_cost(1, x, half) == doctest::Approx(x + 4.0));

    // Dirac belief reproduces the state's eval exactly.
    Belief dG = Belief::dirac(2, 0);
    for (double x : {0.0, 0.7, 9.0}) CHECK(fam.expected_cost(1, x, dG) == fam.cost(1, 0, x));

    // Wheatstone bridge under the uniform prior: eps*x + 5.
    Scenario ws = oracles::weak_vs_strong_scenario();
    CostFamily wf = ws.family();
    for (double x : {0.0, 2.0, 13.0})
        CHECK(wf.expected_cost(2, x, half) == doctest::Approx(0.1 * x + 5.0));
}

TEST_CASE("expected cost is affine in the belief") {
    Scenario ws = oracles::weak_vs_strong_scenario();
    CostFamily fam = ws.family();
    std::mt19937_64 rng(41);
    for (int i = 0; i < 50; ++i) {
        double p = oracles::urand(rng, 0.0, 1.0);
        double q = oracles::urand(rng, 0.0, 1.0);
        double lam = oracles::urand(rng, 0.0, 1.0);
        Belief b1({p, 1.0 - p});
        Belief b2({q, 1.0 - q});
        double mixw = lam * p + (1.0 - lam) * q;
        Belief mix({mixw, 1.0 - mixw});
        double x = oracles::urand(rng, 0.0, 10.0);
        double lhs = fam.expected_cost(2, x, mix);
        double rhs = lam * fam.expected_cost(2, x, b1) + (1.0 - lam) * fam.expected_cost(2, x, b2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("identifiability certification") {
    ValidatedNetwork net = validate_network(oracles::parallel_pair());

    // distinguishable: offsets differ on e2
    Scenario ok = oracles::pigou_scenario(8.0, DemandDistribution(PointMass{3.0}));
    CHECK_NOTHROW(ok.family().validate(net));

    // indistinguishable: identical functions in both states on every edge
    std::vector<std::vector<CostFunction>> twin{oracles::same(affine(1, 0), 2),
                                                oracles::same(affine(2, 1), 2)};
    CostFamily bad({"s1", "s2"}, twin);
    CHECK_THROWS_AS(bad.validate(net), IdentifiabilityFailure);
}

TEST_CASE("cost family rejects capacity mismatches") {
    RoutingNetwork raw = oracles::parallel_pair(Capacity::finite(2.0), Capacity::infinite());
    ValidatedNetwork net = validate_network(raw);
    // a reciprocal pole away from the declared capacity is rejected outright
    CHECK_THROWS_AS(CostFunction(ReciprocalCapacity{3.0}, Capacity::finite(2.0)), ValidationError);
    std::vector<std::vector<CostFunction>> fns{oracles::same(affine(1, 0), 1),
                                               oracles::same(affine(1, 0), 1)};
    CostFamily fam({"only"}, fns);
    // e1 has capacity 2 but the function claims an infinite domain
    CHECK_THROWS_AS(fam.validate(net), ValidationError);
}
