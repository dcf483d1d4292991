#include "wardrop/learning.hpp"

#include "wardrop/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace wardrop {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// demand distributions
// ---------------------------------------------------------------------------

DemandDistribution::DemandDistribution(Form form) : form_(std::move(form)) {
    if (const auto* p = std::get_if<PointMass>(&form_)) {
        if (p->value < 0.0) throw ValidationError("point-mass demand must be nonnegative");
    } else if (const auto* u = std::get_if<UniformDemand>(&form_)) {
        if (u->lo < 0.0 || u->lo >= u->hi)
            throw ValidationError("uniform demand needs 0 <= lo < hi");
    } else {
        const auto& e = std::get<ExponentialDemand>(form_);
        if (e.mean <= 0.0) throw ValidationError("exponential demand needs mean > 0");
        if (e.shift < 0.0) throw ValidationError("exponential shift must be nonnegative");
        if (e.truncate_below && *e.truncate_below <= e.shift)
            throw ValidationError("exponential truncation bound must exceed the shift");
    }
}

double DemandDistribution::sample(Rng& rng) const {
    if (const auto* p = std::get_if<PointMass>(&form_)) return p->value;
    if (const auto* u = std::get_if<UniformDemand>(&form_)) return rng.uniform(u->lo, u->hi);
    const auto& e = std::get<ExponentialDemand>(form_);
    for (std::size_t attempt = 0; attempt < 1000000; ++attempt) {
        double d = e.shift + rng.exponential(e.mean);
        if (!e.truncate_below || d < *e.truncate_below) return d;
    }
    throw TruncationStarved();
}

double DemandDistribution::support_lo() const {
    if (const auto* p = std::get_if<PointMass>(&form_)) return p->value;
    if (const auto* u = std::get_if<UniformDemand>(&form_)) return u->lo;
    return std::get<ExponentialDemand>(form_).shift;
}

Capacity DemandDistribution::support_hi() const {
    if (const auto* p = std::get_if<PointMass>(&form_)) return Capacity::finite(p->value + 1e-300);
    if (const auto* u = std::get_if<UniformDemand>(&form_)) return Capacity::finite(u->hi);
    const auto& e = std::get<ExponentialDemand>(form_);
    return e.truncate_below ? Capacity::finite(*e.truncate_below) : Capacity::infinite();
}

std::string DemandDistribution::spec_string() const {
    if (const auto* p = std::get_if<PointMass>(&form_)) return "point " + num(p->value);
    if (const auto* u = std::get_if<UniformDemand>(&form_))
        return "uniform " + num(u->lo) + " " + num(u->hi);
    const auto& e = std::get<ExponentialDemand>(form_);
    std::string s = "exp " + num(e.mean);
    if (e.shift != 0.0) s += " shift " + num(e.shift);
    if (e.truncate_below) s += " trunc " + num(*e.truncate_below);
    return s;
}

double sample_demand(const DemandDistribution& dist, Rng& rng) { return dist.sample(rng); }

// ---------------------------------------------------------------------------
// scenario validation
// ---------------------------------------------------------------------------

ValidatedScenario::ValidatedScenario(Scenario sc)
    : sc_(std::move(sc)),
      net_(validate_network(sc_.network)),
      paths_(enumerate_paths(net_)),
      fam_(sc_.family()),
      prior_(sc_.prior()) {
    fam_.validate(net_);
    if (prior_.size() != fam_.num_states())
        throw ValidationError("prior covers " + std::to_string(prior_.size()) + " states, family has " +
                              std::to_string(fam_.num_states()));
    if (sc_.true_state < 0 || sc_.true_state >= static_cast<int>(fam_.num_states()))
        throw ValidationError("true state index out of range");
    if (prior_.weight(sc_.true_state) <= 0.0)
        throw ValidationError("prior puts no weight on the true state");
    gamma_ = min_cut_capacity(net_);
    if (gamma_.is_finite()) {
        Capacity hi = sc_.demand.support_hi();
        if (hi.is_infinite() || hi.value() > gamma_.value())
            throw ValidationError("demand support exceeds the network capacity " +
                                  gamma_.to_string());
    }
}

// ---------------------------------------------------------------------------
// observation and Bayes update
// ---------------------------------------------------------------------------

Observation observe(const ValidatedNetwork& net, const CostFamily& fam, int true_state,
                    double demand, const EquilibriumResult& eq, int period,
                    double used_threshold) {
    Observation obs;
    obs.period = period;
    obs.demand = demand;
    obs.loads = eq.loads;
    obs.realized.assign(net.edges().size(), std::nullopt);
    for (std::size_t e = 0; e < net.edges().size(); ++e)
        if (eq.loads[e] > used_threshold)
            obs.realized[e] = fam.cost(e, true_state, eq.loads[e]);
    return obs;
}

Belief bayes_update(const Belief& b, const Observation& obs, const CostFamily& fam,
                    double obs_tol) {
    std::vector<double> w(b.weights());
    bool eliminated = false;
    for (std::size_t s = 0; s < w.size(); ++s) {
        if (w[s] == 0.0) continue;
        for (std::size_t e = 0; e < obs.realized.size(); ++e) {
            if (!obs.realized[e]) continue;
            double predicted = fam.cost(e, s, obs.loads[e]);
            double seen = *obs.realized[e];
            if (std::abs(predicted - seen) > obs_tol * std::max(1.0, std::abs(seen))) {
                w[s] = 0.0;
                eliminated = true;
                break;
            }
        }
    }
    if (!eliminated) return b; // no information: the posterior is exactly the prior
    double sum = 0.0;
    for (double v : w) sum += v;
    if (sum <= 0.0)
        throw EmptyPosterior("all states eliminated at period " + std::to_string(obs.period));
    for (double& v : w) v /= sum;
    return Belief(std::move(w));
}

// ---------------------------------------------------------------------------
// dynamics
// ---------------------------------------------------------------------------

Trace run_dynamics(const ValidatedScenario& vs) {
    const Scenario& sc = vs.scenario();
    Rng rng(sc.run.seed);
    Belief belief = vs.prior();
    SolverOptions opts;
    opts.tol = sc.run.solver_tol;

    Trace tr{scenario_digest(sc), sc.run.seed, {}, belief, 0};
    for (int t = 1; t <= sc.run.horizon; ++t) {
        double d = sample_demand(sc.demand, rng);
        try {
            EquilibriumResult eq = solve_wardrop(vs.net(), vs.paths(), vs.family(), belief, d, opts);
            Observation obs =
                observe(vs.net(), vs.family(), sc.true_state, d, eq, t, opts.used_threshold);
            Belief updated = bayes_update(belief, obs, vs.family(), sc.run.obs_tol);
            if (!(updated == belief)) tr.stabilization_period = t;
            belief = updated;
            tr.steps.push_back(TraceStep{std::move(obs), belief});
        } catch (const Error& e) {
            throw Error("period " + std::to_string(t) + ": " + e.what());
        }
        if (sc.run.early_stop && belief.is_dirac()) break;
    }
    tr.final_belief = belief;
    return tr;
}

StrongLearningVerdict check_strong_learning(const Trace& tr, const ValidatedScenario& vs) {
    int truth = vs.scenario().true_state;
    Belief target = Belief::dirac(vs.family().num_states(), truth);
    if (vs.prior() == target) return {true, 0};
    if (!(tr.final_belief == target)) return {false, -1};
    for (std::size_t i = 0; i < tr.steps.size(); ++i)
        if (tr.steps[i].posterior == target) return {true, tr.steps[i].obs.period};
    return {true, tr.steps.empty() ? 0 : tr.steps.back().obs.period};
}

WeakLearningVerdict check_weak_learning(const ValidatedScenario& vs, const Belief& final_belief,
                                        const std::vector<double>& grid) {
    const double tol = 1e-5;
    Belief truth = Belief::dirac(vs.family().num_states(), vs.scenario().true_state);
    SolverOptions opts;
    opts.tol = vs.scenario().run.solver_tol;
    auto under_belief = equilibrium_load_map(vs.net(), vs.paths(), vs.family(), final_belief, grid, opts);
    auto under_truth = equilibrium_load_map(vs.net(), vs.paths(), vs.family(), truth, grid, opts);

    WeakLearningVerdict verdict;
    verdict.holds = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& lb = under_belief[i].second;
        const auto& lt = under_truth[i].second;
        double worst = 0.0;
        for (std::size_t e = 0; e < lb.size(); ++e)
            worst = std::max(worst, std::abs(lb[e] - lt[e]));
        verdict.max_deviation = std::max(verdict.max_deviation, worst);
        if (verdict.holds && worst > tol) {
            verdict.holds = false;
            verdict.fail_demand = grid[i];
            // Report the edge that informed play uses more than belief play
            // (the unexplored edge); fall back to the largest deviation.
            int edge = -1;
            double best = tol;
            for (std::size_t e = 0; e < lb.size(); ++e)
                if (lt[e] - lb[e] > best) {
                    best = lt[e] - lb[e];
                    edge = static_cast<int>(e);
                }
            if (edge < 0) {
                for (std::size_t e = 0; e < lb.size(); ++e)
                    if (std::abs(lb[e] - lt[e]) > best) {
                        best = std::abs(lb[e] - lt[e]);
                        edge = static_cast<int>(e);
                    }
            }
            verdict.fail_edge = edge;
            verdict.fail_deviation = best;
        }
    }
    return verdict;
}

std::vector<double> default_demand_grid(const ValidatedScenario& vs, int points) {
    const DemandDistribution& dist = vs.scenario().demand;
    if (std::holds_alternative<PointMass>(dist.form()))
        return {std::get<PointMass>(dist.form()).value};

    double lo = dist.support_lo();
    Capacity hi = dist.support_hi();
    Capacity gamma = vs.capacity();
    double top;
    if (gamma.is_finite())
        top = gamma.value() * (1.0 - 1e-3);
    else if (hi.is_finite())
        top = hi.value() - (hi.value() - lo) * 1e-3;
    else {
        const auto& e = std::get<ExponentialDemand>(dist.form());
        top = e.shift + 8.0 * e.mean; // covers all but ~3e-4 of the mass
    }
    if (hi.is_finite()) top = std::min(top, hi.value() - (hi.value() - lo) * 1e-3);
    if (points < 2 || top <= lo) return {top};

    std::vector<double> grid;
    if (lo == 0.0) {
        // demands start strictly above zero: zero demand shows nothing
        for (int i = 1; i <= points; ++i)
            grid.push_back(top * static_cast<double>(i) / static_cast<double>(points));
    } else {
        for (int i = 0; i < points; ++i)
            grid.push_back(lo + (top - lo) * static_cast<double>(i) /
                                    static_cast<double>(points - 1));
    }
    return grid;
}

} // namespace wardrop
