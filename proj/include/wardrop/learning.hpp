#ifndef WARDROP_LEARNING_HPP
#define WARDROP_LEARNING_HPP

#include "wardrop/costs.hpp"
#include "wardrop/equilibrium.hpp"
#include "wardrop/network.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace wardrop {

/**
 * Deterministic random source. All transformations from raw 64-bit output
 * to distributions are implemented here so that traces are bit-identical
 * across platforms and standard-library versions.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform01() { // in [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

private:
    std::mt19937_64 eng_;
};

struct PointMass {
    double value;
};
struct UniformDemand {
    double lo, hi; // draws in [lo, hi)
};
struct ExponentialDemand {
    double mean;
    double shift = 0.0;                  // optional left shift
    std::optional<double> truncate_below; // rejection-truncated to [shift, bound)
};

class DemandDistribution {
public:
    using Form = std::variant<PointMass, UniformDemand, ExponentialDemand>;
    explicit DemandDistribution(Form form);

    double sample(Rng& rng) const; // throws TruncationStarved
    double support_lo() const;
    Capacity support_hi() const; // exclusive upper end; infinite when unbounded

    const Form& form() const { return form_; }
    std::string spec_string() const;

private:
    Form form_;
};

/** Everything the observers of one period get to see. */
struct Observation {
    int period = 0;
    double demand = 0.0;
    std::vector<double> loads; // equilibrium loads, canonical edge order
    // realized cost per edge; empty optional for unused edges
    std::vector<std::optional<double>> realized;
};

struct RunConfig {
    int horizon = 10000;
    std::uint64_t seed = 1;
    double solver_tol = 1e-9;
    double obs_tol = 1e-7; // relative tolerance of the elimination step
    int grid_points = 33;  // weak-learning verification grid size
    bool early_stop = true; // stop once the posterior is a Dirac
};

/** A dynamic routing game with unknown state: the full input of one run. */
struct Scenario {
    RoutingNetwork network;
    std::vector<std::string> states;
    std::vector<std::vector<CostFunction>> costs; // [edge][state]
    std::vector<double> prior_weights;            // aligned with states
    int true_state = 0;
    DemandDistribution demand;
    RunConfig run;

    CostFamily family() const { return CostFamily(states, costs); }
    Belief prior() const { return Belief(prior_weights); }
};

/** Parses, cross-checks and freezes a Scenario for running. */
class ValidatedScenario {
public:
    explicit ValidatedScenario(Scenario sc);

    const Scenario& scenario() const { return sc_; }
    const ValidatedNetwork& net() const { return net_; }
    const std::vector<Path>& paths() const { return paths_; }
    const CostFamily& family() const { return fam_; }
    const Belief& prior() const { return prior_; }
    Capacity capacity() const { return gamma_; }

private:
    Scenario sc_;
    ValidatedNetwork net_;
    std::vector<Path> paths_;
    CostFamily fam_;
    Belief prior_;
    Capacity gamma_ = Capacity::infinite();
};

struct TraceStep {
    Observation obs;
    Belief posterior; // belief after updating on obs
};

struct Trace {
    std::uint64_t scenario_digest = 0;
    std::uint64_t seed = 0;
    std::vector<TraceStep> steps;
    Belief final_belief;
    // first period t such that the posterior never changes from t onwards
    // (within the finite run); 0 when the prior never moves
    int stabilization_period = 0;
};

/** One draw from the demand distribution. */
double sample_demand(const DemandDistribution& dist, Rng& rng);

/**
 * Public information generated by one period of play: loads, and realized
 * costs under the true state for every used edge (load > used_threshold).
 */
Observation observe(const ValidatedNetwork& net, const CostFamily& fam, int true_state,
                    double demand, const EquilibriumResult& eq, int period = 0,
                    double used_threshold = 1e-10);

/**
 * Bayes update with deterministic costs: states whose prediction disagrees
 * with a reported realized cost beyond obs_tol (relative) are eliminated
 * and the surviving weights are renormalized in proportion to `b`.
 */
Belief bayes_update(const Belief& b, const Observation& obs, const CostFamily& fam,
                    double obs_tol = 1e-7);

/**
 * Plays the dynamic game: each period samples a demand, solves the
 * equilibrium under the current public belief, observes realized costs
 * under the true state and updates the belief. Deterministic given the
 * scenario seed.
 */
Trace run_dynamics(const ValidatedScenario& vs);

struct StrongLearningVerdict {
    bool achieved = false;
    int period = -1; // first period at which the posterior became the truth Dirac
};

struct WeakLearningVerdict {
    bool holds = false;
    double max_deviation = 0.0;
    // populated when holds == false
    double fail_demand = 0.0;
    int fail_edge = -1;
    double fail_deviation = 0.0;
};

StrongLearningVerdict check_strong_learning(const Trace& tr, const ValidatedScenario& vs);

/**
 * Compares the equilibrium load map under `final_belief` with the map under
 * the Dirac at the true state on the demand grid; holds iff every per-edge
 * deviation is at most 1e-5. On failure reports the first failing demand
 * and, at that demand, the edge most under-explored relative to informed play.
 */
WeakLearningVerdict check_weak_learning(const ValidatedScenario& vs, const Belief& final_belief,
                                        const std::vector<double>& grid);

/**
 * Default verification grid: `points` equally spaced demands over the
 * support, capped strictly inside the network capacity when it is finite
 * (the point (1 - 1e-3) * capacity is included as the last grid value).
 * Unbounded supports without a capacity bound are truncated at a scale
 * multiple of the distribution.
 */
std::vector<double> default_demand_grid(const ValidatedScenario& vs, int points);

} // namespace wardrop

#endif
