#ifndef WARDROP_EQUILIBRIUM_HPP
#define WARDROP_EQUILIBRIUM_HPP

#include "wardrop/costs.hpp"
#include "wardrop/network.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace wardrop {

struct SolverOptions {
    double tol = 1e-9;               // Wardrop gap at which the solve stops
    std::size_t max_iters = 1000000; // line-search step budget
    double used_threshold = 1e-10;   // below this a path counts as unused

    // Starting flow. Spread routes the demand with a max-flow so finite
    // capacities are respected; the others exist to probe load uniqueness.
    enum class Init { Spread, FirstPath, Uniform };
    Init init = Init::Spread;
};

struct FeasibleFlow {
    std::vector<double> path_flows; // aligned with the enumerated paths
    double demand = 0.0;
};

struct EquilibriumResult {
    std::vector<double> loads;      // canonical edge order; the unique part
    FeasibleFlow flow;              // one witnessing flow (not unique)
    std::vector<double> path_costs; // expected path costs at the solution
    double gap = 0.0;               // max over used paths of cost - min cost
    double potential = 0.0;         // Beckmann potential at the solution
};

/**
 * Computes the Wardrop equilibrium for expected costs under `belief` by
 * minimizing the Beckmann potential over path flows (pairwise transfers
 * between the dearest used path and the cheapest path, with exact line
 * search on the one-dimensional potential). Iterates stay strictly inside
 * edge capacities. Throws InfeasibleDemand and NoConvergence.
 */
EquilibriumResult solve_wardrop(const ValidatedNetwork& net, const std::vector<Path>& paths,
                                const CostFamily& fam, const Belief& belief, double demand,
                                const SolverOptions& opts = {});

/** Beckmann potential: sum over edges of the expected-cost antiderivative. */
double beckmann_potential(const ValidatedNetwork& net, const CostFamily& fam,
                          const Belief& belief, const std::vector<double>& loads);

/** Equilibrium certificate: max over used paths of cost minus minimal path cost. */
double wardrop_gap(const ValidatedNetwork& net, const std::vector<Path>& paths,
                   const CostFamily& fam, const Belief& belief, const FeasibleFlow& flow,
                   double used_threshold = 1e-10);

/** Equilibrium loads at each grid demand, solved independently. */
std::vector<std::pair<double, std::vector<double>>> equilibrium_load_map(
    const ValidatedNetwork& net, const std::vector<Path>& paths, const CostFamily& fam,
    const Belief& belief, const std::vector<double>& demand_grid, const SolverOptions& opts = {});

} // namespace wardrop

#endif
