#ifndef WARDROP_COUNTEREXAMPLE_HPP
#define WARDROP_COUNTEREXAMPLE_HPP

#include "wardrop/learning.hpp"
#include "wardrop/network.hpp"

#include <optional>
#include <vector>

namespace wardrop {

struct ConverseParams {
    double A = 4.0;
    double eps = 0.3;
    double kappa = 0.4;
};

/**
 * A two-state scenario built from an O-D paradox of a non-series-parallel
 * network, following the constructive converse argument: the paradox
 * middle edge carries a piecewise cost whose two states agree up to load 1,
 * the companion paradox edges carry slope-A costs, the remaining figure
 * edges carry small slopes, and every non-figure edge is capacity-choked
 * with a diverging cost.
 */
struct ConverseInstance {
    Scenario scenario;
    OdParadox paradox;
    int r1_path_index = -1; // index of the paradox path in the canonical path list
    int e1_edge = -1;       // the state-dependent (piecewise) edge
    int e2_edge = -1;       // slope-A edge on the v-b stretch
    int e3_edge = -1;       // slope-A edge on the a-u stretch
};

struct ConverseCheckRow {
    double demand = 0.0;
    double r1_flow = 0.0; // flow on the paradox path under the prior
    double e1_load = 0.0; // load on the piecewise edge under the prior
    bool flow_ok = false; // r1_flow <= kappa + 1e-6
    bool load_ok = false; // e1_load <= 1 + 1e-6
    double load_deviation = 0.0; // max per-edge |prior loads - informed loads|
};

struct ConverseReport {
    std::vector<ConverseCheckRow> rows;
    bool all_checks_pass = false; // (i) and (ii) at every grid demand
    bool witness_found = false;   // (iii): some demand separates the load maps
    double witness_demand = 0.0;
    int witness_edge = -1;
    double witness_deviation = 0.0;
    bool widened = false; // true when the witness scan doubled the grid range
};

/** Builds the scenario; throws NotApplicable on series-parallel input and
 *  ParamViolation when the parameter constraints fail. */
ConverseInstance build_converse_instance(const ValidatedNetwork& net, const ConverseParams& p);

/** Default verification grid: `points` demands over (0, 100] (the instance
 *  capacity is infinite since the paradox paths are uncapacitated). */
std::vector<double> converse_demand_grid(int points = 33, double hi = 100.0);

/**
 * Runs the three numerical checks of the construction on the grid: the
 * paradox-path flow stays below kappa, the piecewise-edge load stays below
 * the kink, and some demand separates the equilibrium loads under the
 * prior from those under the true state. The witness scan doubles the
 * grid range once before giving up.
 */
ConverseReport verify_converse(const ConverseInstance& inst, const std::vector<double>& grid,
                               const ConverseParams& p);

/** Throws WitnessNotFound when the report carries no separation witness. */
void require_witness(const ConverseReport& report);

} // namespace wardrop

#endif
