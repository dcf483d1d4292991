#include "wardrop/counterexample.hpp"

#include "wardrop/equilibrium.hpp"
#include "wardrop/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wardrop {

ConverseInstance build_converse_instance(const ValidatedNetwork& net, const ConverseParams& p) {
    if (!(p.eps > 0.0 && p.eps < 1.0 / 3.0))
        throw ParamViolation("eps must lie in (0, 1/3), got " + format_double(p.eps));
    if (!(p.A > 3.0)) throw ParamViolation("A must exceed 3, got " + format_double(p.A));
    if (!(p.kappa > 0.0 && p.kappa < 0.5))
        throw ParamViolation("kappa must lie in (0, 1/2), got " + format_double(p.kappa));

    std::optional<OdParadox> paradox = find_od_paradox(net);
    if (!paradox) throw NotApplicable("network is series-parallel; no O-D paradox exists");

    std::vector<Path> paths = enumerate_paths(net);
    const OdParadox& px = *paradox;

    const int k_Oa = px.pos_a;
    const int k_au = px.pos_u - px.pos_a;
    const int k_uv = px.pos_v - px.pos_u;
    const int k_vb = px.pos_b - px.pos_v;
    const int k_bD = static_cast<int>(px.r1.size()) - px.pos_b;
    const int k2 = static_cast<int>(px.r2_tilde.size());
    const int k3 = static_cast<int>(px.r3_tilde.size());

    // Slope of each figure edge, keyed by its stretch of the paradox.
    std::vector<double> slope(net.edges().size(), 0.0);
    std::set<int> figure;
    for (int i = 0; i < static_cast<int>(px.r1.size()); ++i) {
        int e = px.r1[i];
        figure.insert(e);
        if (i < px.pos_a)
            slope[e] = p.eps / k_Oa;
        else if (i < px.pos_u)
            slope[e] = p.eps / k_au;
        else if (i < px.pos_v)
            slope[e] = p.eps / k_uv;
        else if (i < px.pos_b)
            slope[e] = p.eps / k_vb;
        else
            slope[e] = p.eps / k_bD;
    }
    for (int e : px.r2_tilde) {
        figure.insert(e);
        slope[e] = p.eps / k2;
    }
    for (int e : px.r3_tilde) {
        figure.insert(e);
        slope[e] = p.eps / k3;
    }

    // Distinguished edges: the first edge of each middle stretch of r1.
    const int e3 = px.r1[px.pos_a]; // a-u stretch, slope A + eps/k_au
    const int e1 = px.r1[px.pos_u]; // u-v stretch, the piecewise state edge
    const int e2 = px.r1[px.pos_v]; // v-b stretch, slope A + eps/k_vb

    Scenario sc{RoutingNetwork{}, {"thetaG", "thetaB"}, {}, {0.5, 0.5}, 0,
                DemandDistribution(UniformDemand{0.0, 100.0}), RunConfig{}};
    sc.run.horizon = 1000;
    sc.network.origin = net.origin();
    sc.network.destination = net.destination();

    const double outside_cap = p.kappa / static_cast<double>(paths.size());
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        Edge edge = net.edges()[e];
        edge.capacity =
            figure.count(static_cast<int>(e)) ? Capacity::infinite() : Capacity::finite(outside_cap);
        sc.network.edges.push_back(edge);
    }

    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        const Capacity cap = sc.network.edges[e].capacity;
        std::vector<CostFunction> per_state;
        if (static_cast<int>(e) == e1) {
            const double below = p.A + p.eps / k_uv;
            PiecewiseAffine good{0.0, {1.0}, {below, p.eps * p.eps}};
            PiecewiseAffine bad{0.0, {1.0}, {below, 2.0 * p.A + 2.0 * p.eps / k_uv - p.eps * p.eps}};
            per_state.emplace_back(good, cap);
            per_state.emplace_back(bad, cap);
        } else if (static_cast<int>(e) == e2) {
            Affine f{p.A + p.eps / k_vb, 0.0};
            per_state.emplace_back(f, cap);
            per_state.emplace_back(f, cap);
        } else if (static_cast<int>(e) == e3) {
            Affine f{p.A + p.eps / k_au, 0.0};
            per_state.emplace_back(f, cap);
            per_state.emplace_back(f, cap);
        } else if (figure.count(static_cast<int>(e))) {
            Affine f{slope[e], 0.0};
            per_state.emplace_back(f, cap);
            per_state.emplace_back(f, cap);
        } else {
            ReciprocalCapacity f{outside_cap};
            per_state.emplace_back(f, cap);
            per_state.emplace_back(f, cap);
        }
        sc.costs.push_back(std::move(per_state));
    }

    ConverseInstance inst{std::move(sc), px, -1, e1, e2, e3};
    for (std::size_t r = 0; r < paths.size(); ++r)
        if (paths[r] == px.r1) inst.r1_path_index = static_cast<int>(r);
    return inst;
}

std::vector<double> converse_demand_grid(int points, double hi) {
    std::vector<double> grid;
    for (int i = 1; i <= points; ++i)
        grid.push_back(hi * static_cast<double>(i) / static_cast<double>(points));
    return grid;
}

namespace {

void scan_for_witness(const ValidatedScenario& vs, const std::vector<double>& grid,
                      ConverseReport& report, std::vector<double>* deviations) {
    Belief prior = vs.prior();
    Belief truth = Belief::dirac(2, 0);
    SolverOptions opts;
    for (double d : grid) {
        EquilibriumResult under_prior = solve_wardrop(vs.net(), vs.paths(), vs.family(), prior, d, opts);
        EquilibriumResult informed = solve_wardrop(vs.net(), vs.paths(), vs.family(), truth, d, opts);
        double worst = 0.0;
        int worst_edge = -1;
        for (std::size_t e = 0; e < under_prior.loads.size(); ++e) {
            double dev = std::abs(under_prior.loads[e] - informed.loads[e]);
            if (dev > worst) {
                worst = dev;
                worst_edge = static_cast<int>(e);
            }
        }
        if (deviations) deviations->push_back(worst);
        if (!report.witness_found && worst > 1e-3) {
            report.witness_found = true;
            report.witness_demand = d;
            report.witness_edge = worst_edge;
            report.witness_deviation = worst;
        }
    }
}

} // namespace

ConverseReport verify_converse(const ConverseInstance& inst, const std::vector<double>& grid,
                               const ConverseParams& p) {
    ValidatedScenario vs(inst.scenario);
    Belief prior = vs.prior();
    SolverOptions opts;

    ConverseReport report;
    report.all_checks_pass = true;

    std::vector<double> deviations;
    scan_for_witness(vs, grid, report, &deviations);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        double d = grid[i];
        EquilibriumResult eq = solve_wardrop(vs.net(), vs.paths(), vs.family(), prior, d, opts);
        ConverseCheckRow row;
        row.demand = d;
        row.r1_flow = inst.r1_path_index >= 0 ? eq.flow.path_flows[inst.r1_path_index] : 0.0;
        row.e1_load = eq.loads[inst.e1_edge];
        row.flow_ok = row.r1_flow <= p.kappa + 1e-6;
        row.load_ok = row.e1_load <= 1.0 + 1e-6;
        row.load_deviation = deviations[i];
        report.all_checks_pass = report.all_checks_pass && row.flow_ok && row.load_ok;
        report.rows.push_back(row);
    }

    if (!report.witness_found && !grid.empty()) {
        // Widen the scan once: same grid shape over twice the range.
        std::vector<double> widened;
        double top = *std::max_element(grid.begin(), grid.end()) * 2.0;
        for (std::size_t i = 1; i <= grid.size(); ++i)
            widened.push_back(top * static_cast<double>(i) / static_cast<double>(grid.size()));
        report.widened = true;
        scan_for_witness(vs, widened, report, nullptr);
    }
    return report;
}

void require_witness(const ConverseReport& report) {
    if (!report.witness_found)
        throw WitnessNotFound(
            "no grid demand separates the equilibrium loads under the prior from "
            "those under the true state (grid was " +
            std::string(report.widened ? "widened once" : "not widened") + ")");
}

} // namespace wardrop
