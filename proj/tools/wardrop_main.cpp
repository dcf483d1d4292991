// Command-line front end: scenario ingestion, analysis subcommands and
// reproducible CSV emission.

#include "wardrop/counterexample.hpp"
#include "wardrop/equilibrium.hpp"
#include "wardrop/learning.hpp"
#include "wardrop/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace wardrop;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file '" + path + "'");
    out << content;
}

int cmd_validate(const std::string& scn) {
    ValidatedScenario vs(load_scenario(scn));
    std::cout << "ok: " << vs.net().edges().size() << " edges, " << vs.paths().size()
              << " paths, " << vs.family().num_states() << " states, capacity "
              << vs.capacity().to_string() << "\n";
    return 0;
}

int cmd_paths(const std::string& scn) {
    ValidatedScenario vs(load_scenario(scn));
    for (const Path& p : vs.paths()) std::cout << vs.net().edge_sequence(p) << "\n";
    return 0;
}

int cmd_capacity(const std::string& scn) {
    ValidatedScenario vs(load_scenario(scn));
    std::cout << vs.capacity().to_string() << "\n";
    return 0;
}

int cmd_sp_check(const std::string& scn) {
    ValidatedScenario vs(load_scenario(scn));
    if (auto tree = is_series_parallel(vs.net())) {
        std::cout << "series-parallel: " << tree->to_string(vs.net().edges()) << "\n";
        return 0;
    }
    std::cout << "not series-parallel\n";
    auto px = find_od_paradox(vs.net());
    if (px) {
        std::cout << "paradox r1: " << vs.net().edge_sequence(px->r1) << "\n";
        std::cout << "paradox r2~ (" << px->a << "->" << px->v
                  << "): " << vs.net().edge_sequence(px->r2_tilde) << "\n";
        std::cout << "paradox r3~ (" << px->u << "->" << px->b
                  << "): " << vs.net().edge_sequence(px->r3_tilde) << "\n";
        std::cout << "vertices a=" << px->a << " u=" << px->u << " v=" << px->v << " b=" << px->b
                  << "\n";
    }
    return 0;
}

int cmd_equilibrium(const std::string& scn, double demand, const std::string& belief_kind) {
    ValidatedScenario vs(load_scenario(scn));
    Belief b = belief_kind == "truth"
                   ? Belief::dirac(vs.family().num_states(), vs.scenario().true_state)
                   : vs.prior();
    SolverOptions opts;
    opts.tol = vs.scenario().run.solver_tol;
    EquilibriumResult eq = solve_wardrop(vs.net(), vs.paths(), vs.family(), b, demand, opts);
    std::cout << "item,key,value\n";
    for (std::size_t e = 0; e < eq.loads.size(); ++e)
        std::cout << "load," << vs.net().edges()[e].id << "," << format_double(eq.loads[e]) << "\n";
    for (std::size_t r = 0; r < vs.paths().size(); ++r) {
        std::string key = vs.net().edge_sequence(vs.paths()[r]);
        for (char& c : key)
            if (c == ',') c = '|';
        std::cout << "path_cost," << key << "," << format_double(eq.path_costs[r]) << "\n";
        std::cout << "path_flow," << key << "," << format_double(eq.flow.path_flows[r]) << "\n";
    }
    std::cout << "gap,," << format_double(eq.gap) << "\n";
    std::cout << "potential,," << format_double(eq.potential) << "\n";
    return 0;
}

int cmd_simulate(const std::string& scn, std::uint64_t seed, bool seed_set, int horizon,
                 const std::string& out_path) {
    Scenario sc = load_scenario(scn);
    if (seed_set) sc.run.seed = seed;
    if (horizon > 0) sc.run.horizon = horizon;
    ValidatedScenario vs(sc);
    Trace tr = run_dynamics(vs);
    write_file(out_path, trace_to_csv(tr, vs));
    StrongLearningVerdict strong = check_strong_learning(tr, vs);
    std::cout << "periods " << tr.steps.size() << "\n";
    std::cout << "stabilized_after " << tr.stabilization_period << "\n";
    std::cout << "strong_learning "
              << (strong.achieved ? "achieved_at_" + std::to_string(strong.period)
                                  : std::string("not_by_horizon"))
              << "\n";
    return 0;
}

int cmd_weak_check(const std::string& scn, const std::string& trace_path, int grid_n) {
    ValidatedScenario vs(load_scenario(scn));
    Belief final_belief = final_belief_from_csv(read_file(trace_path), vs);
    int n = grid_n > 0 ? grid_n : vs.scenario().run.grid_points;
    std::vector<double> grid = default_demand_grid(vs, n);
    WeakLearningVerdict v = check_weak_learning(vs, final_belief, grid);
    if (v.holds) {
        std::cout << "HoldsOnGrid max_deviation " << format_double(v.max_deviation) << "\n";
    } else {
        std::cout << "FailsAt demand " << format_double(v.fail_demand) << " edge "
                  << vs.net().edges()[v.fail_edge].id << " deviation "
                  << format_double(v.fail_deviation) << "\n";
    }
    return 0;
}

int cmd_counterexample(const std::string& scn, double A, double eps, double kappa,
                       const std::string& out_path, int grid_n) {
    Scenario host = load_scenario(scn);
    ValidatedNetwork net = validate_network(host.network);
    ConverseParams p{A, eps, kappa};
    ConverseInstance inst = build_converse_instance(net, p);
    if (!out_path.empty()) write_file(out_path, serialize_scenario(inst.scenario));

    ConverseReport report = verify_converse(inst, converse_demand_grid(grid_n), p);
    std::cout << "demand,r1_flow,e1_load,flow_ok,load_ok,load_deviation\n";
    for (const auto& row : report.rows)
        std::cout << format_double(row.demand) << "," << format_double(row.r1_flow) << ","
                  << format_double(row.e1_load) << "," << (row.flow_ok ? 1 : 0) << ","
                  << (row.load_ok ? 1 : 0) << "," << format_double(row.load_deviation) << "\n";
    std::cout << "# checks_i_ii " << (report.all_checks_pass ? "pass" : "FAIL") << "\n";
    if (report.witness_found) {
        std::cout << "# witness demand " << format_double(report.witness_demand) << " edge "
                  << inst.scenario.network.edges[report.witness_edge].id << " deviation "
                  << format_double(report.witness_deviation) << "\n";
    }
    require_witness(report); // throws when the load maps never separate
    return report.all_checks_pass ? 0 : 1;
}

int cmd_sweep(const std::string& scn, int seeds, const std::string& out_path) {
    Scenario base = load_scenario(scn);
    std::ostringstream csv;
    csv << "seed,strong_at,weak_verdict,max_dev\n";
    for (int i = 0; i < seeds; ++i) {
        Scenario sc = base;
        sc.run.seed = base.run.seed + static_cast<std::uint64_t>(i);
        ValidatedScenario vs(sc);
        Trace tr = run_dynamics(vs);
        StrongLearningVerdict strong = check_strong_learning(tr, vs);
        std::vector<double> grid = default_demand_grid(vs, sc.run.grid_points);
        WeakLearningVerdict weak = check_weak_learning(vs, tr.final_belief, grid);
        csv << sc.run.seed << "," << (strong.achieved ? std::to_string(strong.period) : "-") << ","
            << (weak.holds ? "holds" : "fails_at_" + format_double(weak.fail_demand)) << ","
            << format_double(weak.holds ? weak.max_deviation : weak.fail_deviation) << "\n";
    }
    if (out_path.empty())
        std::cout << csv.str();
    else
        write_file(out_path, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wardrop: dynamic nonatomic routing games with an unknown network state"};
    app.require_subcommand(1);

    std::string scn, out_path, trace_path, belief_kind = "prior";
    double demand = 0.0, A = 4.0, eps = 0.3, kappa = 0.4;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int horizon = 0, grid_n = 33, seeds = 10;

    auto* c_validate = app.add_subcommand("validate", "parse and validate a scenario file");
    c_validate->add_option("scenario", scn)->required();

    auto* c_paths = app.add_subcommand("paths", "list the origin-destination paths");
    c_paths->add_option("scenario", scn)->required();

    auto* c_capacity = app.add_subcommand("capacity", "print the min-cut network capacity");
    c_capacity->add_option("scenario", scn)->required();

    auto* c_sp = app.add_subcommand("sp-check", "series-parallel recognition / paradox witness");
    c_sp->add_option("scenario", scn)->required();

    auto* c_eq = app.add_subcommand("equilibrium", "solve one equilibrium, print CSV");
    c_eq->add_option("scenario", scn)->required();
    c_eq->add_option("--demand", demand)->required();
    c_eq->add_option("--belief", belief_kind)->check(CLI::IsMember({"prior", "truth"}));

    auto* c_sim = app.add_subcommand("simulate", "run the learning dynamics, write a trace CSV");
    c_sim->add_option("scenario", scn)->required();
    c_sim->add_option("--seed", seed);
    c_sim->add_option("--horizon", horizon);
    c_sim->add_option("--out", out_path)->required();

    auto* c_weak = app.add_subcommand("weak-check", "compare load maps under a trace's final belief");
    c_weak->add_option("scenario", scn)->required();
    c_weak->add_option("--trace", trace_path)->required();
    c_weak->add_option("--grid", grid_n);

    auto* c_ctr = app.add_subcommand("counterexample", "build and verify a learning-failure scenario");
    c_ctr->add_option("network", scn)->required();
    c_ctr->add_option("--A", A);
    c_ctr->add_option("--eps", eps);
    c_ctr->add_option("--kappa", kappa);
    c_ctr->add_option("--out", out_path);
    c_ctr->add_option("--grid", grid_n);

    auto* c_sweep = app.add_subcommand("sweep", "replicate the dynamics over consecutive seeds");
    c_sweep->add_option("scenario", scn)->required();
    c_sweep->add_option("--seeds", seeds);
    c_sweep->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    seed_set = c_sim->count("--seed") > 0;

    try {
        if (app.got_subcommand(c_validate)) return cmd_validate(scn);
        if (app.got_subcommand(c_paths)) return cmd_paths(scn);
        if (app.got_subcommand(c_capacity)) return cmd_capacity(scn);
        if (app.got_subcommand(c_sp)) return cmd_sp_check(scn);
        if (app.got_subcommand(c_eq)) return cmd_equilibrium(scn, demand, belief_kind);
        if (app.got_subcommand(c_sim)) return cmd_simulate(scn, seed, seed_set, horizon, out_path);
        if (app.got_subcommand(c_weak)) return cmd_weak_check(scn, trace_path, grid_n);
        if (app.got_subcommand(c_ctr)) return cmd_counterexample(scn, A, eps, kappa, out_path, grid_n);
        if (app.got_subcommand(c_sweep)) return cmd_sweep(scn, seeds, out_path);
    } catch (const wardrop::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
