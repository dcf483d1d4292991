#include "wardrop/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace wardrop {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_num(const std::string& tok, int line) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected a number, got '" + tok + "'");
    }
}

Capacity parse_capacity(const std::string& tok, int line) {
    if (tok == "inf") return Capacity::infinite();
    double v = parse_num(tok, line);
    if (v <= 0.0) throw ParseError(line, "capacity must be positive or 'inf'");
    return Capacity::finite(v);
}

CostFunction::Form parse_cost_form(const std::vector<std::string>& tok, std::size_t at, int line) {
    const std::string& variant = tok[at];
    std::vector<double> args;
    for (std::size_t i = at + 1; i < tok.size(); ++i) args.push_back(parse_num(tok[i], line));
    if (variant == "affine") {
        if (args.size() != 2) throw ParseError(line, "affine needs: slope intercept");
        return Affine{args[0], args[1]};
    }
    if (variant == "pwaffine") {
        if (args.size() < 3 || args.size() % 2 == 0)
            throw ParseError(line, "pwaffine needs k breakpoints then k+1 slopes");
        std::size_t k = (args.size() - 1) / 2;
        PiecewiseAffine pw;
        pw.intercept = 0.0;
        pw.breaks.assign(args.begin(), args.begin() + k);
        pw.slopes.assign(args.begin() + k, args.end());
        return pw;
    }
    if (variant == "bexp") {
        if (args.empty() || args.size() > 2)
            throw ParseError(line, "bexp needs: scale [affine-slope]");
        return BoundedExp{args[0], args.size() > 1 ? args[1] : 0.0};
    }
    if (variant == "recip") {
        if (args.size() != 1) throw ParseError(line, "recip needs: gamma");
        return ReciprocalCapacity{args[0]};
    }
    throw ParseError(line, "unknown cost variant '" + variant + "'");
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::string section;
    bool version_seen = false;

    std::optional<std::string> origin, destination, truth_label;
    std::vector<Edge> edges;
    std::vector<std::string> states;
    struct CostLine {
        std::string edge, state;
        CostFunction::Form form;
        int line;
    };
    std::vector<CostLine> cost_lines;
    std::map<std::string, double> prior;
    std::optional<DemandDistribution> demand;
    RunConfig run;

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::vector<std::string> tok = tokenize(line);
        if (tok.empty()) continue;

        if (!version_seen) {
            if (tok.size() != 2 || tok[0] != "version" || tok[1] != "1")
                throw ParseError(lineno, "file must start with 'version 1'");
            version_seen = true;
            continue;
        }
        if (tok[0].front() == '[') {
            if (tok.size() != 1 || tok[0].back() != ']')
                throw ParseError(lineno, "malformed section header");
            section = tok[0].substr(1, tok[0].size() - 2);
            if (section != "network" && section != "states" && section != "costs" &&
                section != "prior" && section != "truth" && section != "demand" &&
                section != "run")
                throw ParseError(lineno, "unknown section [" + section + "]");
            continue;
        }
        if (section == "network") {
            if (tok[0] == "origin" && tok.size() == 2)
                origin = tok[1];
            else if (tok[0] == "destination" && tok.size() == 2)
                destination = tok[1];
            else if (tok[0] == "edge" && tok.size() == 5)
                edges.push_back(Edge{tok[1], tok[2], tok[3], parse_capacity(tok[4], lineno)});
            else
                throw ParseError(lineno, "expected 'origin v' / 'destination v' / 'edge id tail head cap'");
        } else if (section == "states") {
            if (tok[0] != "state" || tok.size() < 2)
                throw ParseError(lineno, "expected 'state <label> ...'");
            for (std::size_t i = 1; i < tok.size(); ++i) states.push_back(tok[i]);
        } else if (section == "costs") {
            if (tok[0] != "cost" || tok.size() < 4)
                throw ParseError(lineno, "expected 'cost <edge> <state|*> <variant> <params...>'");
            cost_lines.push_back({tok[1], tok[2], parse_cost_form(tok, 3, lineno), lineno});
        } else if (section == "prior") {
            if (tok[0] != "weight" || tok.size() != 3)
                throw ParseError(lineno, "expected 'weight <state> <w>'");
            prior[tok[1]] = parse_num(tok[2], lineno);
        } else if (section == "truth") {
            if (tok[0] != "state" || tok.size() != 2)
                throw ParseError(lineno, "expected 'state <label>'");
            truth_label = tok[1];
        } else if (section == "demand") {
            if (tok[0] == "point" && tok.size() == 2)
                demand = DemandDistribution(PointMass{parse_num(tok[1], lineno)});
            else if (tok[0] == "uniform" && tok.size() == 3)
                demand = DemandDistribution(
                    UniformDemand{parse_num(tok[1], lineno), parse_num(tok[2], lineno)});
            else if (tok[0] == "exp" && tok.size() >= 2) {
                ExponentialDemand e{parse_num(tok[1], lineno), 0.0, std::nullopt};
                std::size_t i = 2;
                while (i < tok.size()) {
                    if (tok[i] == "shift" && i + 1 < tok.size())
                        e.shift = parse_num(tok[i + 1], lineno);
                    else if (tok[i] == "trunc" && i + 1 < tok.size())
                        e.truncate_below = parse_num(tok[i + 1], lineno);
                    else
                        throw ParseError(lineno, "unknown exp modifier '" + tok[i] + "'");
                    i += 2;
                }
                demand = DemandDistribution(e);
            } else
                throw ParseError(lineno, "expected 'point d' / 'uniform lo hi' / 'exp mean ...'");
        } else if (section == "run") {
            if (tok.size() != 2) throw ParseError(lineno, "expected '<key> <value>'");
            if (tok[0] == "horizon")
                run.horizon = static_cast<int>(parse_num(tok[1], lineno));
            else if (tok[0] == "seed")
                run.seed = static_cast<std::uint64_t>(parse_num(tok[1], lineno));
            else if (tok[0] == "tol")
                run.solver_tol = parse_num(tok[1], lineno);
            else if (tok[0] == "obstol")
                run.obs_tol = parse_num(tok[1], lineno);
            else if (tok[0] == "grid")
                run.grid_points = static_cast<int>(parse_num(tok[1], lineno));
            else if (tok[0] == "earlystop")
                run.early_stop = parse_num(tok[1], lineno) != 0.0;
            else
                throw ParseError(lineno, "unknown run key '" + tok[0] + "'");
        } else {
            throw ParseError(lineno, "content before any section header");
        }
    }

    if (!version_seen) throw ParseError(lineno, "empty scenario file");
    if (!origin || !destination) throw ValidationError("network needs origin and destination");
    if (edges.empty()) throw ValidationError("network has no edges");
    if (states.empty()) throw ValidationError("scenario declares no states");
    if (!truth_label) throw ValidationError("scenario declares no true state");
    if (!demand) throw ValidationError("scenario declares no demand distribution");

    Scenario sc{RoutingNetwork{*origin, *destination, edges},
                states,
                {},
                {},
                0,
                *demand,
                run};

    auto state_index = [&states](const std::string& label) {
        for (std::size_t i = 0; i < states.size(); ++i)
            if (states[i] == label) return static_cast<int>(i);
        return -1;
    };
    auto edge_index = [&edges](const std::string& id) {
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (edges[i].id == id) return static_cast<int>(i);
        return -1;
    };

    // Assemble the cost table, resolving '*' and cross-references.
    std::vector<std::vector<std::optional<CostFunction>>> table(
        edges.size(), std::vector<std::optional<CostFunction>>(states.size()));
    for (const CostLine& cl : cost_lines) {
        int e = edge_index(cl.edge);
        if (e < 0) throw ValidationError("cost references undefined edge '" + cl.edge + "'");
        std::vector<int> targets;
        if (cl.state == "*") {
            for (std::size_t s = 0; s < states.size(); ++s) targets.push_back(static_cast<int>(s));
        } else {
            int s = state_index(cl.state);
            if (s < 0) throw ValidationError("cost references undefined state '" + cl.state + "'");
            targets.push_back(s);
        }
        for (int s : targets)
            table[e][s] = CostFunction(cl.form, edges[e].capacity);
    }
    for (std::size_t e = 0; e < edges.size(); ++e)
        for (std::size_t s = 0; s < states.size(); ++s) {
            if (!table[e][s])
                throw ValidationError("no cost for edge " + edges[e].id + " in state " + states[s]);
        }
    for (auto& per_state : table) {
        std::vector<CostFunction> row;
        for (auto& f : per_state) row.push_back(*f);
        sc.costs.push_back(std::move(row));
    }

    sc.prior_weights.assign(states.size(), 0.0);
    for (const auto& [label, w] : prior) {
        int s = state_index(label);
        if (s < 0) throw ValidationError("prior references undefined state '" + label + "'");
        sc.prior_weights[s] = w;
    }
    double sum = 0.0;
    for (double w : sc.prior_weights) sum += w;
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("prior weights sum to " + format_double(sum) + ", not 1");

    sc.true_state = state_index(*truth_label);
    if (sc.true_state < 0)
        throw ValidationError("truth references undefined state '" + *truth_label + "'");

    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& sc) {
    std::ostringstream out;
    out << "version 1\n\n[network]\n";
    out << "origin " << sc.network.origin << "\n";
    out << "destination " << sc.network.destination << "\n";
    for (const Edge& e : sc.network.edges)
        out << "edge " << e.id << " " << e.tail << " " << e.head << " " << e.capacity.to_string()
            << "\n";
    out << "\n[states]\nstate";
    for (const auto& s : sc.states) out << " " << s;
    out << "\n\n[costs]\n";
    for (std::size_t e = 0; e < sc.costs.size(); ++e) {
        bool uniform = true;
        for (std::size_t s = 1; s < sc.states.size(); ++s)
            uniform = uniform && sc.costs[e][s].same_parameters(sc.costs[e][0]);
        if (uniform) {
            out << "cost " << sc.network.edges[e].id << " * " << sc.costs[e][0].spec_string()
                << "\n";
        } else {
            for (std::size_t s = 0; s < sc.states.size(); ++s)
                out << "cost " << sc.network.edges[e].id << " " << sc.states[s] << " "
                    << sc.costs[e][s].spec_string() << "\n";
        }
    }
    out << "\n[prior]\n";
    for (std::size_t s = 0; s < sc.states.size(); ++s)
        out << "weight " << sc.states[s] << " " << format_double(sc.prior_weights[s]) << "\n";
    out << "\n[truth]\nstate " << sc.states[sc.true_state] << "\n";
    out << "\n[demand]\n" << sc.demand.spec_string() << "\n";
    out << "\n[run]\n";
    out << "horizon " << sc.run.horizon << "\n";
    out << "seed " << sc.run.seed << "\n";
    out << "tol " << format_double(sc.run.solver_tol) << "\n";
    out << "obstol " << format_double(sc.run.obs_tol) << "\n";
    out << "grid " << sc.run.grid_points << "\n";
    out << "earlystop " << (sc.run.early_stop ? 1 : 0) << "\n";
    return out.str();
}

std::uint64_t scenario_digest(const Scenario& sc) {
    std::string text = serialize_scenario(sc);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string trace_to_csv(const Trace& tr, const ValidatedScenario& vs) {
    std::ostringstream out;
    char digest[32];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(tr.scenario_digest));
    out << "# scenario " << digest << " seed " << tr.seed << "\n";
    out << "t,demand";
    for (const Edge& e : vs.net().edges()) out << ",x_" << e.id;
    for (const Edge& e : vs.net().edges()) out << ",obs_" << e.id;
    for (const auto& s : vs.family().states()) out << ",post_" << s;
    out << "\n";
    for (const TraceStep& step : tr.steps) {
        out << step.obs.period << "," << format_double(step.obs.demand);
        for (double x : step.obs.loads) out << "," << format_double(x);
        for (const auto& o : step.obs.realized) out << "," << (o ? format_double(*o) : "");
        for (std::size_t s = 0; s < step.posterior.size(); ++s)
            out << "," << format_double(step.posterior.weight(s));
        out << "\n";
    }
    return out.str();
}

Belief final_belief_from_csv(const std::string& csv, const ValidatedScenario& vs) {
    std::istringstream in(csv);
    std::string line, last;
    std::string header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header.empty()) {
            header = line;
            continue;
        }
        last = line;
    }
    if (header.empty()) throw Error("trace CSV has no header row");
    if (last.empty()) return vs.prior(); // no periods recorded

    std::size_t nstates = vs.family().num_states();
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(last);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    // the row may end with empty observation cells that getline drops
    std::size_t expected = 2 + 2 * vs.net().edges().size() + nstates;
    while (cells.size() < expected) cells.push_back("");
    std::vector<double> w;
    for (std::size_t s = 0; s < nstates; ++s) {
        const std::string& v = cells[expected - nstates + s];
        w.push_back(v.empty() ? 0.0 : std::stod(v));
    }
    return Belief(std::move(w));
}

} // namespace wardrop
