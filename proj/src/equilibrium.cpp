#include "wardrop/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <map>

namespace wardrop {

namespace {

constexpr double kCapacityClamp = 1e-12; // loads stay below cap * (1 - clamp)

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> path_costs_at(const std::vector<Path>& paths, const CostFamily& fam,
                                  const Belief& belief, const std::vector<double>& loads) {
    std::vector<double> c(paths.size(), 0.0);
    for (std::size_t r = 0; r < paths.size(); ++r)
        for (int e : paths[r]) c[r] += fam.expected_cost(e, loads[e], belief);
    return c;
}

// Max-flow of value `demand` on capacities shrunk by `margin`; decomposed
// into flows on the enumerated paths. Used as a capacity-respecting start.
std::vector<double> spread_start(const ValidatedNetwork& net, const std::vector<Path>& paths,
                                 double demand, double margin) {
    const auto& edges = net.edges();
    const int nv = static_cast<int>(net.vertices().size());
    const int src = net.origin_index(), dst = net.destination_index();

    auto cap_of = [&edges, margin](std::size_t e) -> Capacity {
        const Capacity& c = edges[e].capacity;
        if (c.is_infinite()) return c;
        return Capacity::finite(c.value() * (1.0 - margin));
    };

    std::vector<double> flow(edges.size(), 0.0);
    double total = 0.0;
    while (total < demand) {
        std::vector<int> pred_edge(nv, -1), pred_dir(nv, 0), pred_vtx(nv, -1);
        std::vector<char> seen(nv, 0);
        std::deque<int> q{src};
        seen[src] = 1;
        while (!q.empty() && !seen[dst]) {
            int u = q.front();
            q.pop_front();
            for (std::size_t e = 0; e < edges.size(); ++e) {
                int t = net.edge_tail(static_cast<int>(e));
                int h = net.edge_head(static_cast<int>(e));
                Capacity c = cap_of(e);
                if (t == u && !seen[h] && (c.is_infinite() || flow[e] < c.value())) {
                    seen[h] = 1;
                    pred_edge[h] = static_cast<int>(e);
                    pred_dir[h] = +1;
                    pred_vtx[h] = u;
                    q.push_back(h);
                } else if (h == u && !seen[t] && flow[e] > 0.0) {
                    seen[t] = 1;
                    pred_edge[t] = static_cast<int>(e);
                    pred_dir[t] = -1;
                    pred_vtx[t] = u;
                    q.push_back(t);
                }
            }
        }
        if (!seen[dst])
            throw InfeasibleDemand("demand " + num(demand) +
                                   " cannot be routed strictly inside capacities");
        double bottleneck = demand - total;
        for (int vtx = dst; vtx != src; vtx = pred_vtx[vtx]) {
            int e = pred_edge[vtx];
            double r = pred_dir[vtx] > 0
                           ? (cap_of(e).is_infinite() ? bottleneck
                                                      : cap_of(e).value() - flow[e])
                           : flow[e];
            bottleneck = std::min(bottleneck, r);
        }
        for (int vtx = dst; vtx != src; vtx = pred_vtx[vtx]) {
            int e = pred_edge[vtx];
            flow[e] += pred_dir[vtx] > 0 ? bottleneck : -bottleneck;
        }
        total += bottleneck;
    }

    // Cancel any directed cycles of positive flow.
    while (true) {
        std::vector<int> state(nv, 0), via(nv, -1);
        std::vector<int> cycle;
        std::function<bool(int)> dfs = [&](int u) -> bool {
            state[u] = 1;
            for (int e : net.out_edges(u)) {
                if (flow[e] <= 1e-15) continue;
                int h = net.edge_head(e);
                if (state[h] == 1) {
                    cycle.push_back(e);
                    int at = u;
                    while (at != h) {
                        cycle.push_back(via[at]);
                        at = net.edge_tail(via[at]);
                    }
                    return true;
                }
                if (state[h] == 0) {
                    via[h] = e;
                    if (dfs(h)) return true;
                }
            }
            state[u] = 2;
            return false;
        };
        bool found = false;
        for (int vtx = 0; vtx < nv && !found; ++vtx)
            if (state[vtx] == 0) found = dfs(vtx);
        if (!found) break;
        double m = flow[cycle.front()];
        for (int e : cycle) m = std::min(m, flow[e]);
        for (int e : cycle) flow[e] -= m;
    }

    // Decompose the acyclic flow into flows on enumerated paths.
    std::map<Path, int> index;
    for (std::size_t r = 0; r < paths.size(); ++r) index[paths[r]] = static_cast<int>(r);
    std::vector<double> y(paths.size(), 0.0);
    double assigned = 0.0;
    while (assigned < total - 1e-12 * std::max(1.0, total)) {
        Path p;
        int at = src;
        while (at != dst) {
            int chosen = -1;
            for (int e : net.out_edges(at))
                if (flow[e] > 1e-15) {
                    chosen = e;
                    break;
                }
            if (chosen < 0) throw Error("internal: flow decomposition stalled");
            p.push_back(chosen);
            at = net.edge_head(chosen);
        }
        double m = flow[p.front()];
        for (int e : p) m = std::min(m, flow[e]);
        for (int e : p) flow[e] -= m;
        auto it = index.find(p);
        if (it == index.end()) throw Error("internal: decomposed path not enumerated");
        y[it->second] += m;
        assigned += m;
    }
    // Absorb rounding dust into the largest component.
    double sum = 0.0;
    for (double v : y) sum += v;
    if (!y.empty()) {
        auto it = std::max_element(y.begin(), y.end());
        *it += demand - sum;
    }
    return y;
}

bool respects_capacities(const ValidatedNetwork& net, const std::vector<double>& loads) {
    for (std::size_t e = 0; e < loads.size(); ++e) {
        const Capacity& c = net.edges()[e].capacity;
        if (c.is_finite() && loads[e] >= c.value() * (1.0 - kCapacityClamp)) return false;
    }
    return true;
}

} // namespace

double beckmann_potential(const ValidatedNetwork& net, const CostFamily& fam,
                          const Belief& belief, const std::vector<double>& loads) {
    double phi = 0.0;
    for (std::size_t e = 0; e < net.edges().size(); ++e)
        phi += fam.expected_antiderivative(e, loads[e], belief);
    return phi;
}

double wardrop_gap(const ValidatedNetwork& net, const std::vector<Path>& paths,
                   const CostFamily& fam, const Belief& belief, const FeasibleFlow& flow,
                   double used_threshold) {
    std::vector<double> loads = loads_from_flows(paths, flow.path_flows, net);
    std::vector<double> c = path_costs_at(paths, fam, belief, loads);
    double cmin = *std::min_element(c.begin(), c.end());
    double gap = 0.0;
    for (std::size_t r = 0; r < paths.size(); ++r)
        if (flow.path_flows[r] > used_threshold) gap = std::max(gap, c[r] - cmin);
    return gap;
}

namespace {

// One round of pairwise transfers: dearest used path feeds the cheapest
// path, with exact bisection line search on the 1-D potential. Stops at
// `target` gap or when the step budget runs out; returns the last gap.
double equilibrate_pairs(const ValidatedNetwork& net, const std::vector<Path>& paths,
                         const CostFamily& fam, const Belief& belief, std::vector<double>& y,
                         std::vector<double>& loads, const SolverOptions& opts, double target,
                         std::size_t budget, std::size_t& steps_used) {
    const std::size_t nr = paths.size();
    double gap = 0.0;
    for (std::size_t iter = 0; iter < budget; ++iter, ++steps_used) {
        std::vector<double> c = path_costs_at(paths, fam, belief, loads);
        std::size_t lo =
            static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
        double cmax = -1.0;
        std::size_t hi = nr;
        for (std::size_t r = 0; r < nr; ++r)
            if (y[r] > opts.used_threshold && c[r] > cmax) {
                cmax = c[r];
                hi = r;
            }
        gap = hi == nr ? 0.0 : std::max(0.0, cmax - c[lo]);
        if (gap <= target || hi == nr || hi == lo) return gap;

        std::vector<std::pair<int, int>> delta; // (edge, +1/-1) for the transfer
        {
            std::vector<int> d(net.edges().size(), 0);
            for (int e : paths[lo]) d[e] += 1;
            for (int e : paths[hi]) d[e] -= 1;
            for (std::size_t e = 0; e < d.size(); ++e)
                if (d[e] != 0) delta.push_back({static_cast<int>(e), d[e]});
        }
        double t_max = y[hi];
        for (auto [e, dir] : delta) {
            if (dir <= 0) continue;
            const Capacity& cap = net.edges()[e].capacity;
            if (cap.is_finite())
                t_max = std::min(t_max, cap.value() * (1.0 - kCapacityClamp) - loads[e]);
        }
        if (t_max <= 0.0) return gap; // capacity-pinned; leave it to the Newton phase

        auto phi_prime = [&](double t) {
            double g = 0.0;
            for (auto [e, dir] : delta)
                g += dir * fam.expected_cost(e, loads[e] + dir * t, belief);
            return g;
        };
        double t = t_max;
        if (phi_prime(t_max) > 0.0) {
            double a = 0.0, b = t_max;
            for (int it2 = 0; it2 < 120 && b - a > 1e-16 * std::max(1.0, t_max); ++it2) {
                double m = 0.5 * (a + b);
                (phi_prime(m) <= 0.0 ? a : b) = m;
            }
            t = 0.5 * (a + b);
        }
        y[lo] += t;
        y[hi] -= t;
        if (y[hi] < 0.0) y[hi] = 0.0;
        loads = loads_from_flows(paths, y, net);
        if (t <= 1e-18 * std::max(1.0, y[lo] + y[hi])) return gap; // numerically saturated
    }
    return gap;
}

// Solves the symmetric KKT system [H 1; 1' 0] [dy; mu] = [-g; 0] in place.
// Returns false when elimination breaks down even after a ridge retry.
bool solve_kkt(std::vector<std::vector<double>> H, std::vector<double> g,
               std::vector<double>& dy) {
    const std::size_t k = g.size();
    const std::size_t n = k + 1;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<std::vector<double>> M(n, std::vector<double>(n + 1, 0.0));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) M[i][j] = H[i][j];
            M[i][k] = 1.0;
            M[i][n] = -g[i];
            M[k][i] = 1.0;
        }
        if (attempt == 1) {
            double trace = 0.0;
            for (std::size_t i = 0; i < k; ++i) trace += H[i][i];
            double ridge = 1e-10 * (1.0 + trace / static_cast<double>(k));
            for (std::size_t i = 0; i < k; ++i) M[i][i] += ridge;
        }
        bool ok = true;
        for (std::size_t col = 0; col < n && ok; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
            if (std::abs(M[piv][col]) < 1e-300) {
                ok = false;
                break;
            }
            std::swap(M[col], M[piv]);
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col) continue;
                double f = M[r][col] / M[col][col];
                if (f == 0.0) continue;
                for (std::size_t cc = col; cc <= n; ++cc) M[r][cc] -= f * M[col][cc];
            }
        }
        if (!ok) continue;
        dy.assign(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) dy[i] = M[i][n] / M[i][i];
        return true;
    }
    return false;
}

} // namespace

EquilibriumResult solve_wardrop(const ValidatedNetwork& net, const std::vector<Path>& paths,
                                const CostFamily& fam, const Belief& belief, double demand,
                                const SolverOptions& opts) {
    if (paths.empty()) throw ValidationError("solve_wardrop: no paths");
    if (demand < 0.0) throw InfeasibleDemand("demand " + num(demand) + " is negative");
    Capacity gamma = min_cut_capacity(net);
    if (gamma.is_finite() && demand >= gamma.value())
        throw InfeasibleDemand("demand " + num(demand) + " is not below network capacity " +
                               gamma.to_string());

    const std::size_t nr = paths.size();
    std::vector<double> y(nr, 0.0);
    auto spread = [&]() {
        // Prefer a comfortably interior start; fall back to the bare clamp
        // when the demand sits very close to capacity.
        try {
            return spread_start(net, paths, demand, 1e-6);
        } catch (const InfeasibleDemand&) {
            return spread_start(net, paths, demand, kCapacityClamp);
        }
    };
    if (demand > 0.0) {
        switch (opts.init) {
        case SolverOptions::Init::FirstPath:
            y[0] = demand;
            break;
        case SolverOptions::Init::Uniform:
            std::fill(y.begin(), y.end(), demand / static_cast<double>(nr));
            break;
        case SolverOptions::Init::Spread:
            y = spread();
            break;
        }
        if (!respects_capacities(net, loads_from_flows(paths, y, net))) y = spread();
    }

    std::vector<double> loads = loads_from_flows(paths, y, net);
    std::size_t steps = 0;
    double gap = 0.0;

    if (demand > 0.0) {
        // Alternate cheap pairwise transfers with active-set Newton rounds on
        // the equal-cost conditions; Newton supplies the final digits, the
        // transfers recover whenever Newton's active set is off.
        std::vector<char> active(nr, 0);
        bool converged = false;
        const std::size_t rounds = 60;
        for (std::size_t round = 0; round < rounds && !converged && steps < opts.max_iters;
             ++round) {
            std::size_t burst = std::min<std::size_t>(200, opts.max_iters - steps);
            gap = equilibrate_pairs(net, paths, fam, belief, y, loads, opts, opts.tol, burst,
                                    steps);
            if (gap <= opts.tol) {
                converged = true;
                break;
            }

            for (std::size_t r = 0; r < nr; ++r) active[r] = y[r] > opts.used_threshold ? 1 : 0;
            for (std::size_t inner = 0; inner < 80 && steps < opts.max_iters; ++inner, ++steps) {
                std::vector<double> c = path_costs_at(paths, fam, belief, loads);
                std::size_t lo =
                    static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
                gap = 0.0;
                for (std::size_t r = 0; r < nr; ++r)
                    if (y[r] > opts.used_threshold) gap = std::max(gap, c[r] - c[lo]);
                if (gap <= opts.tol) {
                    converged = true;
                    break;
                }
                if (!active[lo]) active[lo] = 1;

                std::vector<std::size_t> S;
                for (std::size_t r = 0; r < nr; ++r)
                    if (active[r]) S.push_back(r);
                const std::size_t k = S.size();

                // Path Hessian on the active set.
                std::vector<std::vector<double>> H(k, std::vector<double>(k, 0.0));
                std::vector<std::vector<std::size_t>> edge_members(net.edges().size());
                for (std::size_t i = 0; i < k; ++i)
                    for (int e : paths[S[i]]) edge_members[e].push_back(i);
                for (std::size_t e = 0; e < net.edges().size(); ++e) {
                    if (edge_members[e].empty()) continue;
                    double w = fam.expected_derivative(e, loads[e], belief);
                    for (std::size_t i : edge_members[e])
                        for (std::size_t j : edge_members[e]) H[i][j] += w;
                }
                std::vector<double> g(k);
                for (std::size_t i = 0; i < k; ++i) g[i] = c[S[i]];

                std::vector<double> dy;
                if (!solve_kkt(H, g, dy)) break; // let the transfer phase retry
                // Ill-conditioned systems can leak demand; pin the direction
                // back onto the conservation plane.
                double drift = 0.0;
                for (double v : dy) drift += v;
                for (double& v : dy) v -= drift / static_cast<double>(k);

                // A zero-flow member pushed negative cannot move: retire it
                // and re-solve next inner round.
                bool retired = false;
                for (std::size_t i = 0; i < k; ++i)
                    if (dy[i] < 0.0 && y[S[i]] <= opts.used_threshold && S[i] != lo) {
                        active[S[i]] = 0;
                        retired = true;
                    }
                if (retired) continue;

                double t = 1.0;
                std::vector<double> dx(net.edges().size(), 0.0);
                for (std::size_t i = 0; i < k; ++i)
                    for (int e : paths[S[i]]) dx[e] += dy[i];
                for (std::size_t i = 0; i < k; ++i)
                    if (dy[i] < 0.0 && y[S[i]] + dy[i] < 0.0) t = std::min(t, y[S[i]] / -dy[i]);
                // Fraction-to-boundary rule keeps loads strictly inside capacity.
                for (std::size_t e = 0; e < net.edges().size(); ++e) {
                    const Capacity& cap = net.edges()[e].capacity;
                    if (dx[e] > 0.0 && cap.is_finite()) {
                        double room = cap.value() * (1.0 - kCapacityClamp) - loads[e];
                        if (room < dx[e] * t) t = std::max(0.0, 0.99 * room / dx[e]);
                    }
                }
                if (t <= 1e-16) break;

                // Backtrack if rounding made the step uphill or infeasible.
                double phi0 = beckmann_potential(net, fam, belief, loads);
                auto safe_potential = [&](const std::vector<double>& flows) {
                    std::vector<double> x = loads_from_flows(paths, flows, net);
                    if (!respects_capacities(net, x))
                        return std::numeric_limits<double>::infinity();
                    return beckmann_potential(net, fam, belief, x);
                };
                std::vector<double> y_new;
                int halvings = 0;
                for (;; ++halvings) {
                    y_new = y;
                    for (std::size_t i = 0; i < k; ++i) {
                        y_new[S[i]] = y[S[i]] + t * dy[i];
                        if (y_new[S[i]] < 0.0) y_new[S[i]] = 0.0;
                    }
                    double phi1 = safe_potential(y_new);
                    if (phi1 <= phi0 + 1e-12 * (1.0 + std::abs(phi0)) || halvings >= 40) break;
                    t *= 0.5;
                }
                if (halvings >= 40) break;
                y = std::move(y_new);
                // Absorb rounding drift into the largest flow; the direction
                // was projected, so the drift is at noise level.
                double sum = 0.0;
                for (double v : y) sum += v;
                if (sum > 0.0 && sum != demand) {
                    auto it = std::max_element(y.begin(), y.end());
                    *it += demand - sum;
                    if (*it < 0.0) *it = 0.0;
                }
                for (std::size_t r = 0; r < nr; ++r)
                    if (y[r] <= 0.0) {
                        y[r] = 0.0;
                        active[r] = 0;
                    }
                loads = loads_from_flows(paths, y, net);
            }
        }
        if (!converged && gap > opts.tol) throw NoConvergence(steps, gap);
    }

    EquilibriumResult out;
    out.flow = FeasibleFlow{y, demand};
    out.loads = loads;
    out.path_costs = path_costs_at(paths, fam, belief, loads);
    out.gap = wardrop_gap(net, paths, fam, belief, out.flow, opts.used_threshold);
    out.potential = beckmann_potential(net, fam, belief, loads);
    return out;
}

std::vector<std::pair<double, std::vector<double>>> equilibrium_load_map(
    const ValidatedNetwork& net, const std::vector<Path>& paths, const CostFamily& fam,
    const Belief& belief, const std::vector<double>& demand_grid, const SolverOptions& opts) {
    std::vector<std::pair<double, std::vector<double>>> out;
    for (double d : demand_grid) {
        try {
            out.push_back({d, solve_wardrop(net, paths, fam, belief, d, opts).loads});
        } catch (const Error& e) {
            throw Error("at grid demand " + num(d) + ": " + e.what());
        }
    }
    return out;
}

} // namespace wardrop
