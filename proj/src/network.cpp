#include "wardrop/network.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <set>

namespace wardrop {

std::string Capacity::to_string() const {
    if (infinite_) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value_);
    return buf;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

int ValidatedNetwork::vertex_index(const std::string& v) const {
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        if (vertices_[i] == v) return static_cast<int>(i);
    return -1;
}

int ValidatedNetwork::edge_index(const std::string& id) const {
    for (std::size_t i = 0; i < net_.edges.size(); ++i)
        if (net_.edges[i].id == id) return static_cast<int>(i);
    return -1;
}

std::string ValidatedNetwork::vertex_sequence(const Path& p) const {
    if (p.empty()) return origin();
    std::string s = net_.edges[p.front()].tail;
    for (int e : p) {
        s += "->";
        s += net_.edges[e].head;
    }
    return s;
}

std::string ValidatedNetwork::edge_sequence(const Path& p) const {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ",";
        s += net_.edges[p[i]].id;
    }
    return s;
}

namespace {

// DFS enumeration of simple O-D paths, out-edges visited in declaration
// order so the result is lexicographic by edge-index sequence.
void dfs_paths(const std::vector<std::vector<int>>& out_edges, const std::vector<int>& heads,
               int vertex, int dest, std::vector<char>& visited, Path& current,
               std::vector<Path>& result, std::size_t max_paths) {
    if (vertex == dest) {
        if (result.size() >= max_paths) throw PathExplosion(max_paths);
        result.push_back(current);
        return;
    }
    visited[vertex] = 1;
    for (int e : out_edges[vertex]) {
        int h = heads[e];
        if (visited[h]) continue;
        current.push_back(e);
        dfs_paths(out_edges, heads, h, dest, visited, current, result, max_paths);
        current.pop_back();
    }
    visited[vertex] = 0;
}

} // namespace

ValidatedNetwork validate_network(const RoutingNetwork& net) {
    if (net.origin.empty() || net.destination.empty())
        throw BadTerminals("origin and destination must be named");
    if (net.origin == net.destination)
        throw BadTerminals("origin equals destination ('" + net.origin + "')");
    if (net.edges.empty())
        throw BadTerminals("network has no edges");

    ValidatedNetwork v;
    v.net_ = net;

    auto add_vertex = [&v](const std::string& name) {
        if (v.vertex_index(name) < 0) v.vertices_.push_back(name);
    };
    add_vertex(net.origin);
    add_vertex(net.destination);
    std::set<std::string> ids;
    for (const Edge& e : net.edges) {
        if (!ids.insert(e.id).second)
            throw ValidationError("duplicate edge id '" + e.id + "'");
        if (e.capacity.is_finite() && e.capacity.value() <= 0.0)
            throw NonpositiveCapacity(e.id);
        add_vertex(e.tail);
        add_vertex(e.head);
    }

    v.origin_idx_ = v.vertex_index(net.origin);
    v.dest_idx_ = v.vertex_index(net.destination);
    v.out_edges_.assign(v.vertices_.size(), {});
    for (std::size_t i = 0; i < net.edges.size(); ++i) {
        v.edge_tail_.push_back(v.vertex_index(net.edges[i].tail));
        v.edge_head_.push_back(v.vertex_index(net.edges[i].head));
        v.out_edges_[v.edge_tail_.back()].push_back(static_cast<int>(i));
    }

    // Every edge must appear on at least one simple O-D path.
    std::vector<Path> paths;
    Path current;
    std::vector<char> visited(v.vertices_.size(), 0);
    dfs_paths(v.out_edges_, v.edge_head_, v.origin_idx_, v.dest_idx_, visited, current, paths,
              100000);
    std::vector<char> used(net.edges.size(), 0);
    for (const Path& p : paths)
        for (int e : p) used[e] = 1;
    for (std::size_t i = 0; i < net.edges.size(); ++i)
        if (!used[i]) throw DanglingEdge(net.edges[i].id);

    return v;
}

std::vector<Path> enumerate_paths(const ValidatedNetwork& net, std::size_t max_paths) {
    std::vector<Path> result;
    Path current;
    std::vector<char> visited(net.vertices().size(), 0);
    std::vector<int> heads;
    for (std::size_t e = 0; e < net.edges().size(); ++e) heads.push_back(net.edge_head(e));
    std::vector<std::vector<int>> out;
    for (std::size_t vtx = 0; vtx < net.vertices().size(); ++vtx)
        out.push_back(net.out_edges(static_cast<int>(vtx)));
    dfs_paths(out, heads, net.origin_index(), net.destination_index(), visited, current, result,
              max_paths);
    return result;
}

// ---------------------------------------------------------------------------
// min cut via Edmonds-Karp max flow with distinguished infinite capacities
// ---------------------------------------------------------------------------

Capacity min_cut_capacity(const ValidatedNetwork& net) {
    const auto& edges = net.edges();
    const int nv = static_cast<int>(net.vertices().size());
    const int src = net.origin_index();
    const int dst = net.destination_index();

    // If an O-D path of infinite-capacity edges exists, no finite cut exists.
    {
        std::vector<char> seen(nv, 0);
        std::deque<int> q{src};
        seen[src] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int e : net.out_edges(u)) {
                if (edges[e].capacity.is_finite()) continue;
                int h = net.edge_head(e);
                if (!seen[h]) {
                    seen[h] = 1;
                    q.push_back(h);
                }
            }
        }
        if (seen[dst]) return Capacity::infinite();
    }

    std::vector<double> flow(edges.size(), 0.0);
    double total = 0.0;
    while (true) {
        // BFS over residual arcs: forward where flow < capacity, backward where flow > 0.
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
                if (t == u && !seen[h]) {
                    bool residual = edges[e].capacity.is_infinite() ||
                                    flow[e] < edges[e].capacity.value() - 1e-15;
                    if (residual) {
                        seen[h] = 1;
                        pred_edge[h] = static_cast<int>(e);
                        pred_dir[h] = +1;
                        pred_vtx[h] = u;
                        q.push_back(h);
                    }
                } else if (h == u && !seen[t] && flow[e] > 1e-15) {
                    seen[t] = 1;
                    pred_edge[t] = static_cast<int>(e);
                    pred_dir[t] = -1;
                    pred_vtx[t] = u;
                    q.push_back(t);
                }
            }
        }
        if (!seen[dst]) break;

        // Bottleneck along the augmenting path (always finite: an all-infinite
        // forward path was excluded above, backward residuals are finite).
        double bottleneck = -1.0;
        for (int vtx = dst; vtx != src; vtx = pred_vtx[vtx]) {
            int e = pred_edge[vtx];
            double r;
            if (pred_dir[vtx] > 0) {
                if (edges[e].capacity.is_infinite()) continue;
                r = edges[e].capacity.value() - flow[e];
            } else {
                r = flow[e];
            }
            if (bottleneck < 0.0 || r < bottleneck) bottleneck = r;
        }
        for (int vtx = dst; vtx != src; vtx = pred_vtx[vtx]) {
            int e = pred_edge[vtx];
            flow[e] += pred_dir[vtx] > 0 ? bottleneck : -bottleneck;
        }
        total += bottleneck;
    }
    return Capacity::finite(total);
}

// ---------------------------------------------------------------------------
// series-parallel recognition by reduction
// ---------------------------------------------------------------------------

namespace {

struct RedEdge {
    int tail, head;
    SpDecomposition tree;
    bool active = true;
};

void flatten(SpDecomposition& node) {
    for (auto& c : node.children) flatten(c);
    if (node.kind == SpDecomposition::Kind::Edge) return;
    std::vector<SpDecomposition> flat;
    for (auto& c : node.children) {
        if (c.kind == node.kind) {
            for (auto& gc : c.children) flat.push_back(std::move(gc));
        } else {
            flat.push_back(std::move(c));
        }
    }
    node.children = std::move(flat);
}

void sort_parallel(SpDecomposition& node, const std::vector<Edge>& edges) {
    for (auto& c : node.children) sort_parallel(c, edges);
    if (node.kind == SpDecomposition::Kind::Parallel) {
        std::sort(node.children.begin(), node.children.end(),
                  [&edges](const SpDecomposition& x, const SpDecomposition& y) {
                      return x.to_string(edges) < y.to_string(edges);
                  });
    }
}

} // namespace

bool SpDecomposition::operator==(const SpDecomposition& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Edge) return edge == o.edge;
    return children == o.children;
}

std::string SpDecomposition::to_string(const std::vector<Edge>& edges) const {
    if (kind == Kind::Edge) return edges[edge].id;
    std::string s = kind == Kind::Series ? "S(" : "P(";
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) s += ",";
        s += children[i].to_string(edges);
    }
    s += ")";
    return s;
}

std::optional<SpDecomposition> is_series_parallel(const ValidatedNetwork& net) {
    std::vector<RedEdge> work;
    for (std::size_t i = 0; i < net.edges().size(); ++i) {
        SpDecomposition leaf;
        leaf.kind = SpDecomposition::Kind::Edge;
        leaf.edge = static_cast<int>(i);
        work.push_back({net.edge_tail(static_cast<int>(i)), net.edge_head(static_cast<int>(i)),
                        std::move(leaf), true});
    }
    const int nv = static_cast<int>(net.vertices().size());
    const int O = net.origin_index(), D = net.destination_index();

    bool changed = true;
    while (changed) {
        changed = false;

        // Parallel reduction: merge same-direction duplicates.
        std::map<std::pair<int, int>, std::vector<int>> groups;
        for (std::size_t i = 0; i < work.size(); ++i)
            if (work[i].active) groups[{work[i].tail, work[i].head}].push_back(static_cast<int>(i));
        for (auto& [key, members] : groups) {
            if (members.size() < 2) continue;
            SpDecomposition node;
            node.kind = SpDecomposition::Kind::Parallel;
            for (int m : members) {
                node.children.push_back(std::move(work[m].tree));
                work[m].active = false;
            }
            work.push_back({key.first, key.second, std::move(node), true});
            changed = true;
        }

        // Series reduction: contract internal vertices of in/out degree one.
        for (int vtx = 0; vtx < nv; ++vtx) {
            if (vtx == O || vtx == D) continue;
            int in_e = -1, out_e = -1, in_deg = 0, out_deg = 0;
            for (std::size_t i = 0; i < work.size(); ++i) {
                if (!work[i].active) continue;
                if (work[i].head == vtx) {
                    ++in_deg;
                    in_e = static_cast<int>(i);
                }
                if (work[i].tail == vtx) {
                    ++out_deg;
                    out_e = static_cast<int>(i);
                }
            }
            if (in_deg != 1 || out_deg != 1) continue;
            SpDecomposition node;
            node.kind = SpDecomposition::Kind::Series;
            node.children.push_back(std::move(work[in_e].tree));
            node.children.push_back(std::move(work[out_e].tree));
            work.push_back({work[in_e].tail, work[out_e].head, std::move(node), true});
            work[in_e].active = false;
            work[out_e].active = false;
            changed = true;
        }
    }

    std::vector<int> remaining;
    for (std::size_t i = 0; i < work.size(); ++i)
        if (work[i].active) remaining.push_back(static_cast<int>(i));
    if (remaining.size() != 1) return std::nullopt;
    RedEdge& last = work[remaining.front()];
    if (last.tail != O || last.head != D) return std::nullopt;

    SpDecomposition tree = std::move(last.tree);
    flatten(tree);
    sort_parallel(tree, net.edges());
    return tree;
}

namespace {

// Materializes a decomposition subtree between two given vertex names.
void emit(const SpDecomposition& node, const std::vector<Edge>& edges, const std::string& from,
          const std::string& to, int& fresh, std::vector<Edge>& out) {
    switch (node.kind) {
    case SpDecomposition::Kind::Edge:
        out.push_back({edges[node.edge].id, from, to, edges[node.edge].capacity});
        break;
    case SpDecomposition::Kind::Series: {
        std::string at = from;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            std::string next = i + 1 == node.children.size() ? to : "v" + std::to_string(fresh++);
            emit(node.children[i], edges, at, next, fresh, out);
            at = next;
        }
        break;
    }
    case SpDecomposition::Kind::Parallel:
        for (const auto& c : node.children) emit(c, edges, from, to, fresh, out);
        break;
    }
}

} // namespace

RoutingNetwork recompose(const SpDecomposition& tree, const ValidatedNetwork& net) {
    RoutingNetwork out;
    out.origin = net.origin();
    out.destination = net.destination();
    int fresh = 0;
    emit(tree, net.edges(), out.origin, out.destination, fresh, out.edges);
    // Keep the original declaration order so edge indices stay comparable.
    std::sort(out.edges.begin(), out.edges.end(), [&net](const Edge& x, const Edge& y) {
        return net.edge_index(x.id) < net.edge_index(y.id);
    });
    return out;
}

// ---------------------------------------------------------------------------
// O-D paradox search
// ---------------------------------------------------------------------------

namespace {

struct ParadoxBudget {
    std::size_t remaining;
    void spend() {
        if (remaining == 0) throw SearchBudgetExceeded("O-D paradox search");
        --remaining;
    }
};

// Enumerates simple paths from `from` to `to` avoiding `forbidden` vertices,
// in lexicographic edge order; calls sink until it returns true.
bool dfs_connector(const ValidatedNetwork& net, int from, int to,
                   std::vector<char>& forbidden, Path& current, ParadoxBudget& budget,
                   const std::function<bool(const Path&)>& sink) {
    budget.spend();
    if (from == to) return !current.empty() && sink(current);
    forbidden[from] = 1;
    for (int e : net.out_edges(from)) {
        int h = net.edge_head(e);
        if (forbidden[h] && h != to) continue;
        current.push_back(e);
        if (dfs_connector(net, h, to, forbidden, current, budget, sink)) {
            current.pop_back();
            forbidden[from] = 0;
            return true;
        }
        current.pop_back();
    }
    forbidden[from] = 0;
    return false;
}

} // namespace

std::optional<OdParadox> find_od_paradox(const ValidatedNetwork& net, std::size_t node_budget) {
    std::vector<Path> paths = enumerate_paths(net);
    ParadoxBudget budget{node_budget};
    const int nv = static_cast<int>(net.vertices().size());

    for (const Path& r1 : paths) {
        // Vertex sequence along r1.
        std::vector<int> seq{net.origin_index()};
        for (int e : r1) seq.push_back(net.edge_head(e));
        const int k = static_cast<int>(seq.size()) - 1;
        if (k < 3) continue; // needs at least three internal segments

        for (int pa = 0; pa + 3 <= k; ++pa)
            for (int pu = pa + 1; pu + 2 <= k; ++pu)
                for (int pv = pu + 1; pv + 1 <= k; ++pv)
                    for (int pb = pv + 1; pb <= k; ++pb) {
                        std::optional<OdParadox> found;
                        std::vector<char> forbid2(nv, 0);
                        for (int s : seq) forbid2[s] = 1;
                        forbid2[seq[pa]] = 0;
                        forbid2[seq[pv]] = 0;
                        Path r2;
                        dfs_connector(
                            net, seq[pa], seq[pv], forbid2, r2, budget,
                            [&](const Path& r2t) {
                                std::vector<char> forbid3(nv, 0);
                                for (int s : seq) forbid3[s] = 1;
                                for (int e : r2t) {
                                    forbid3[net.edge_tail(e)] = 1;
                                    forbid3[net.edge_head(e)] = 1;
                                }
                                forbid3[seq[pu]] = 0;
                                forbid3[seq[pb]] = 0;
                                Path r3;
                                return dfs_connector(
                                    net, seq[pu], seq[pb], forbid3, r3, budget,
                                    [&](const Path& r3t) {
                                        OdParadox p;
                                        p.r1 = r1;
                                        p.r2_tilde = r2t;
                                        p.r3_tilde = r3t;
                                        p.a = net.vertices()[seq[pa]];
                                        p.u = net.vertices()[seq[pu]];
                                        p.v = net.vertices()[seq[pv]];
                                        p.b = net.vertices()[seq[pb]];
                                        p.pos_a = pa;
                                        p.pos_u = pu;
                                        p.pos_v = pv;
                                        p.pos_b = pb;
                                        found = std::move(p);
                                        return true;
                                    });
                            });
                        if (found) return found;
                    }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// loads
// ---------------------------------------------------------------------------

std::vector<double> loads_from_flows(const std::vector<Path>& paths,
                                     const std::vector<double>& flows,
                                     const ValidatedNetwork& net) {
    if (paths.size() != flows.size())
        throw ValidationError("loads_from_flows: paths and flows differ in length");
    std::vector<double> loads(net.edges().size(), 0.0);
    for (std::size_t r = 0; r < paths.size(); ++r)
        for (int e : paths[r]) loads[e] += flows[r];
    return loads;
}

} // namespace wardrop
