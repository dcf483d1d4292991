#ifndef WARDROP_NETWORK_HPP
#define WARDROP_NETWORK_HPP

#include "wardrop/errors.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace wardrop {

/**
 * Edge capacity: a strictly positive real or infinity.
 * Infinity is a distinguished value, never a large float, so that cut
 * arithmetic cannot overflow.
 */
class Capacity {
public:
    static Capacity infinite() { return Capacity(true, 0.0); }
    static Capacity finite(double v) { return Capacity(false, v); }

    bool is_finite() const { return !infinite_; }
    bool is_infinite() const { return infinite_; }

    // Only meaningful for finite capacities.
    double value() const { return value_; }

    // true iff the load x is strictly below capacity.
    bool admits(double x) const { return infinite_ || x < value_; }

    Capacity operator+(const Capacity& o) const {
        if (infinite_ || o.infinite_) return infinite();
        return finite(value_ + o.value_);
    }
    bool operator<(const Capacity& o) const {
        if (infinite_) return false;
        if (o.infinite_) return true;
        return value_ < o.value_;
    }
    bool operator==(const Capacity& o) const {
        return infinite_ == o.infinite_ && (infinite_ || value_ == o.value_);
    }

    std::string to_string() const;

private:
    Capacity(bool inf, double v) : infinite_(inf), value_(v) {}
    bool infinite_;
    double value_;
};

struct Edge {
    std::string id;
    std::string tail;
    std::string head;
    Capacity capacity = Capacity::infinite();
};

/**
 * Oriented multigraph with a single origin/destination pair.
 * Vertices are implicit: the union of edge endpoints plus the terminals.
 */
struct RoutingNetwork {
    std::string origin;
    std::string destination;
    std::vector<Edge> edges;
};

/**
 * A simple origin-destination path, stored as edge indices into the
 * canonical (declaration-order) edge list of the validated network.
 */
using Path = std::vector<int>;

/**
 * Series-parallel decomposition tree. Leaves are edges; internal nodes
 * compose two or more children in series or in parallel.
 */
struct SpDecomposition {
    enum class Kind { Edge, Series, Parallel };
    Kind kind = Kind::Edge;
    int edge = -1; // valid iff kind == Edge
    std::vector<SpDecomposition> children;

    bool operator==(const SpDecomposition& o) const;
    std::string to_string(const std::vector<Edge>& edges) const;
};

/**
 * The embedded three-path subgraph that characterizes non-series-parallel
 * networks: r1 visits origin, a, u, v, b, destination in order; r2_tilde
 * joins a to v and r3_tilde joins u to b, meeting r1 only at their
 * endpoints and sharing no vertex with each other.
 */
struct OdParadox {
    Path r1;
    Path r2_tilde;
    Path r3_tilde;
    std::string a, u, v, b;
    // positions of a,u,v,b in r1's vertex sequence (origin has position 0)
    int pos_a = 0, pos_u = 0, pos_v = 0, pos_b = 0;
};

/**
 * A structurally checked network: terminals distinct and present, all
 * capacities positive, every edge on at least one simple O-D path.
 * Immutable after construction; all operations on it are pure.
 */
class ValidatedNetwork {
public:
    const RoutingNetwork& graph() const { return net_; }
    const std::vector<Edge>& edges() const { return net_.edges; }
    const std::vector<std::string>& vertices() const { return vertices_; }
    const std::string& origin() const { return net_.origin; }
    const std::string& destination() const { return net_.destination; }

    int vertex_index(const std::string& v) const;
    int origin_index() const { return origin_idx_; }
    int destination_index() const { return dest_idx_; }
    int edge_tail(int e) const { return edge_tail_[e]; }
    int edge_head(int e) const { return edge_head_[e]; }
    int edge_index(const std::string& id) const; // -1 if unknown
    const std::vector<int>& out_edges(int vertex) const { return out_edges_[vertex]; }

    std::string vertex_sequence(const Path& p) const; // "O->a->D" rendering
    std::string edge_sequence(const Path& p) const;   // "e1,e3,e5" rendering

private:
    friend ValidatedNetwork validate_network(const RoutingNetwork& net);
    RoutingNetwork net_;
    std::vector<std::string> vertices_;
    std::vector<int> edge_tail_, edge_head_;
    std::vector<std::vector<int>> out_edges_;
    int origin_idx_ = -1, dest_idx_ = -1;
};

/** Checks terminals, capacities and edge usefulness; throws on failure. */
ValidatedNetwork validate_network(const RoutingNetwork& net);

/**
 * All simple O-D paths in canonical order (lexicographic by edge index
 * sequence, i.e. by declaration order of the edges). Throws PathExplosion
 * beyond max_paths.
 */
std::vector<Path> enumerate_paths(const ValidatedNetwork& net, std::size_t max_paths = 10000);

/**
 * Network capacity: the smallest capacity among all O-D cuts, computed by
 * max-flow. Infinite iff some O-D path uses only infinite-capacity edges.
 */
Capacity min_cut_capacity(const ValidatedNetwork& net);

/**
 * Two-terminal series-parallel recognition by repeated series/parallel
 * reduction. Returns the decomposition tree in canonical form, or nothing
 * if the network is not series-parallel.
 */
std::optional<SpDecomposition> is_series_parallel(const ValidatedNetwork& net);

/** Rebuilds a network (fresh vertex names, same edge ids) from a decomposition. */
RoutingNetwork recompose(const SpDecomposition& tree, const ValidatedNetwork& net);

/**
 * Finds an O-D paradox if the network is not series-parallel, nothing if
 * it is. Deterministic: the lexicographically smallest witness under the
 * canonical path order.
 */
std::optional<OdParadox> find_od_paradox(const ValidatedNetwork& net,
                                         std::size_t node_budget = 50'000'000);

/**
 * Edge loads induced by per-path flows: x_e = sum of flows of the paths
 * containing e. `flows` is aligned with `paths`.
 */
std::vector<double> loads_from_flows(const std::vector<Path>& paths,
                                     const std::vector<double>& flows,
                                     const ValidatedNetwork& net);

} // namespace wardrop

#endif
