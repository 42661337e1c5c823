#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mdmc {

// Subset of the edges of a fixed graph, one bit per canonical edge index.
class EdgeSet {
public:
    EdgeSet() = default;
    explicit EdgeSet(int m) : m_(m), blocks_((m + 63) / 64, 0) {}

    int size() const { return m_; }
    bool test(int e) const { return (blocks_[e >> 6] >> (e & 63)) & 1; }
    void set(int e, bool v = true) {
        uint64_t mask = 1ULL << (e & 63);
        if (v) blocks_[e >> 6] |= mask;
        else blocks_[e >> 6] &= ~mask;
    }
    void flip(int e) { blocks_[e >> 6] ^= 1ULL << (e & 63); }

    int count() const;
    bool any() const;
    bool empty() const { return !any(); }

    EdgeSet operator^(const EdgeSet& o) const;
    EdgeSet operator&(const EdgeSet& o) const;
    EdgeSet operator|(const EdgeSet& o) const;
    // this \ o
    EdgeSet minus(const EdgeSet& o) const;
    bool contains(const EdgeSet& o) const;  // o subset of this

    bool operator==(const EdgeSet& o) const { return m_ == o.m_ && blocks_ == o.blocks_; }
    bool operator<(const EdgeSet& o) const;

    std::vector<int> indices() const;
    template <typename F>
    void for_each(F&& f) const {
        for (size_t b = 0; b < blocks_.size(); ++b) {
            uint64_t w = blocks_[b];
            while (w) {
                int bit = __builtin_ctzll(w);
                f(static_cast<int>(b * 64 + bit));
                w &= w - 1;
            }
        }
    }

    size_t hash() const;

    static EdgeSet of(int m, std::initializer_list<int> edges) {
        EdgeSet s(m);
        for (int e : edges) s.set(e);
        return s;
    }
    static EdgeSet of(int m, const std::vector<int>& edges) {
        EdgeSet s(m);
        for (int e : edges) s.set(e);
        return s;
    }

private:
    int m_ = 0;
    std::vector<uint64_t> blocks_;
};

struct EdgeSetHash {
    size_t operator()(const EdgeSet& s) const { return s.hash(); }
};

// A matching is an EdgeSet with no two members sharing a vertex; validity is
// checked by is_matching rather than encoded in the type.
using Matching = EdgeSet;

struct Edge {
    int u, v;  // u < v for edges built by canonical constructors
    bool incident(int w) const { return u == w || v == w; }
    int other(int w) const { return u == w ? v : u; }
};

// Undirected graph with canonical 0..m-1 edge indices and a total vertex
// order (default: numeric index order) used for deterministic tie-breaking.
// Public constructors enforce simplicity; merged graphs produced by the flow
// encoding may carry one parallel edge pair and are built with allow_parallel.
class Graph {
public:
    Graph() = default;
    Graph(int n, std::vector<std::pair<int, int>> edges, bool allow_parallel = false);

    // Sorts the edge list lexicographically by (min endpoint, max endpoint)
    // before assigning indices; generators use this.
    static Graph canonical(int n, std::vector<std::pair<int, int>> edges);

    int vertex_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(int e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& incident_edges(int v) const { return adjacency_[v]; }
    int max_degree() const { return max_degree_; }
    bool has_parallel_edges() const { return has_parallel_; }

    // Position of v in the total vertex order; larger position = later vertex.
    int order_position(int v) const { return order_position_[v]; }
    void set_vertex_order(const std::vector<int>& order);  // order[i] = i-th smallest vertex
    std::vector<int> vertex_order_list() const;            // inverse of order_position
    // True iff a comes after b in the total order.
    bool vertex_greater(int a, int b) const { return order_position_[a] > order_position_[b]; }

    std::optional<int> find_edge(int u, int v) const;

    EdgeSet empty_set() const { return EdgeSet(edge_count()); }

    bool operator==(const Graph& o) const;

    // Text format: first line "n m", then m lines "u v"; '#' starts a comment
    // line; edge index = line order.
    static Graph read_text(std::istream& in);
    static Graph read_text_file(const std::string& path);
    void write_text(std::ostream& out) const;
    std::string to_text() const;

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<int> order_position_;
    int max_degree_ = 0;
    bool has_parallel_ = false;
};

enum class ComponentKind { Path, EvenCycle, Other };

// One connected component of the symmetric difference of two matchings:
// an alternating path or even cycle.  "Other" only arises for non-matching
// inputs used in tests.
struct DiffComponent {
    EdgeSet edges;
    ComponentKind kind = ComponentKind::Other;
    std::vector<int> endpoint_vertices;  // empty for cycles, two for paths

    // Edges in traversal order along the path/cycle; for paths the walk starts
    // at ordered_from; for cycles it is a full cyclic walk from ordered_from.
    std::vector<int> ordered_edges(const Graph& g, int from_vertex) const;
    // Vertices visited by the walk that produced ordered_edges (one more entry
    // than edges for paths, same count + closing vertex for cycles).
    std::vector<int> ordered_vertices(const Graph& g, int from_vertex) const;
};

bool is_matching(const Graph& g, const EdgeSet& s);

// Decomposition of x xor y into alternating paths and even cycles.  Total on
// arbitrary EdgeSets: components that are not simple alternating paths/cycles
// are classified Other.
std::vector<DiffComponent> symmetric_difference_components(const Graph& g, const EdgeSet& x,
                                                           const EdgeSet& y);

std::optional<DiffComponent> component_containing(const std::vector<DiffComponent>& components,
                                                  int e);

// All edges sharing a vertex with some edge of s, including s itself.
EdgeSet inclusive_boundary(const Graph& g, const EdgeSet& s);
// inclusive_boundary minus s.
EdgeSet boundary(const Graph& g, const EdgeSet& s);
// Convention for an empty set around a vertex: all edges at v.
EdgeSet inclusive_boundary_of_vertex(const Graph& g, int v);

}  // namespace mdmc
