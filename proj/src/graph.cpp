#include "mdmc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mdmc {

int EdgeSet::count() const {
    int c = 0;
    for (uint64_t w : blocks_) c += __builtin_popcountll(w);
    return c;
}

bool EdgeSet::any() const {
    for (uint64_t w : blocks_) if (w) return true;
    return false;
}

EdgeSet EdgeSet::operator^(const EdgeSet& o) const {
    EdgeSet r(m_);
    for (size_t i = 0; i < blocks_.size(); ++i) r.blocks_[i] = blocks_[i] ^ o.blocks_[i];
    return r;
}

EdgeSet EdgeSet::operator&(const EdgeSet& o) const {
    EdgeSet r(m_);
    for (size_t i = 0; i < blocks_.size(); ++i) r.blocks_[i] = blocks_[i] & o.blocks_[i];
    return r;
}

EdgeSet EdgeSet::operator|(const EdgeSet& o) const {
    EdgeSet r(m_);
    for (size_t i = 0; i < blocks_.size(); ++i) r.blocks_[i] = blocks_[i] | o.blocks_[i];
    return r;
}

EdgeSet EdgeSet::minus(const EdgeSet& o) const {
    EdgeSet r(m_);
    for (size_t i = 0; i < blocks_.size(); ++i) r.blocks_[i] = blocks_[i] & ~o.blocks_[i];
    return r;
}

bool EdgeSet::contains(const EdgeSet& o) const {
    for (size_t i = 0; i < blocks_.size(); ++i)
        if ((o.blocks_[i] & ~blocks_[i]) != 0) return false;
    return true;
}

bool EdgeSet::operator<(const EdgeSet& o) const {
    if (m_ != o.m_) return m_ < o.m_;
    for (size_t i = blocks_.size(); i-- > 0;)
        if (blocks_[i] != o.blocks_[i]) return blocks_[i] < o.blocks_[i];
    return false;
}

std::vector<int> EdgeSet::indices() const {
    std::vector<int> out;
    for_each([&](int e) { out.push_back(e); });
    return out;
}

size_t EdgeSet::hash() const {
    uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(m_);
    for (uint64_t w : blocks_) {
        h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h);
}

Graph::Graph(int n, std::vector<std::pair<int, int>> edge_pairs, bool allow_parallel) : n_(n) {
    if (n < 0) throw std::invalid_argument("negative vertex count");
    adjacency_.assign(n, {});
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edge_pairs) {
        if (u == v) throw std::invalid_argument("self-loop");
        if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("vertex id out of range");
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) {
            if (!allow_parallel) throw std::invalid_argument("parallel edge");
            has_parallel_ = true;
        }
        int idx = static_cast<int>(edges_.size());
        edges_.push_back({u, v});
        adjacency_[u].push_back(idx);
        adjacency_[v].push_back(idx);
    }
    max_degree_ = 0;
    for (const auto& inc : adjacency_) max_degree_ = std::max(max_degree_, static_cast<int>(inc.size()));
    order_position_.resize(n);
    for (int i = 0; i < n; ++i) order_position_[i] = i;
}

Graph Graph::canonical(int n, std::vector<std::pair<int, int>> edge_pairs) {
    for (auto& [u, v] : edge_pairs)
        if (u > v) std::swap(u, v);
    std::sort(edge_pairs.begin(), edge_pairs.end());
    return Graph(n, std::move(edge_pairs));
}

void Graph::set_vertex_order(const std::vector<int>& order) {
    if (static_cast<int>(order.size()) != n_) throw std::invalid_argument("vertex order size mismatch");
    std::vector<int> pos(n_, -1);
    for (int i = 0; i < n_; ++i) {
        if (order[i] < 0 || order[i] >= n_ || pos[order[i]] != -1)
            throw std::invalid_argument("vertex order is not a permutation");
        pos[order[i]] = i;
    }
    order_position_ = pos;
}

std::vector<int> Graph::vertex_order_list() const {
    std::vector<int> order(n_);
    for (int v = 0; v < n_; ++v) order[order_position_[v]] = v;
    return order;
}

std::optional<int> Graph::find_edge(int u, int v) const {
    for (int e : adjacency_[u])
        if (edges_[e].incident(v)) return e;
    return std::nullopt;
}

bool Graph::operator==(const Graph& o) const {
    if (n_ != o.n_ || edges_.size() != o.edges_.size()) return false;
    for (size_t i = 0; i < edges_.size(); ++i)
        if (edges_[i].u != o.edges_[i].u || edges_[i].v != o.edges_[i].v) return false;
    return order_position_ == o.order_position_;
}

Graph Graph::read_text(std::istream& in) {
    std::string line;
    auto next_data_line = [&](std::string& out) {
        while (std::getline(in, line)) {
            auto pos = line.find('#');
            if (pos != std::string::npos) line = line.substr(0, pos);
            std::istringstream probe(line);
            std::string tok;
            if (probe >> tok) {
                out = line;
                return true;
            }
        }
        return false;
    };
    std::string header;
    if (!next_data_line(header)) throw std::invalid_argument("empty graph file");
    std::istringstream hs(header);
    int n, m;
    if (!(hs >> n >> m)) throw std::invalid_argument("bad graph header, expected 'n m'");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m; ++i) {
        std::string row;
        if (!next_data_line(row)) throw std::invalid_argument("unexpected end of graph file");
        std::istringstream rs(row);
        int u, v;
        if (!(rs >> u >> v)) throw std::invalid_argument("bad edge line: " + row);
        edges.emplace_back(u, v);
    }
    return Graph(n, std::move(edges));
}

Graph Graph::read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open graph file: " + path);
    return read_text(in);
}

void Graph::write_text(std::ostream& out) const {
    out << n_ << " " << edges_.size() << "\n";
    for (const auto& e : edges_) out << e.u << " " << e.v << "\n";
}

std::string Graph::to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
}

bool is_matching(const Graph& g, const EdgeSet& s) {
    if (s.size() != g.edge_count()) throw std::invalid_argument("edge set length mismatch");
    std::vector<int> deg(g.vertex_count(), 0);
    bool ok = true;
    s.for_each([&](int e) {
        if (++deg[g.edge(e).u] > 1) ok = false;
        if (++deg[g.edge(e).v] > 1) ok = false;
    });
    return ok;
}

namespace {

// Walks a degree<=2 component starting at `start` along unvisited edges.
struct ComponentWalk {
    std::vector<int> edge_order;
    std::vector<int> vertex_order;
    bool closed = false;
};

ComponentWalk walk_component(const Graph& g, const EdgeSet& comp, int start) {
    ComponentWalk w;
    w.vertex_order.push_back(start);
    EdgeSet used(comp.size());
    int cur = start;
    for (;;) {
        int next_edge = -1;
        for (int e : g.incident_edges(cur))
            if (comp.test(e) && !used.test(e)) { next_edge = e; break; }
        if (next_edge < 0) break;
        used.set(next_edge);
        w.edge_order.push_back(next_edge);
        cur = g.edge(next_edge).other(cur);
        w.vertex_order.push_back(cur);
        if (cur == start) { w.closed = true; break; }
    }
    return w;
}

}  // namespace

std::vector<int> DiffComponent::ordered_edges(const Graph& g, int from_vertex) const {
    return walk_component(g, edges, from_vertex).edge_order;
}

std::vector<int> DiffComponent::ordered_vertices(const Graph& g, int from_vertex) const {
    return walk_component(g, edges, from_vertex).vertex_order;
}

std::vector<DiffComponent> symmetric_difference_components(const Graph& g, const EdgeSet& x,
                                                           const EdgeSet& y) {
    EdgeSet diff = x ^ y;
    std::vector<DiffComponent> out;
    EdgeSet remaining = diff;
    std::vector<int> deg(g.vertex_count(), 0);
    diff.for_each([&](int e) {
        ++deg[g.edge(e).u];
        ++deg[g.edge(e).v];
    });

    // Union-find over edges of the difference via vertex walks; start at
    // degree-1 vertices first so paths are traversed end to end.
    auto extract = [&](int start_vertex) {
        ComponentWalk w = walk_component(g, remaining, start_vertex);
        DiffComponent c;
        c.edges = EdgeSet(g.edge_count());
        for (int e : w.edge_order) {
            c.edges.set(e);
            remaining.set(e, false);
        }
        bool simple = true;
        for (size_t i = 0; i < w.vertex_order.size(); ++i)
            for (size_t j = i + 1; j < w.vertex_order.size(); ++j)
                if (w.vertex_order[i] == w.vertex_order[j] &&
                    !(w.closed && i == 0 && j + 1 == w.vertex_order.size()))
                    simple = false;
        if (w.closed) {
            c.kind = (simple && w.edge_order.size() % 2 == 0) ? ComponentKind::EvenCycle
                                                              : ComponentKind::Other;
        } else {
            // A walk from a degree-1 vertex covers the whole component iff the
            // component is a simple path.
            bool complete = true;
            for (int v : w.vertex_order) {
                int live = 0;
                for (int e : g.incident_edges(v))
                    if (remaining.test(e)) ++live;
                if (live > 0) complete = false;
            }
            c.kind = (simple && complete) ? ComponentKind::Path : ComponentKind::Other;
            if (c.kind == ComponentKind::Path) {
                c.endpoint_vertices = {w.vertex_order.front(), w.vertex_order.back()};
            }
        }
        if (c.kind == ComponentKind::Other) {
            // Sweep up everything connected to this walk so the decomposition
            // still partitions the difference set.
            bool grew = true;
            while (grew) {
                grew = false;
                remaining.for_each([&](int e) {
                    if (c.edges.test(e)) return;
                    const Edge& ed = g.edge(e);
                    bool touches = false;
                    c.edges.for_each([&](int f) {
                        const Edge& fd = g.edge(f);
                        if (ed.incident(fd.u) || ed.incident(fd.v)) touches = true;
                    });
                    if (touches) {
                        c.edges.set(e);
                        remaining.set(e, false);
                        grew = true;
                    }
                });
            }
        }
        out.push_back(std::move(c));
    };

    // Degree-1 starts (paths).
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (deg[v] != 1) continue;
        bool live = false;
        for (int e : g.incident_edges(v))
            if (remaining.test(e)) live = true;
        if (live) extract(v);
    }
    // Remaining components are cycles (or tangles on non-matching input).
    for (int e = 0; e < g.edge_count(); ++e)
        if (remaining.test(e)) extract(g.edge(e).u);
    return out;
}

std::optional<DiffComponent> component_containing(const std::vector<DiffComponent>& components,
                                                  int e) {
    for (const auto& c : components)
        if (e < c.edges.size() && c.edges.test(e)) return c;
    return std::nullopt;
}

EdgeSet inclusive_boundary(const Graph& g, const EdgeSet& s) {
    EdgeSet out(g.edge_count());
    s.for_each([&](int e) {
        for (int f : g.incident_edges(g.edge(e).u)) out.set(f);
        for (int f : g.incident_edges(g.edge(e).v)) out.set(f);
    });
    return out;
}

EdgeSet boundary(const Graph& g, const EdgeSet& s) { return inclusive_boundary(g, s).minus(s); }

EdgeSet inclusive_boundary_of_vertex(const Graph& g, int v) {
    EdgeSet out(g.edge_count());
    for (int f : g.incident_edges(v)) out.set(f);
    return out;
}

}  // namespace mdmc
