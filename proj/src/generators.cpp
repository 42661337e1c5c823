#include "mdmc/generators.hpp"

#include "mdmc/rng.hpp"

#include <set>
#include <stdexcept>

namespace mdmc {

Graph path_graph(int n) {
    if (n < 1) throw std::invalid_argument("path needs at least one vertex");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Graph::canonical(n, std::move(edges));
}

Graph cycle_graph(int n) {
    if (n < 3) throw std::invalid_argument("cycle needs at least three vertices");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return Graph::canonical(n, std::move(edges));
}

Graph star_graph(int k) {
    if (k < 1) throw std::invalid_argument("star needs at least one spoke");
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i <= k; ++i) edges.emplace_back(0, i);
    return Graph::canonical(k + 1, std::move(edges));
}

Graph complete_graph(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return Graph::canonical(n, std::move(edges));
}

Graph complete_bipartite_graph(int a, int b) {
    if (a < 1 || b < 1) throw std::invalid_argument("both sides need at least one vertex");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) edges.emplace_back(i, a + j);
    return Graph::canonical(a + b, std::move(edges));
}

Graph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid needs positive dimensions");
    auto id = [&](int r, int c) { return r * cols + c; };
    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
        }
    return Graph::canonical(rows * cols, std::move(edges));
}

Graph erdos_renyi_graph(int n, double p, uint64_t seed) {
    if (p < 0 || p > 1) throw std::invalid_argument("probability out of range");
    Rng rng(split_seed(seed, 0xE2));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (p >= 1.0 || rng.bernoulli(p)) edges.emplace_back(i, j);
    return Graph::canonical(n, std::move(edges));
}

Graph random_regular_graph(int n, int d, uint64_t seed, int max_retries) {
    if (d < 0 || d >= n) throw std::invalid_argument("degree out of range");
    if ((static_cast<long>(n) * d) % 2 != 0)
        throw std::invalid_argument("n*d must be even for a d-regular graph");
    Rng rng(split_seed(seed, 0x88));
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(static_cast<size_t>(n) * d);
        for (int v = 0; v < n; ++v)
            for (int i = 0; i < d; ++i) stubs.push_back(v);
        for (size_t i = stubs.size(); i > 1; --i)
            std::swap(stubs[i - 1], stubs[rng.below(i)]);
        std::set<std::pair<int, int>> seen;
        bool ok = true;
        for (size_t i = 0; i + 1 < stubs.size(); i += 2) {
            int u = stubs[i], v = stubs[i + 1];
            if (u == v) { ok = false; break; }
            auto key = std::minmax(u, v);
            if (!seen.insert({key.first, key.second}).second) { ok = false; break; }
        }
        if (!ok) continue;
        std::vector<std::pair<int, int>> edges(seen.begin(), seen.end());
        return Graph::canonical(n, std::move(edges));
    }
    throw std::runtime_error("pairing model exhausted its retry budget");
}

Graph petersen_graph() {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < 5; ++i) {
        edges.emplace_back(i, (i + 1) % 5);          // outer cycle
        edges.emplace_back(i, i + 5);                // spokes
        edges.emplace_back(5 + i, 5 + (i + 2) % 5);  // inner pentagram
    }
    return Graph::canonical(10, std::move(edges));
}

Graph generate_graph(const std::string& family, const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key) {
        auto it = params.find(key);
        if (it == params.end()) throw std::invalid_argument("missing parameter: " + key);
        return it->second;
    };
    auto geti = [&](const std::string& key) { return static_cast<int>(get(key)); };
    auto seed = [&]() {
        auto it = params.find("seed");
        return it == params.end() ? uint64_t{0} : static_cast<uint64_t>(it->second);
    };
    if (family == "path") return path_graph(geti("n"));
    if (family == "cycle") return cycle_graph(geti("n"));
    if (family == "star") return star_graph(geti("k"));
    if (family == "complete") return complete_graph(geti("n"));
    if (family == "complete_bipartite") return complete_bipartite_graph(geti("a"), geti("b"));
    if (family == "grid") return grid_graph(geti("rows"), geti("cols"));
    if (family == "erdos_renyi") return erdos_renyi_graph(geti("n"), get("p"), seed());
    if (family == "random_regular") return random_regular_graph(geti("n"), geti("d"), seed());
    if (family == "petersen") return petersen_graph();
    throw std::invalid_argument("unknown graph family: " + family);
}

}  // namespace mdmc
