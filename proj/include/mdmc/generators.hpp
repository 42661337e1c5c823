#pragma once

#include "mdmc/graph.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace mdmc {

Graph path_graph(int n);
Graph cycle_graph(int n);
Graph star_graph(int k);  // K_{1,k}; center is vertex 0
Graph complete_graph(int n);
Graph complete_bipartite_graph(int a, int b);
Graph grid_graph(int rows, int cols);
Graph erdos_renyi_graph(int n, double p, uint64_t seed);
// Pairing model with rejection of loops and parallel edges.
Graph random_regular_graph(int n, int d, uint64_t seed, int max_retries = 1000);
Graph petersen_graph();

// Dispatch by family name with parameters, e.g. generate_graph("path", {{"n", 5}}).
Graph generate_graph(const std::string& family, const std::map<std::string, double>& params);

}  // namespace mdmc
