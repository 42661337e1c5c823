#pragma once

#include "mdmc/flow.hpp"
#include "mdmc/generators.hpp"
#include "mdmc/spectral.hpp"

#include <map>
#include <string>
#include <vector>

namespace mdmc {

struct CorpusCell {
    std::string name;  // e.g. "P3[l=1/2]"
    Graph graph;
    Rat lambda;

    MonomerDimerModel model() const { return MonomerDimerModel(graph, lambda); }
};

struct CorpusSpec {
    std::vector<CorpusCell> cells;
    static CorpusSpec default_corpus();
    static CorpusSpec from_graphs(const std::vector<std::pair<std::string, Graph>>& graphs,
                                  const std::vector<Rat>& lambdas);
};

enum class CellStatus { Pass, Fail, Skipped };

struct CellResult {
    std::string check;
    std::string model;
    CellStatus status = CellStatus::Skipped;
    std::string details;
};

struct SuiteReport {
    uint64_t seed = 0;
    std::vector<CellResult> results;

    bool all_ok() const;
    int count(CellStatus s) const;
    std::string to_json() const;
};

struct SuiteOptions {
    uint64_t seed = 12345;
    long cap = kDefaultEnumerationCap;
    int pinning_sweep_max_edges = 6;  // exhaustive-pinning checks stop here
    long tail_samples = 20000;
};

// Runs every verification check on every corpus cell.  Oversize work is
// reported as skipped, never as failed.  Output is deterministic for a
// fixed corpus, options and seed.
SuiteReport run_verification_suite(const CorpusSpec& corpus, const SuiteOptions& options = {});

struct SweepRow {
    int n = 0, m = 0, delta = 0;
    double gamma = 0;        // of the 1/2-lazy chain
    long tmix = -1;          // -1 when skipped
    double ratio_poly = 0;   // tmix / (delta^2 m log n)
    double ratio_classic = 0;  // tmix / (delta m n)
    bool skipped = false;
};

std::vector<SweepRow> mixing_sweep(const std::string& family, const std::vector<int>& sizes,
                                   const Rat& lambda, double eps,
                                   long cap = kDefaultEnumerationCap);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Versioned experiment description; round-trips losslessly through JSON.
struct ExperimentConfig {
    int schema_version = 1;
    std::string graph_family;                    // empty if graph_file is used
    std::map<std::string, double> graph_params;
    std::string graph_file;
    std::string lambda = "1";
    std::string chain = "js";
    uint64_t seed = 0;
    std::string op;
    std::map<std::string, std::string> op_params;
    std::string out;
    std::string format = "json";

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    bool operator==(const ExperimentConfig& o) const;

    Graph build_graph() const;
};

}  // namespace mdmc
