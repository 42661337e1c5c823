// Command-line front end: graph generation, exact enumeration, chain
// simulation, kernel/constants/flow-statistics export, the verification
// suite, and the mixing-time sweep.

#include "mdmc/suite.hpp"
#include "mdmc/parallel.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace mdmc;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

struct GraphArgs {
    std::string family;
    std::string file;
    int n = 0, k = 0, a = 0, b = 0, d = 0, rows = 0, cols = 0;
    double p = 0.5;
    uint64_t seed = 0;

    Graph build() const {
        if (!file.empty()) return Graph::read_text_file(file);
        std::map<std::string, double> params{{"n", double(n)},       {"k", double(k)},
                                             {"a", double(a)},       {"b", double(b)},
                                             {"d", double(d)},       {"rows", double(rows)},
                                             {"cols", double(cols)}, {"p", p},
                                             {"seed", double(seed)}};
        return generate_graph(family, params);
    }

    void attach(CLI::App* cmd, bool file_ok = true) {
        cmd->add_option("--family", family,
                        "path|cycle|star|complete|complete_bipartite|grid|erdos_renyi|"
                        "random_regular|petersen");
        if (file_ok) cmd->add_option("--graph", file, "graph file (text format)");
        cmd->add_option("--n", n, "vertex count");
        cmd->add_option("--k", k, "star spokes");
        cmd->add_option("--a", a, "bipartite left size");
        cmd->add_option("--b", b, "bipartite right size");
        cmd->add_option("--d", d, "regular degree");
        cmd->add_option("--rows", rows, "grid rows");
        cmd->add_option("--cols", cols, "grid cols");
        cmd->add_option("--p", p, "edge probability");
    }
};

Pinning parse_pinning(const std::string& text) {
    Pinning p;
    if (text.empty()) return p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad pinning item: " + item);
        p = p.extended_unchecked(std::stoi(item.substr(0, eq)), std::stoi(item.substr(eq + 1)));
    }
    return p;
}

int run_cli(int argc, char** argv);

}  // namespace

namespace {

int run_cli(int argc, char** argv) {
    CLI::App app{"monomer-dimer Markov chain toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    uint64_t seed = 12345;
    long cap = kDefaultEnumerationCap;
    std::string out;
    std::string format = "json";
    bool serial = false;
    app.add_option("--seed", seed, "root seed for all randomness")->capture_default_str();
    app.add_option("--cap", cap, "enumeration state cap")->capture_default_str();
    app.add_option("--out", out, "output path (default stdout)");
    app.add_option("--format", format, "json|csv")->capture_default_str();
    app.add_flag("--serial", serial, "run data-parallel sweeps on the serial reference path");

    GraphArgs gen_args, model_args;
    std::string lambda_str = "1";
    std::string chain = "js";
    std::string pin_str;

    auto* gen = app.add_subcommand("gen", "generate a graph and print its text format");
    gen_args.attach(gen, false);

    auto* enumerate_cmd = app.add_subcommand("enumerate", "exact conditional distribution");
    auto* sample_cmd = app.add_subcommand("sample", "simulate a chain trajectory");
    auto* kernel_cmd = app.add_subcommand("kernel", "exact transition kernel");
    auto* constants_cmd = app.add_subcommand("constants", "spectral constants report");
    auto* flow_cmd = app.add_subcommand("flow-stats", "transport-flow statistics");
    auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
    auto* sweep_cmd = app.add_subcommand("sweep", "mixing-time sweep over a graph family");
    auto* run_cmd = app.add_subcommand("run", "execute an experiment config file");

    for (CLI::App* cmd : {enumerate_cmd, sample_cmd, kernel_cmd, constants_cmd, flow_cmd}) {
        model_args.attach(cmd);
        cmd->add_option("--lambda", lambda_str, "edge weight (rational, e.g. 1/2)");
        cmd->add_option("--pin", pin_str, "pinning, e.g. 0=1,3=0");
    }
    for (CLI::App* cmd : {sample_cmd, kernel_cmd})
        cmd->add_option("--chain", chain, "js|lazy-js|glauber");

    long steps = 100000;
    sample_cmd->add_option("--steps", steps, "number of chain steps")->capture_default_str();

    int restarts = 12;
    bool alpha_table = false;
    constants_cmd->add_option("--restarts", restarts, "descent restarts");
    constants_cmd->add_flag("--alpha-table", alpha_table, "include the pinning-sweep table");

    std::string stats_mode = "exact";
    long mc_samples = 20000;
    flow_cmd->add_option("--mode", stats_mode, "exact|mc");
    flow_cmd->add_option("--samples", mc_samples, "Monte Carlo samples per edge");

    long tail_samples = 20000;
    verify_cmd->add_option("--tail-samples", tail_samples, "samples per geometric tail check");

    std::string sweep_family = "path";
    std::vector<int> sweep_sizes;
    double sweep_eps = 1.0 / (2.0 * 2.718281828459045235);
    sweep_cmd->add_option("--family", sweep_family, "path|cycle|star|complete");
    sweep_cmd->add_option("--sizes", sweep_sizes, "instance sizes")->required();
    sweep_cmd->add_option("--lambda", lambda_str, "edge weight");
    sweep_cmd->add_option("--eps", sweep_eps, "target total variation distance")
        ->capture_default_str();

    std::string config_path;
    run_cmd->add_option("--config", config_path, "experiment config JSON")->required();

    CLI11_PARSE(app, argc, argv);
    if (serial) exec_mode() = ExecMode::Serial;

    try {
        if (*gen) {
            gen_args.seed = seed;
            write_output(out, gen_args.build().to_text());
        } else if (*enumerate_cmd) {
            model_args.seed = seed;
            MonomerDimerModel model(model_args.build(), rat_parse(lambda_str));
            write_output(out, enumerate(model, parse_pinning(pin_str), cap).to_json());
        } else if (*sample_cmd) {
            model_args.seed = seed;
            MonomerDimerModel model(model_args.build(), rat_parse(lambda_str));
            ChainSpec spec{chain_kind_from_name(chain), parse_pinning(pin_str)};
            Rng rng(split_seed(seed, 0x5A));
            TrajectorySummary traj =
                simulate(model, spec, model.graph.empty_set(), steps, rng);
            nlohmann::ordered_json j;
            j["steps"] = traj.steps;
            j["seed"] = seed;
            j["final_state"] = traj.final_state.indices();
            j["occupancy"] = traj.occupancy;
            write_output(out, j.dump(2));
        } else if (*kernel_cmd) {
            model_args.seed = seed;
            MonomerDimerModel model(model_args.build(), rat_parse(lambda_str));
            write_output(out, transition_kernel(model, parse_pinning(pin_str),
                                                chain_kind_from_name(chain), cap)
                                  .to_json());
        } else if (*constants_cmd) {
            model_args.seed = seed;
            MonomerDimerModel model(model_args.build(), rat_parse(lambda_str));
            ConstantsReport rep =
                constants_report(model, parse_pinning(pin_str), restarts, alpha_table, seed);
            if (format == "csv" && alpha_table) {
                LocalToGlobalReport l2g;
                l2g.table = rep.alpha_table;
                write_output(out, l2g.alpha_table_csv());
            } else {
                write_output(out, rep.to_json());
            }
        } else if (*flow_cmd) {
            model_args.seed = seed;
            MonomerDimerModel model(model_args.build(), rat_parse(lambda_str));
            FlowStats stats =
                flow_statistics(model, parse_pinning(pin_str),
                                stats_mode == "mc" ? StatsMode::MonteCarlo : StatsMode::Exact,
                                mc_samples, seed, cap);
            write_output(out, format == "csv" ? stats.congestion_csv() : stats.to_json());
        } else if (*verify_cmd) {
            SuiteOptions options;
            options.seed = seed;
            options.cap = cap;
            options.tail_samples = tail_samples;
            SuiteReport report = run_verification_suite(CorpusSpec::default_corpus(), options);
            write_output(out, report.to_json());
            return report.all_ok() ? 0 : 1;
        } else if (*sweep_cmd) {
            write_output(out, sweep_csv(mixing_sweep(sweep_family, sweep_sizes,
                                                     rat_parse(lambda_str), sweep_eps, cap)));
        } else if (*run_cmd) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config: " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            ExperimentConfig cfg = ExperimentConfig::from_json(buf.str());
            std::vector<std::string> args{"mdmc", cfg.op};
            auto push = [&](const std::string& k, const std::string& v) {
                args.push_back("--" + k);
                args.push_back(v);
            };
            push("seed", std::to_string(cfg.seed));
            if (!cfg.out.empty()) push("out", cfg.out);
            push("format", cfg.format);
            if (cfg.op != "verify" && cfg.op != "sweep") {
                if (!cfg.graph_file.empty()) push("graph", cfg.graph_file);
                else {
                    push("family", cfg.graph_family);
                    for (const auto& [k, v] : cfg.graph_params) {
                        char num[32];
                        std::snprintf(num, sizeof num, "%g", v);
                        push(k, num);
                    }
                }
                push("lambda", cfg.lambda);
                if (cfg.op == "sample" || cfg.op == "kernel") push("chain", cfg.chain);
            }
            if (cfg.op == "sweep") {
                push("family", cfg.graph_family);
                push("lambda", cfg.lambda);
            }
            for (const auto& [k, v] : cfg.op_params) push(k, v);
            std::vector<char*> argv2;
            for (auto& s : args) argv2.push_back(s.data());
            return run_cli(static_cast<int>(argv2.size()), argv2.data());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
