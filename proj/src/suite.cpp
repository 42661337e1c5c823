#include "mdmc/suite.hpp"

#include "mdmc/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mdmc {

namespace {

std::string lambda_tag(const Rat& lambda) { return rat_str(lambda); }

}  // namespace

CorpusSpec CorpusSpec::from_graphs(const std::vector<std::pair<std::string, Graph>>& graphs,
                                   const std::vector<Rat>& lambdas) {
    CorpusSpec spec;
    for (const auto& [name, g] : graphs)
        for (const Rat& lam : lambdas)
            spec.cells.push_back({name + "[l=" + lambda_tag(lam) + "]", g, lam});
    return spec;
}

CorpusSpec CorpusSpec::default_corpus() {
    std::vector<std::pair<std::string, Graph>> graphs;
    graphs.emplace_back("K2", path_graph(2));
    graphs.emplace_back("P3", path_graph(3));
    graphs.emplace_back("P4", path_graph(4));
    graphs.emplace_back("C4", cycle_graph(4));
    graphs.emplace_back("C6", cycle_graph(6));
    graphs.emplace_back("K3", complete_graph(3));
    graphs.emplace_back("K1_3", star_graph(3));
    graphs.emplace_back("K1_5", star_graph(5));
    graphs.emplace_back("K4", complete_graph(4));
    graphs.emplace_back("grid3x3", grid_graph(3, 3));
    // Random edge-subgraphs of the Petersen graph, fixed seeds.
    for (auto [tag, seed, drop] : {std::tuple<const char*, uint64_t, int>{"petersen_s1", 101, 4},
                                   std::tuple<const char*, uint64_t, int>{"petersen_s2", 202, 3}}) {
        Graph pet = petersen_graph();
        Rng rng(split_seed(seed, 0xBE));
        std::vector<int> keep(pet.edge_count());
        for (int i = 0; i < pet.edge_count(); ++i) keep[i] = i;
        for (int d = 0; d < drop; ++d) keep.erase(keep.begin() + rng.below(keep.size()));
        std::vector<std::pair<int, int>> edges;
        for (int e : keep) edges.emplace_back(pet.edge(e).u, pet.edge(e).v);
        graphs.emplace_back(tag, Graph::canonical(pet.vertex_count(), std::move(edges)));
    }
    return from_graphs(graphs, {Rat(1, 2), Rat(1), Rat(2)});
}

bool SuiteReport::all_ok() const {
    return std::none_of(results.begin(), results.end(),
                        [](const CellResult& r) { return r.status == CellStatus::Fail; });
}

int SuiteReport::count(CellStatus s) const {
    int c = 0;
    for (const auto& r : results) c += r.status == s;
    return c;
}

std::string SuiteReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["seed"] = seed;
    j["summary"] = {{"pass", count(CellStatus::Pass)},
                    {"fail", count(CellStatus::Fail)},
                    {"skipped", count(CellStatus::Skipped)}};
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json c;
        c["check"] = r.check;
        c["model"] = r.model;
        c["status"] = r.status == CellStatus::Pass   ? "pass"
                      : r.status == CellStatus::Fail ? "fail"
                                                     : "skipped";
        c["details"] = r.details;
        j["results"].push_back(std::move(c));
    }
    return j.dump(2);
}

namespace {

struct CheckOutcome {
    bool pass = false;
    std::string details;
};

using CheckFn = std::function<CheckOutcome(const CorpusCell&, const SuiteOptions&)>;

struct Check {
    std::string name;
    CheckFn fn;
};

std::vector<Pinning> feasible_pinnings_capped(const MonomerDimerModel& model) {
    int m = model.graph.edge_count();
    std::vector<Pinning> out;
    for (uint32_t free_mask = 1; free_mask < (1u << m); ++free_mask) {
        std::vector<int> fixed_edges;
        for (int e = 0; e < m; ++e)
            if (!(free_mask & (1u << e))) fixed_edges.push_back(e);
        int nf = static_cast<int>(fixed_edges.size());
        for (uint32_t assign = 0; assign < (1u << nf); ++assign) {
            Pinning p;
            for (int i = 0; i < nf; ++i)
                p = p.extended_unchecked(fixed_edges[i], (assign >> i) & 1 ? 1 : 0);
            if (pinning_feasible(model.graph, p)) out.push_back(std::move(p));
        }
    }
    return out;
}

CheckOutcome check_coupling_marginals(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    EdgeSet ts = free_support_edges(model, {});
    bool ok = true;
    ts.for_each([&](int e) { ok = ok && verify_coupling_marginals(model, {}, e, opt.cap); });
    return {ok, ok ? "both marginals exact on every two-sided edge" : "marginal mismatch"};
}

CheckOutcome check_coupling_bruteforce(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    EdgeSet ts = free_support_edges(model, {});
    bool ok = true;
    ts.for_each([&](int e) {
        if (!ok) return;
        CouplingLaw a = coupling_law_exact(model, {}, e, opt.cap);
        CouplingLaw b = coupling_law_by_pair_enumeration(model, {}, e, opt.cap);
        ok = coupling_laws_equal(a, b);
    });
    return {ok, ok ? "formula law equals sample-pair enumeration law" : "law mismatch"};
}

CheckOutcome check_coupling_symmetry(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    EdgeSet ts = free_support_edges(model, {});
    bool ok = true;
    ts.for_each([&](int e) { ok = ok && verify_coupling_symmetry_identity(model, e, opt.cap); });
    return {ok, ok ? "boundary-window identity exact" : "identity violated"};
}

CheckOutcome check_path_legality(const CorpusCell& cell, const SuiteOptions& opt) {
    bool ok = verify_canonical_paths(cell.model(), {}, opt.cap);
    return {ok, ok ? "all canonical paths legal with exact endpoints" : "illegal path found"};
}

CheckOutcome check_cycle_path_identity(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    EdgeSet ts = free_support_edges(model, {});
    bool ok = true;
    ts.for_each([&](int e) { ok = ok && verify_cycle_path_identity(model, e, opt.cap); });
    return {ok, ok ? "cycle mass = lambda * derived-path mass" : "cycle/path identity violated"};
}

CheckOutcome check_detailed_balance(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    std::vector<Pinning> pinnings{{}};
    if (model.graph.edge_count() <= opt.pinning_sweep_max_edges)
        pinnings = feasible_pinnings_capped(model);
    long kernels = 0;
    for (const auto& p : pinnings) {
        for (ChainKind kind : {ChainKind::JS, ChainKind::LazyJS, ChainKind::Glauber}) {
            TransitionKernel k = transition_kernel(model, p, kind, opt.cap);
            if (!k.matrix.rows_sum_to_one()) return {false, "row sum != 1"};
            if (!k.detailed_balance()) return {false, "detailed balance violated"};
            ++kernels;
        }
    }
    return {true, std::to_string(kernels) + " kernels exactly reversible and stochastic"};
}

CheckOutcome check_irreducibility(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    std::vector<Pinning> pinnings{{}};
    if (model.graph.edge_count() <= opt.pinning_sweep_max_edges)
        pinnings = feasible_pinnings_capped(model);
    for (const auto& p : pinnings) {
        for (ChainKind kind : {ChainKind::JS, ChainKind::Glauber}) {
            TransitionKernel k = transition_kernel(model, p, kind, opt.cap);
            if (!k.irreducible()) return {false, "reducible kernel under " + p.to_string()};
        }
    }
    return {true, "transition graph strongly connected for every feasible pinning"};
}

CheckOutcome check_laziness_reduction(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    if (model.graph.edge_count() > opt.pinning_sweep_max_edges)
        return {true, "restricted to small graphs; nothing to do"};
    long compared = 0;
    for (const auto& p : feasible_pinnings_capped(model)) {
        TransitionKernel full = transition_kernel(model, p, ChainKind::JS, opt.cap);
        FreeReduction red = reduce_to_free(model, p);
        long n_free = static_cast<long>(p.free_edges(model.graph).size());
        long n_s = red.model.graph.edge_count();
        if (n_s == 0) {
            for (int i = 0; i < full.size(); ++i)
                for (int j = 0; j < full.size(); ++j)
                    if (i != j && full.matrix.at(i, j) != 0) return {false, "moves without free support"};
            continue;
        }
        TransitionKernel hat = transition_kernel(red.model, {}, ChainKind::JS, opt.cap);
        Rat scale = Rat(n_s) / Rat(n_free);
        for (int i = 0; i < full.size(); ++i) {
            int hi = hat.dist.index_of(red.restrict(full.dist.states[i]));
            for (int j = 0; j < full.size(); ++j) {
                if (i == j) continue;
                int hj = hat.dist.index_of(red.restrict(full.dist.states[j]));
                Rat expect = scale * hat.matrix.at(hi, hj);
                if (full.matrix.at(i, j) != expect) return {false, "laziness identity violated"};
                ++compared;
            }
        }
    }
    return {true, std::to_string(compared) + " off-diagonal entries match |S|/|free| scaling"};
}

CheckOutcome check_concavity(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    if (model.graph.edge_count() > opt.pinning_sweep_max_edges)
        return {true, "restricted to small graphs; nothing to do"};
    for (const auto& p : feasible_pinnings_capped(model))
        if (!verify_concavity(model, p, split_seed(opt.seed, 0xC0), 4))
            return {false, "concavity violated under " + p.to_string()};
    return {true, "transition-level inequality exact for all feasible pinnings"};
}

CheckOutcome check_local_to_global(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    if (model.graph.edge_count() > opt.pinning_sweep_max_edges)
        throw OversizeError("pinning sweep too large", model.graph.edge_count());
    LocalToGlobalReport rep = verify_local_to_global(model, 1e-9, opt.pinning_sweep_max_edges);
    std::ostringstream os;
    os << "gamma=" << rep.gamma << " bound=" << rep.bound;
    return {rep.holds, os.str()};
}

CheckOutcome check_flow_theorems(const CorpusCell& cell, const SuiteOptions& opt) {
    FlowTheoremsReport rep = verify_flow_theorems(cell.model(), {}, 1e-9, 1e-6, opt.cap);
    std::ostringstream os;
    os << "alpha_pi=" << rep.alpha_pi << " bound=" << rep.alpha_pi_bound
       << " alpha_lsi=" << rep.alpha_lsi_estimate << " bound=" << rep.alpha_lsi_bound;
    return {rep.pi_holds && rep.lsi_holds, os.str()};
}

CheckOutcome check_one_step_decomposition(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    ExactDistribution dist = enumerate(model, {}, opt.cap);
    Rng rng(split_seed(opt.seed, 0xD1));
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> f(dist.size());
        for (auto& v : f) v = rng.uniform() * 4 - 2;
        if (!verify_one_step_decomposition(dist, f)) return {false, "decomposition identity off"};
    }
    return {true, "variance and entropy decompositions hold to 1e-12"};
}

CheckOutcome check_glauber_comparison(const CorpusCell& cell, const SuiteOptions& opt) {
    GlauberComparisonReport rep = compare_js_glauber(cell.model(), opt.cap);
    std::ostringstream os;
    os << "factor=" << rep.factor_checked << " min_eig=" << rep.min_eig;
    return {rep.holds, os.str()};
}

CheckOutcome check_decoupling(const CorpusCell& cell, const SuiteOptions& opt) {
    DecouplingSweepReport rep = verify_decoupling_family(cell.model(), opt.cap);
    if (!rep.identity_ok) return {false, "detailed identity violated between couplings"};
    if (!rep.inequality_ok) return {false, "summed decoupling inequality violated"};
    std::ostringstream os;
    os << rep.shared_pairs << " shared-support pairs, " << rep.inequality_checks
       << " inequality checks";
    return {true, os.str()};
}

CheckOutcome check_encoding(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    if (model.graph.edge_count() > opt.pinning_sweep_max_edges)
        throw OversizeError("encoding sweep restricted to small graphs",
                            model.graph.edge_count());
    EncodingCheckReport rep = verify_encoding(model, opt.cap);
    std::ostringstream os;
    os << rep.transitions_checked << " exchange transitions, " << rep.pairs_checked
       << " coupled pairs";
    return {rep.holds(), os.str()};
}

CheckOutcome check_marginal_bound(const CorpusCell& cell, const SuiteOptions& opt) {
    MarginalBoundReport rep = marginal_lower_bound_check(cell.model(), opt.cap);
    return {rep.holds, "phi=" + rat_str(rep.phi)};
}

CheckOutcome check_moments(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    FlowStats stats = flow_statistics(model, {}, StatsMode::Exact, 0, 0, opt.cap);
    for (const auto& row : stats.per_edge)
        if (row.expected_sq_length > row.expected_sq_discrepancy)
            return {false, "E[l^2] exceeds E[|B|^2] at edge " + std::to_string(row.e)};
    for (int e = 0; e < std::min(2, model.graph.edge_count()); ++e) {
        if (!free_support_edges(model, {}).test(e)) continue;
        double m0 = one_sided_moments(model, e, 0.0, ConditionSide::FixY, StatsMode::Exact, 0,
                                      opt.seed, opt.cap);
        if (std::abs(m0 - 1.0) > 1e-12) return {false, "zeroth one-sided moment != 1"};
    }
    return {true, "E[l^2] <= E[|B|^2] on every edge; zeroth moments exact"};
}

CheckOutcome check_geometric_tail(const CorpusCell& cell, const SuiteOptions& opt) {
    MonomerDimerModel model = cell.model();
    EdgeSet ts = free_support_edges(model, {});
    if (!ts.test(0)) return {true, "edge 0 not two-sided; nothing to test"};
    Rng rng(split_seed(opt.seed, 0x7A));
    GeometricTailReport rep = geometric_tail_check(model, 0, opt.tail_samples, rng, 50, opt.cap);
    if (rep.status == TailStatus::Inconclusive)
        throw OversizeError("insufficient conditional samples: " + rep.detail, 0);
    std::ostringstream os;
    os << rep.groups_tested << " groups, " << rep.tests << " tail tests at q=" << rep.q;
    return {rep.status == TailStatus::Pass, os.str()};
}

const std::vector<Check>& all_checks() {
    static const std::vector<Check> checks = {
        {"coupling_marginals", check_coupling_marginals},
        {"coupling_bruteforce", check_coupling_bruteforce},
        {"coupling_symmetry", check_coupling_symmetry},
        {"path_legality", check_path_legality},
        {"cycle_path_identity", check_cycle_path_identity},
        {"detailed_balance", check_detailed_balance},
        {"irreducibility", check_irreducibility},
        {"laziness_reduction", check_laziness_reduction},
        {"concavity", check_concavity},
        {"local_to_global", check_local_to_global},
        {"flow_theorems", check_flow_theorems},
        {"one_step_decomposition", check_one_step_decomposition},
        {"glauber_comparison", check_glauber_comparison},
        {"decoupling", check_decoupling},
        {"encoding", check_encoding},
        {"marginal_bound", check_marginal_bound},
        {"moments", check_moments},
        {"geometric_tail", check_geometric_tail},
    };
    return checks;
}

}  // namespace

SuiteReport run_verification_suite(const CorpusSpec& corpus, const SuiteOptions& options) {
    const auto& checks = all_checks();
    SuiteReport report;
    report.seed = options.seed;
    size_t total = checks.size() * corpus.cells.size();
    report.results.resize(total);
    parallel_for(total, [&](size_t idx) {
        const Check& check = checks[idx / corpus.cells.size()];
        const CorpusCell& cell = corpus.cells[idx % corpus.cells.size()];
        CellResult r;
        r.check = check.name;
        r.model = cell.name;
        try {
            CheckOutcome out = check.fn(cell, options);
            r.status = out.pass ? CellStatus::Pass : CellStatus::Fail;
            r.details = out.details;
        } catch (const OversizeError& e) {
            r.status = CellStatus::Skipped;
            r.details = e.what();
        } catch (const std::exception& e) {
            r.status = CellStatus::Fail;
            r.details = std::string("error: ") + e.what();
        }
        report.results[idx] = std::move(r);
    });
    return report;
}

std::vector<SweepRow> mixing_sweep(const std::string& family, const std::vector<int>& sizes,
                                   const Rat& lambda, double eps, long cap) {
    std::vector<SweepRow> rows(sizes.size());
    parallel_for(sizes.size(), [&](size_t i) {
        SweepRow row;
        try {
            Graph g = generate_graph(family, {{"n", static_cast<double>(sizes[i])}});
            MonomerDimerModel model(g, lambda);
            row.n = g.vertex_count();
            row.m = g.edge_count();
            row.delta = g.max_degree();
            TransitionKernel k = transition_kernel(model, {}, ChainKind::LazyJS, cap);
            row.gamma = poincare_constant(k);
            row.tmix = mixing_time_exact(k, eps, MixingMethod::Bracket);
            row.ratio_poly =
                row.tmix / (static_cast<double>(row.delta) * row.delta * row.m * std::log(row.n));
            row.ratio_classic =
                row.tmix / (static_cast<double>(row.delta) * row.m * row.n);
        } catch (const OversizeError&) {
            row.skipped = true;
        }
        rows[i] = row;
    });
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "n,m,delta,gamma,tmix,ratio_d2mlogn,ratio_dmn,status\n";
    char buf[64];
    auto d = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        if (r.skipped) {
            os << r.n << ",,,,,,,skipped\n";
            continue;
        }
        os << r.n << "," << r.m << "," << r.delta << "," << d(r.gamma) << "," << r.tmix << ","
           << d(r.ratio_poly) << "," << d(r.ratio_classic) << ",ok\n";
    }
    return os.str();
}

std::string ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = schema_version;
    nlohmann::ordered_json graph;
    if (!graph_file.empty()) {
        graph["file"] = graph_file;
    } else {
        graph["family"] = graph_family;
        graph["params"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : graph_params) graph["params"][k] = v;
    }
    j["graph"] = std::move(graph);
    j["lambda"] = lambda;
    j["chain"] = chain;
    j["seed"] = seed;
    j["op"] = op;
    j["op_params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : op_params) j["op_params"][k] = v;
    j["out"] = out;
    j["format"] = format;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    ExperimentConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1)
        throw std::invalid_argument("unsupported config schema version " +
                                    std::to_string(c.schema_version));
    const auto& graph = j.at("graph");
    if (graph.contains("file")) {
        c.graph_file = graph.at("file").get<std::string>();
    } else {
        c.graph_family = graph.at("family").get<std::string>();
        for (const auto& [k, v] : graph.at("params").items())
            c.graph_params[k] = v.get<double>();
    }
    c.lambda = j.at("lambda").get<std::string>();
    c.chain = j.at("chain").get<std::string>();
    c.seed = j.at("seed").get<uint64_t>();
    c.op = j.at("op").get<std::string>();
    for (const auto& [k, v] : j.at("op_params").items()) c.op_params[k] = v.get<std::string>();
    c.out = j.at("out").get<std::string>();
    c.format = j.at("format").get<std::string>();
    return c;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return schema_version == o.schema_version && graph_family == o.graph_family &&
           graph_params == o.graph_params && graph_file == o.graph_file && lambda == o.lambda &&
           chain == o.chain && seed == o.seed && op == o.op && op_params == o.op_params &&
           out == o.out && format == o.format;
}

Graph ExperimentConfig::build_graph() const {
    if (!graph_file.empty()) return Graph::read_text_file(graph_file);
    return generate_graph(graph_family, graph_params);
}

}  // namespace mdmc
