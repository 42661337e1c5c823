// Compares the serial reference path against OpenMP on the data-parallel
// kernels: the exhaustive pinning sweep, exact congestion accumulation, and
// Monte Carlo tail sampling.  Both paths must produce identical results;
// tests enforce that, this target measures the speedup.

#include "mdmc/parallel.hpp"
#include "mdmc/suite.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace mdmc;

namespace {

double time_of(const std::function<void()>& fn) {
    auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void row(const std::string& name, const std::function<void()>& fn, int reps) {
    exec_mode() = ExecMode::Serial;
    fn();  // warm-up and first-touch
    double serial = 1e30, parallel = 1e30;
    for (int r = 0; r < reps; ++r) {
        exec_mode() = ExecMode::Serial;
        serial = std::min(serial, time_of(fn));
        exec_mode() = ExecMode::OpenMP;
        parallel = std::min(parallel, time_of(fn));
    }
    std::printf("%-34s %10.3fs %10.3fs %8.2fx\n", name.c_str(), serial, parallel,
                serial / parallel);
}

}  // namespace

int main() {
    std::printf("%-34s %11s %11s %9s   (%d workers)\n", "kernel", "serial", "openmp", "speedup",
                worker_count());

    row("pinning sweep C6, lambda=2", [] {
        verify_local_to_global(MonomerDimerModel(cycle_graph(6), 2));
    }, 3);
    row("pinning sweep K4, lambda=1/2", [] {
        verify_local_to_global(MonomerDimerModel(complete_graph(4), Rat(1, 2)));
    }, 3);
    row("exact congestion grid 3x3", [] {
        flow_statistics(MonomerDimerModel(grid_graph(3, 3), 1), {}, StatsMode::Exact);
    }, 3);
    row("exact congestion K4, lambda=2", [] {
        flow_statistics(MonomerDimerModel(complete_graph(4), 2), {}, StatsMode::Exact);
    }, 3);
    row("mc paths 2e4/edge, grid 3x3", [] {
        flow_statistics(MonomerDimerModel(grid_graph(3, 3), 1), {}, StatsMode::MonteCarlo, 20000,
                        11);
    }, 3);
    row("suite, 6-cell corpus", [] {
        CorpusSpec tiny = CorpusSpec::from_graphs(
            {{"P4", path_graph(4)}, {"C6", cycle_graph(6)}, {"K4", complete_graph(4)}},
            {Rat(1), Rat(2)});
        SuiteOptions opt;
        opt.tail_samples = 5000;
        run_verification_suite(tiny, opt);
    }, 2);

    exec_mode() = ExecMode::OpenMP;
    return 0;
}
