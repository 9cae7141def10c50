// Serial reference vs OpenMP kernels. Thread count follows GLMAMP_THREADS /
// OMP_NUM_THREADS; both variants produce bitwise-identical output.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "glmamp/engine.hpp"
#include "glmamp/kernels.hpp"
#include "glmamp/problem_io.hpp"

using namespace glmamp;

namespace {

Matrix random_matrix(Eigen::Index m, Eigen::Index n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    Matrix a(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
    return a;
}

template <Vector (*Kernel)(const Matrix&, const Vector&)>
void matvec(benchmark::State& state) {
    const auto n = state.range(0);
    const Matrix a = random_matrix(2 * n, n);
    const Vector x = Vector::LinSpaced(n, -1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, x));
    state.SetItemsProcessed(state.iterations() * a.size());
}

template <Vector (*Kernel)(const Matrix&, const Vector&)>
void matvec_transpose(benchmark::State& state) {
    const auto n = state.range(0);
    const Matrix a = random_matrix(2 * n, n);
    const Vector s = Vector::LinSpaced(2 * n, -1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, s));
    state.SetItemsProcessed(state.iterations() * a.size());
}

// Per-entry scalar work comparable to a quadrature-based output function.
template <void (*Loop)(std::size_t, const std::function<void(std::size_t)>&)>
void for_each_index(benchmark::State& state) {
    const auto count = static_cast<std::size_t>(state.range(0));
    std::vector<double> out(count);
    for (auto _ : state) {
        Loop(count, [&](std::size_t i) {
            double acc = 0.0;
            for (int k = 1; k <= 200; ++k) acc += std::exp(-static_cast<double>(i % 17) / k) / k;
            out[i] = acc;
        });
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}

void gamp_solve(benchmark::State& state) {
    GenSpec g;
    g.n = static_cast<std::size_t>(state.range(0));
    g.m = 2 * g.n;
    g.seed = 1;
    const auto p = generate_problem(g);
    auto cfg = SolverConfig::gamp_defaults();
    cfg.record_trace = false;
    for (auto _ : state) benchmark::DoNotOptimize(run_gamp(p, Mode::SumProduct, cfg).iterations);
}

}  // namespace

BENCHMARK(matvec<kernels::serial::matvec>)->Name("matvec/serial")->Arg(256)->Arg(1024)->Arg(2048);
BENCHMARK(matvec<kernels::parallel::matvec>)->Name("matvec/parallel")->Arg(256)->Arg(1024)->Arg(2048);
BENCHMARK(matvec_transpose<kernels::serial::matvec_transpose>)->Name("matvec_transpose/serial")->Arg(256)->Arg(1024)->Arg(2048);
BENCHMARK(matvec_transpose<kernels::parallel::matvec_transpose>)->Name("matvec_transpose/parallel")->Arg(256)->Arg(1024)->Arg(2048);
BENCHMARK(for_each_index<kernels::serial::for_each_index>)->Name("for_each_index/serial")->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(for_each_index<kernels::parallel::for_each_index>)->Name("for_each_index/parallel")->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(gamp_solve)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    kernels::configure_threads_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::AddCustomContext("threads", std::to_string(kernels::thread_count()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
