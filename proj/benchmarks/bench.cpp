#include <benchmark/benchmark.h>

#include "embedlab/linalg.hpp"
#include "embedlab/metrics.hpp"
#include "embedlab/model.hpp"
#include "embedlab/optim.hpp"
#include "embedlab/rng.hpp"

namespace {

using namespace embedlab;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                     double scale = 1.0) {
    SplitMix64 rng(seed);
    Matrix m(rows, cols);
    for (double& x : m.data) x = scale * rng.next_normal();
    return m;
}

model::ModelParams bench_params(bool tied) {
    SplitMix64 rng(7);
    return model::init_params(512, 32, true, tied, false, 0.02, rng);
}

void bm_forward(benchmark::State& state) {
    model::ModelParams params = bench_params(true);
    std::uint32_t ctx = 0;
    for (auto _ : state) {
        model::ForwardTrace trace = model::forward(params, ctx, (ctx + 1) % 512);
        benchmark::DoNotOptimize(trace.loss);
        ctx = (ctx + 1) % 512;
    }
}
BENCHMARK(bm_forward)->Unit(benchmark::kMicrosecond);

void bm_forward_backward(benchmark::State& state) {
    model::ModelParams params = bench_params(true);
    model::Gradients grads;
    grads.resize_for(params);
    std::uint32_t ctx = 0;
    for (auto _ : state) {
        model::ForwardTrace trace = model::forward(params, ctx, (ctx + 1) % 512);
        grads.zero();
        model::backward_accumulate(params, trace, 1.0, grads);
        benchmark::DoNotOptimize(grads.d_embeddings.data.data());
        ctx = (ctx + 1) % 512;
    }
}
BENCHMARK(bm_forward_backward)->Unit(benchmark::kMicrosecond);

template <optim::Kind kind>
void bm_embedding_step(benchmark::State& state) {
    Matrix e = random_matrix(512, 32, 1, 0.02);
    const Matrix g = random_matrix(512, 32, 2);
    optim::OptimConfig cfg;
    optim::SgdState sgd;
    optim::AdamState adam;
    for (auto _ : state) {
        switch (kind) {
            case optim::Kind::sgd:
                optim::sgd_embedding_step(e, g, sgd, cfg, 1e-3);
                break;
            case optim::Kind::adam:
                optim::adam_embedding_step(e, g, adam, cfg, 1e-3);
                break;
            case optim::Kind::coupled_adam:
                optim::coupled_adam_step(e, g, adam, cfg, 1e-3);
                break;
            case optim::Kind::scaled_coupled_adam:
                optim::scaled_coupled_adam_step(e, g, adam, cfg, 1e-3, 2);
                break;
        }
        benchmark::DoNotOptimize(e.data.data());
    }
}
BENCHMARK(bm_embedding_step<optim::Kind::sgd>)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_embedding_step<optim::Kind::adam>)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_embedding_step<optim::Kind::coupled_adam>)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_embedding_step<optim::Kind::scaled_coupled_adam>)
    ->Unit(benchmark::kMicrosecond);

void bm_sym_eigen(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Matrix base = random_matrix(n, n, 3);
    Matrix sym(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sym.at(i, j) = 0.5 * (base.at(i, j) + base.at(j, i));
    for (auto _ : state) {
        linalg::EigenResult r = linalg::sym_eigen(sym);
        benchmark::DoNotOptimize(r.eigenvalues.data());
    }
}
BENCHMARK(bm_sym_eigen)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void bm_isotropy(benchmark::State& state) {
    Matrix e = random_matrix(512, 32, 4, 0.05);
    for (auto _ : state) {
        double iso = metrics::isotropy(e);
        benchmark::DoNotOptimize(iso);
    }
}
BENCHMARK(bm_isotropy)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
