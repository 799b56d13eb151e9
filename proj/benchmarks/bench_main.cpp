#include <benchmark/benchmark.h>

#include "fhvar/posterior.hpp"
#include "fhvar/sampler.hpp"
#include "fhvar/simulation.hpp"

namespace {

using namespace fhvar;

std::pair<Dataset, SimTruth> bench_dataset(Eigen::Index m) {
    SimConfig config = SimConfig::with_constant_n(m, 7);
    RandomSource rng(12345);
    return generate_replication(config, rng);
}

void BM_GibbsSweep(benchmark::State& state) {
    const auto [data, truth] = bench_dataset(state.range(0));
    const ModelSpec spec{ModelKind::Stk1, default_hyperparams(data)};
    RandomSource rng(1);
    ParameterState st = init_state(data, spec, rng);
    for (auto _ : state) {
        st.theta = update_theta(st, data, rng);
        st.sigma2 = update_sigma2(st, data, spec, rng);
        st.beta = update_beta(st, data, rng);
        st.tau2 = update_tau2(st, data, rng);
        st.gamma = update_gamma(st, data, spec, rng);
        benchmark::DoNotOptimize(st.theta.data());
    }
    state.SetItemsProcessed(state.iterations() * data.m());
}
BENCHMARK(BM_GibbsSweep)->Arg(30)->Arg(200)->Arg(1000);

void BM_MhEtaStep(benchmark::State& state) {
    const auto [data, truth] = bench_dataset(30);
    const ModelSpec spec{ModelKind::Stk2, default_hyperparams(data)};
    RandomSource rng(2);
    ParameterState st = init_state(data, spec, rng);
    for (auto _ : state) {
        st.eta = mh_update_eta(st, data, spec, 0.04, rng).eta;
        benchmark::DoNotOptimize(st.eta.data());
    }
}
BENCHMARK(BM_MhEtaStep);

void BM_RunChain(benchmark::State& state) {
    const auto [data, truth] = bench_dataset(30);
    const ModelSpec spec{ModelKind::Stk2, default_hyperparams(data)};
    SamplerConfig config;
    config.burn_in = 100;
    config.n_draws = 400;
    for (auto _ : state) {
        config.seed = static_cast<std::uint64_t>(state.iterations());
        const ChainResult result = run_chain(data, spec, config);
        benchmark::DoNotOptimize(result.draws.n_draws());
    }
    state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_RunChain)->Unit(benchmark::kMillisecond);

void BM_MarginalLogLikelihood(benchmark::State& state) {
    const auto [data, truth] = bench_dataset(state.range(0));
    const ModelSpec spec{ModelKind::Stk1, default_hyperparams(data)};
    RandomSource rng(3);
    const ParameterState st = init_state(data, spec, rng);
    const Phi phi = phi_from_state(st, spec.kind);
    for (auto _ : state) {
        benchmark::DoNotOptimize(marginal_log_likelihood(phi, data, spec));
    }
    state.SetItemsProcessed(state.iterations() * data.m());
}
BENCHMARK(BM_MarginalLogLikelihood)->Arg(30)->Arg(200);

void BM_GenerateReplication(benchmark::State& state) {
    SimConfig config = SimConfig::with_constant_n(30, 7);
    RandomSource rng(4);
    for (auto _ : state) {
        const auto [data, truth] = generate_replication(config, rng);
        benchmark::DoNotOptimize(data.m());
    }
}
BENCHMARK(BM_GenerateReplication);

}  // namespace

BENCHMARK_MAIN();
