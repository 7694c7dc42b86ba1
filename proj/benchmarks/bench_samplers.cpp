// Microbenchmarks for the hot paths: simplex sampling (direct and log-space
// product), Metropolis stepping at two system sizes, density evaluation, and
// the multiplier solve.
#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "qse/approx.hpp"
#include "qse/feee.hpp"
#include "qse/observables.hpp"
#include "qse/rng.hpp"
#include "qse/rpse.hpp"
#include "qse/spectrum.hpp"

namespace {

using namespace qse;

void BM_SampleSimplex(benchmark::State& state) {
    const std::size_t dim = static_cast<std::size_t>(state.range(0));
    RandomStream rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_simplex(dim, rng));
    }
    state.SetItemsProcessed(state.iterations() * dim);
}
// 2^10 is the last dimension on the direct product path; 2^11 switches to
// log-space accumulation.
BENCHMARK(BM_SampleSimplex)->Arg(16)->Arg(1 << 10)->Arg(1 << 11)->Arg(1 << 13);

void BM_ShannonEntropy(benchmark::State& state) {
    const std::size_t dim = static_cast<std::size_t>(state.range(0));
    RandomStream rng(2);
    const auto p = sample_simplex(dim, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(shannon_entropy(p));
    }
    state.SetItemsProcessed(state.iterations() * dim);
}
BENCHMARK(BM_ShannonEntropy)->Arg(64)->Arg(1 << 13);

FeeeTarget equal_spin_target(int spins, double energy_per_spin) {
    auto spec = std::make_shared<EnergySpectrum>(build_spin_spectrum(
        spins, std::vector<double>(static_cast<std::size_t>(spins), 1.0)));
    return FeeeTarget(spec, energy_per_spin * spins);
}

void BM_FeeeDensity(benchmark::State& state) {
    const auto target = equal_spin_target(static_cast<int>(state.range(0)), 0.2);
    RandomStream rng(3);
    ChainState chain = init_chain(target);
    for (auto _ : state) {
        benchmark::DoNotOptimize(feee_density(chain.current, target));
    }
}
BENCHMARK(BM_FeeeDensity)->Arg(6)->Arg(10);

void BM_MhStep(benchmark::State& state) {
    const auto target = equal_spin_target(static_cast<int>(state.range(0)), 0.2);
    RandomStream rng(4);
    ChainState chain = init_chain(target, 0.01);
    for (auto _ : state) {
        mh_step(chain, target, rng);
    }
    state.counters["acceptance"] =
        chain.step_index > 0
            ? static_cast<double>(chain.accepted_count) / chain.step_index
            : 0.0;
}
BENCHMARK(BM_MhStep)->Arg(6)->Arg(10);

void BM_SolveLagrange(benchmark::State& state) {
    const auto spec = build_spin_spectrum(
        static_cast<int>(state.range(0)),
        std::vector<double>(static_cast<std::size_t>(state.range(0)), 1.0));
    const double energy = 0.2 * static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_lagrange(spec, energy));
    }
}
BENCHMARK(BM_SolveLagrange)->Arg(6)->Arg(10);

} // namespace

BENCHMARK_MAIN();
