// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/bench_kernels --benchmark_filter=Mips

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hopchain/kernels.hpp"
#include "hopchain/random.hpp"

namespace {

using namespace hopchain;

struct Table {
    std::size_t dim;
    std::vector<double> rows;
    std::vector<std::string> ids;
    std::vector<unsigned char> excluded;
    std::vector<double> query;
};

Table make_table(std::size_t n, std::size_t dim) {
    Rng rng(n * 131 + dim);
    Table t{dim, {}, {}, std::vector<unsigned char>(n, 0), {}};
    t.rows.resize(n * dim);
    for (auto& v : t.rows) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) t.ids.push_back("f" + std::to_string(i));
    t.query.resize(dim);
    for (auto& v : t.query) v = rng.uniform(-1.0, 1.0);
    return t;
}

template <bool Parallel>
void BM_Mips(benchmark::State& state) {
    const auto t = make_table(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    const auto k = static_cast<std::size_t>(state.range(2));
    for (auto _ : state) {
        auto hits = Parallel ? kernels::mips_scan_parallel(t.rows, t.dim, t.ids, t.query, k, t.excluded)
                             : kernels::mips_scan_serial(t.rows, t.dim, t.ids, t.query, k, t.excluded);
        benchmark::DoNotOptimize(hits.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_InnerProducts(benchmark::State& state) {
    const auto t = make_table(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    std::vector<double> out(t.ids.size());
    for (auto _ : state) {
        if (Parallel) {
            kernels::inner_products_parallel(t.rows, t.dim, t.query, out);
        } else {
            kernels::inner_products_serial(t.rows, t.dim, t.query, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void mips_args(benchmark::internal::Benchmark* b) {
    for (long n : {10'000L, 100'000L})
        for (long dim : {64L, 768L})
            for (long k : {10L, 200L}) b->Args({n, dim, k});
}

void ip_args(benchmark::internal::Benchmark* b) {
    for (long n : {10'000L, 100'000L})
        for (long dim : {64L, 768L}) b->Args({n, dim});
}

}  // namespace

BENCHMARK(BM_Mips<false>)->Name("Mips/serial")->Apply(mips_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mips<true>)->Name("Mips/parallel")->Apply(mips_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InnerProducts<false>)->Name("InnerProducts/serial")->Apply(ip_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InnerProducts<true>)->Name("InnerProducts/parallel")->Apply(ip_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
