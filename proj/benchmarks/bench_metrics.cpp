#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include "debatelab/metrics.hpp"
#include "debatelab/stats.hpp"
#include "debatelab/store.hpp"
#include "test_support.hpp"

using namespace debatelab;
using namespace debatelab::testing;

static void bm_cosine(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto u = random_embedding(rng, dim), v = random_embedding(rng, dim);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_similarity(u, v));
}
BENCHMARK(bm_cosine)->Arg(384)->Arg(768)->Arg(4096);

static void bm_trend(benchmark::State& state) {
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.1 * static_cast<double>(i % 7);
  for (auto _ : state) benchmark::DoNotOptimize(trend(s));
}
BENCHMARK(bm_trend)->Arg(3)->Arg(7);

static void bm_levene(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.88, 0.08);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (double& x : a) x = g(rng);
  for (double& x : b) x = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(stats::levene_test(a, b));
}
BENCHMARK(bm_levene)->Arg(50)->Arg(500);

static void bm_debate_metrics(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto t = random_transcript(rng, static_cast<int>(state.range(0)), 384);
  for (auto _ : state) benchmark::DoNotOptimize(compute_debate_metrics(t));
}
BENCHMARK(bm_debate_metrics)->Arg(3)->Arg(7);

static void bm_transcript_round_trip(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto t = random_transcript(rng, 3, 384);
  for (auto _ : state) {
    std::istringstream in(serialize_transcript(t));
    benchmark::DoNotOptimize(read_transcript(in));
  }
}
BENCHMARK(bm_transcript_round_trip);
BENCHMARK_MAIN();
