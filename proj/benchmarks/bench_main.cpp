#include <benchmark/benchmark.h>

#include <random>

#include "kexplain/citations.hpp"
#include "kexplain/ingest.hpp"
#include "kexplain/metrics.hpp"
#include "kexplain/ranking.hpp"

using namespace kexplain;

namespace {

std::vector<double> random_speedups(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.1, 10.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

ProfileBundle grid_bundle(int profiles) {
  ProfileBundle b;
  b.manifest.app_name = "bench";
  b.manifest.kernel_name = "k";
  b.manifest.knobs = {{"block_size", KnobType::numeric, "threads"},
                      {"regs", KnobType::numeric, std::nullopt},
                      {"layout", KnobType::categorical, std::nullopt}};
  b.manifest.defaults = {{"block_size", 128.0}, {"regs", 64.0}, {"layout", std::string("aos")},
                         {kGpuArchKey, std::string("sm_90")}};
  for (int i = 0; i < profiles; ++i) {
    KernelProfile p;
    p.id = "p" + std::to_string(i);
    p.config.profile_id = p.id;
    p.config.gpu_arch = "sm_90";
    p.config.knobs = {{"block_size", 32.0 * (1 + i % 32)}, {"regs", 16.0 * (1 + i % 8)},
                      {"layout", std::string(i % 3 ? "aos" : "soa")}};
    MetricValue m;
    m.name = "dram__throughput";
    m.value = 0.5 * i;
    m.unit = "%";
    p.metrics.push_back(m);
    b.profiles.push_back(p);
  }
  return b;
}

}  // namespace

static void BM_PassAtK(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pass_at_k(n, n / 3, n / 2));
}
BENCHMARK(BM_PassAtK)->Arg(20)->Arg(200)->Arg(2000);

static void BM_SpeedupAtK(benchmark::State& state) {
  auto v = random_speedups(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(speedup_at_k(v, static_cast<int>(v.size() / 2)));
}
BENCHMARK(BM_SpeedupAtK)->Arg(20)->Arg(200)->Arg(2000);

static void BM_ParseMetricsCsv(benchmark::State& state) {
  std::string csv = "metric,unit,value\n";
  for (int i = 0; i < state.range(0); ++i) csv += "\"metric_" + std::to_string(i) + "\",%,\"1,234.5\"\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_metrics_csv(csv));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(csv.size()));
}
BENCHMARK(BM_ParseMetricsCsv)->Arg(100)->Arg(1000);

static void BM_RankProfiles(benchmark::State& state) {
  ProfileBundle b = grid_bundle(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rank_profiles_by_default_distance(b));
}
BENCHMARK(BM_RankProfiles)->Arg(75)->Arg(1000);

static void BM_ValidateCitations(benchmark::State& state) {
  ProfileBundle b = grid_bundle(100);
  std::string report;
  for (int i = 0; i < state.range(0); ++i) {
    report += "Line " + std::to_string(i) + " [[profile:p" + std::to_string(i % 100) +
              " metric:dram__throughput = " + std::to_string(0.5 * (i % 100)) + "]]\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(validate_citations(report, b));
}
BENCHMARK(BM_ValidateCitations)->Arg(10)->Arg(500);
BENCHMARK_MAIN();
