// Microbenchmarks for the hot paths: signal-space metrics, k-NN lookup,
// rule parsing/evaluation, window counting, and the URL round trip.
#include <array>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "qrprox/metrics.hpp"
#include "qrprox/qr_context.hpp"
#include "qrprox/radio_map.hpp"
#include "qrprox/rules.hpp"
#include "qrprox/scan_store.hpp"
#include "qrprox/time_window.hpp"

using namespace qrprox;
using std::chrono::sys_seconds;

namespace {

MacAddress nth_mac(int i) {
  std::array<std::uint8_t, 6> octets{0x0A, 0x00, 0x00, 0x00,
                                     static_cast<std::uint8_t>(i >> 8),
                                     static_cast<std::uint8_t>(i & 0xFF)};
  return MacAddress(octets);
}

/// Deterministic n-AP fingerprint drawing BSSIDs from a pool, so pairs
/// of fingerprints share most APs like neighboring real scans do.
Fingerprint make_fp(std::mt19937_64& rng, int n, int pool = 64) {
  std::vector<int> indices(pool);
  for (int i = 0; i < pool; ++i) indices[i] = i;
  std::shuffle(indices.begin(), indices.end(), rng);
  std::vector<ApObservation> obs;
  std::uniform_int_distribution<int> rssi(-95, -30);
  for (int i = 0; i < n; ++i) obs.push_back({nth_mac(indices[i]), std::nullopt, rssi(rng)});
  return normalize_fingerprint(obs);
}

void BM_euclidean_distance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  Fingerprint a = make_fp(rng, 20);
  Fingerprint b = make_fp(rng, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(euclidean_distance(a, b));
  }
}
BENCHMARK(BM_euclidean_distance);

void BM_rank_transform(benchmark::State& state) {
  std::mt19937_64 rng(2);
  Fingerprint fp = make_fp(rng, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_transform(fp));
  }
}
BENCHMARK(BM_rank_transform);

void BM_spearman_correlation(benchmark::State& state) {
  std::mt19937_64 rng(3);
  Fingerprint a = make_fp(rng, 20, 24);
  Fingerprint b = make_fp(rng, 20, 24);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spearman_correlation(a, b));
  }
}
BENCHMARK(BM_spearman_correlation);

void BM_knn_locate(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<RadioMapEntry> map;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    map.push_back(RadioMapEntry{make_fp(rng, 10), (i % 30) * 3.0, (i / 30) * 3.0, std::nullopt});
  }
  Fingerprint query = make_fp(rng, 10);
  KnnConfig cfg{4, -100};
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_locate(query, map, cfg));
  }
}
BENCHMARK(BM_knn_locate)->Arg(50)->Arg(200)->Arg(800);

void BM_parse_rules(benchmark::State& state) {
  std::string source;
  for (int i = 0; i < 10; ++i) {
    source += "IF COUNTER(3) > " + std::to_string(i) +
              " AND (FIRST(2) OR RSSI(0A-00-00-00-00-01) >= -60) "
              "AND NOT VISIBLE(0A-00-00-00-00-02) THEN { action " +
              std::to_string(i) + " }\n";
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(rules::parse_rules(source));
  }
}
BENCHMARK(BM_parse_rules);

void BM_evaluate_rules(benchmark::State& state) {
  std::string source;
  for (int i = 0; i < 10; ++i) {
    source += "IF COUNTER(3) > " + std::to_string(i) +
              " AND (FIRST(2) OR RSSI(0A-00-00-00-00-01) >= -60) THEN { action " +
              std::to_string(i) + " }\n";
  }
  auto rules = rules::parse_rules(source);
  std::mt19937_64 rng(5);
  Fingerprint fp = make_fp(rng, 10);
  MemoryScanStore store;
  sys_seconds now = parse_rfc3339("2026-07-28T12:00:00Z");
  for (int i = 0; i < 1000; ++i) {
    sys_seconds ts = now - std::chrono::seconds(i * 3600);
    store.store_scan({"user-" + std::to_string(i % 7), ts, fp, "https://e.com"});
  }
  rules::EvalContext ctx{"user-3", now, &store, &fp, -100};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rules::evaluate_all(rules, ctx));
  }
}
BENCHMARK(BM_evaluate_rules);

void BM_count_scans(benchmark::State& state) {
  std::mt19937_64 rng(6);
  Fingerprint fp = make_fp(rng, 5);
  MemoryScanStore store;
  sys_seconds now = parse_rfc3339("2026-07-28T12:00:00Z");
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    sys_seconds ts = now - std::chrono::seconds((i % 2000) * 3600);
    store.store_scan({"user-" + std::to_string(i % 7), ts, fp, "https://e.com"});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(store.count_scans("user-3", TimeInterval::Month, now));
  }
}
BENCHMARK(BM_count_scans)->Arg(1000)->Arg(10000);

void BM_url_round_trip(benchmark::State& state) {
  std::mt19937_64 rng(7);
  Fingerprint fp = make_fp(rng, 16);
  RewriteConfig cfg{ContextMode::Inline, 16, false, ""};
  const std::string base = "https://shop.example/offer?campaign=summer#sec";
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_context_params(rewrite_url_inline(base, fp, cfg)));
  }
}
BENCHMARK(BM_url_round_trip);

}  // namespace

BENCHMARK_MAIN();
