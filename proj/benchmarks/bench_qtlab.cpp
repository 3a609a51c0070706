#include <benchmark/benchmark.h>

#include <random>

#include "qtlab/cka.hpp"
#include "qtlab/coned_off.hpp"
#include "qtlab/distortion.hpp"
#include "qtlab/embedding.hpp"
#include "qtlab/families.hpp"
#include "qtlab/projections.hpp"
#include "qtlab/quasi_tree.hpp"
#include "qtlab/scenario.hpp"

using namespace qtlab;

namespace {

Scenario load(const std::string& name) { return Scenario::load(std::string(QTLAB_SCENARIO_DIR) + "/" + name + ".toml"); }

const CKAWindow& flip3() {
  static const Scenario s = load("flip3");
  static const CKAWindow win(GraphOfGroupsConfig::from_config(s.config), s.window);
  return win;
}

void BM_VerifyAxiomsF2(benchmark::State& st) {
  const AxisFamily af = build_axis_family(2, {Word("a")}, static_cast<int>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(verify_axioms(*af.family, 0).xi_witnessed);
  st.counters["members"] = static_cast<double>(af.family->size());
}
BENCHMARK(BM_VerifyAxiomsF2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BuildQuasiTree(benchmark::State& st) {
  const AxisFamily af = build_axis_family(2, {Word("a"), Word("b")}, 3, 7);
  for (auto _ : st) benchmark::DoNotOptimize(build_quasi_tree(af.family, Rational(st.range(0))).carrier.vertex_count());
}
BENCHMARK(BM_BuildQuasiTree)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_SpecialPath(benchmark::State& st) {
  const CKAWindow& win = flip3();
  const auto pairs = sample_pairs(win, 64, 1, 4);
  std::size_t i = 0;
  for (auto _ : st) {
    const auto& [x, y] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(path_components(special_path(win, x, y)).l1);
  }
}
BENCHMARK(BM_SpecialPath);

void BM_WindowOracle(benchmark::State& st) {
  const CKAWindow& win = flip3();
  const auto pairs = sample_pairs(win, 64, 2, 4);
  win.oracle();
  std::size_t i = 0;
  for (auto _ : st) {
    const auto& [x, y] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(win.oracle().distance(x, y));
  }
}
BENCHMARK(BM_WindowOracle)->Unit(benchmark::kMicrosecond);

// random path-with-chords instance, one line coned at radius 1/2
ConedSpace coned_instance(int n, std::mt19937_64& rng) {
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex();
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 1);
  for (int k = 0; k < n / 3; ++k) {
    const auto u = static_cast<WeightedGraph::Vertex>(rng() % n), v = static_cast<WeightedGraph::Vertex>(rng() % n);
    if (u != v && !g.adjacent(u, v)) g.add_edge(u, v, 2);
  }
  std::vector<std::vector<WeightedGraph::Vertex>> lines{shortest_path(g, 0, static_cast<WeightedGraph::Vertex>(n / 2))};
  return cone_off(g, std::move(lines), Rational(1, 2));
}

void BM_ThickDistanceDP(benchmark::State& st) {
  std::mt19937_64 rng(5);
  const ConedSpace cs = coned_instance(static_cast<int>(st.range(0)), rng);
  for (auto _ : st) benchmark::DoNotOptimize(thick_distance(cs, 0, static_cast<WeightedGraph::Vertex>(cs.base_count - 1), 2));
}
BENCHMARK(BM_ThickDistanceDP)->Arg(12)->Arg(48)->Arg(192);

void BM_ThickDistanceExhaustive(benchmark::State& st) {
  std::mt19937_64 rng(5);
  const ConedSpace cs = coned_instance(static_cast<int>(st.range(0)), rng);
  for (auto _ : st)
    benchmark::DoNotOptimize(thick_distance_exhaustive(cs, 0, static_cast<WeightedGraph::Vertex>(cs.base_count - 1), 2));
}
BENCHMARK(BM_ThickDistanceExhaustive)->Arg(12)->Arg(24);

void BM_WordBall(benchmark::State& st) {
  static const Scenario s = load("heisenberg");
  const auto p = MatrixGroupPresentation::from_config(s.config, "heisenberg");
  for (auto _ : st) benchmark::DoNotOptimize(word_ball(p, static_cast<int>(st.range(0))).size());
}
BENCHMARK(BM_WordBall)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_EmbedAndCompare(benchmark::State& st) {
  static const Scenario s = load("flip3");
  const CKAWindow& win = flip3();
  static const EmbeddingContext ctx = build_embedding_context(win, s.r, s.K);
  const auto pairs = sample_pairs(win, 64, 3, 4, 1);
  std::size_t i = 0;
  for (auto _ : st) {
    const auto& [x, y] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(product_distance(ctx, embed(ctx, x), embed(ctx, y)).total());
  }
}
BENCHMARK(BM_EmbedAndCompare)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
