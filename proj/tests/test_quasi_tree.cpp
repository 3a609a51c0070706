#include <gtest/gtest.h>

#include <queue>
#include <random>

#include "qtlab/error.hpp"
#include "qtlab/families.hpp"
#include "qtlab/quasi_tree.hpp"
#include "support.hpp"

using namespace qtlab;

namespace {

using Proj = std::vector<std::vector<std::vector<WeightedGraph::Vertex>>>;

std::shared_ptr<const WeightedGraph> path_member(int n) {
  auto g = std::make_shared<WeightedGraph>();
  for (int i = 0; i < n; ++i) g->add_vertex();
  for (int i = 0; i + 1 < n; ++i) g->add_edge(i, i + 1, 1);
  return g;
}

// X - Y - Z in a row: Y sees X and Z at opposite ends.
std::shared_ptr<const ProjectionFamily> collinear() {
  Proj p(3, std::vector<std::vector<WeightedGraph::Vertex>>(3));
  p[0][1] = {9};
  p[0][2] = {9};
  p[1][0] = {0};
  p[1][2] = {9};
  p[2][0] = {0};
  p[2][1] = {0};
  return std::make_shared<ProjectionFamily>(
      std::vector<ProjectionFamily::Member>{{"X", path_member(10)}, {"Y", path_member(10)}, {"Z", path_member(10)}},
      std::move(p));
}

std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>> all_pairs(std::size_t n, std::size_t cap,
                                                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>> out;
  for (std::size_t k = 0; k < cap; ++k) {
    auto a = static_cast<WeightedGraph::Vertex>(rng() % n), b = static_cast<WeightedGraph::Vertex>(rng() % n);
    if (a != b) out.emplace_back(a, b);
  }
  return out;
}

// Unit-weight BFS from scratch.
std::vector<int> bfs(const WeightedGraph& g, WeightedGraph::Vertex s) {
  std::vector<int> d(g.vertex_count(), -1);
  std::queue<WeightedGraph::Vertex> q;
  d[s] = 0;
  q.push(s);
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    for (const auto& a : g.neighbors(v))
      if (d[a.to] < 0) {
        d[a.to] = d[v] + 1;
        q.push(a.to);
      }
  }
  return d;
}

// Largest t keeping x and y connected after deleting vertices closer than t to m.
int bottleneck_oracle(const WeightedGraph& g, WeightedGraph::Vertex x, WeightedGraph::Vertex y,
                      WeightedGraph::Vertex m) {
  const auto dm = bfs(g, m);
  int best = 0;
  for (int t = 0; t <= static_cast<int>(g.vertex_count()); ++t) {
    if (dm[x] < t || dm[y] < t) break;
    std::vector<char> seen(g.vertex_count(), 0);
    std::vector<WeightedGraph::Vertex> stack{x};
    seen[x] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (const auto& a : g.neighbors(v))
        if (!seen[a.to] && dm[a.to] >= t) {
          seen[a.to] = 1;
          stack.push_back(a.to);
        }
    }
    if (seen[y]) best = t;
  }
  return best;
}

WeightedGraph cycle(int n) {
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex();
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n, 1);
  return g;
}

}  // namespace

TEST(BuildQuasiTree, EmptyFamilyThrows) {
  auto f = std::make_shared<ProjectionFamily>(std::vector<ProjectionFamily::Member>{}, Proj{});
  try {
    build_quasi_tree(f, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyFamily);
  }
}

TEST(BuildQuasiTree, SingleMemberIsTheMember) {
  auto f = std::make_shared<ProjectionFamily>(std::vector<ProjectionFamily::Member>{{"X", path_member(6)}},
                                              Proj(1, std::vector<std::vector<WeightedGraph::Vertex>>(1)));
  const auto qt = build_quasi_tree(f, 4);
  EXPECT_EQ(qt.carrier.vertex_count(), 6u);
  EXPECT_EQ(qt.bridge_edges, 0u);
  EXPECT_EQ(shortest_distance(qt.carrier, 0, 5), Rational(5));
}

TEST(BuildQuasiTree, TwoMembersAlwaysBridged) {
  Proj p(2, std::vector<std::vector<WeightedGraph::Vertex>>(2));
  p[0][1] = {2, 3};
  p[1][0] = {7};
  auto f = std::make_shared<ProjectionFamily>(
      std::vector<ProjectionFamily::Member>{{"X", path_member(10)}, {"Z", path_member(10)}}, p);
  const auto qt = build_quasi_tree(f, 0);
  ASSERT_EQ(qt.bridged_pairs.size(), 1u);
  EXPECT_EQ(qt.bridge_edges, 2u);
  // X:0 -> X:2 -> Z:7 -> Z:0
  EXPECT_EQ(shortest_distance(qt.carrier, qt.carrier_vertex(0, 0), qt.carrier_vertex(1, 0)), Rational(10));
}

TEST(BuildQuasiTree, CollinearOuterPairNotBridged) {
  const auto qt = build_quasi_tree(collinear(), 4);
  const std::vector<std::pair<std::size_t, std::size_t>> want{{0, 1}, {1, 2}};
  EXPECT_EQ(qt.bridged_pairs, want);
  // X:9 -bridge- Y:0 .. Y:9 -bridge- Z:0
  EXPECT_EQ(shortest_distance(qt.carrier, qt.carrier_vertex(0, 9), qt.carrier_vertex(2, 0)), Rational(11));
  // K above d_Y(X,Z) = 9 admits the outer pair too
  const auto wide = build_quasi_tree(collinear(), 9);
  EXPECT_EQ(wide.bridged_pairs.size(), 3u);
  EXPECT_EQ(shortest_distance(wide.carrier, wide.carrier_vertex(0, 9), wide.carrier_vertex(2, 0)), Rational(1));
}

TEST(BuildQuasiTree, LocateInvertsCarrierVertex) {
  const auto qt = build_quasi_tree(collinear(), 4);
  for (std::size_t m = 0; m < 3; ++m)
    for (WeightedGraph::Vertex v = 0; v < 10; ++v) {
      const auto p = qt.locate(qt.carrier_vertex(m, v));
      EXPECT_EQ(p.member, m);
      EXPECT_EQ(p.vertex, v);
    }
}

TEST(BuildQuasiTree, CarrierNeverLongerThanMember) {
  const AxisFamily f = build_axis_family(2, {Word("a"), Word("ab")}, 2, 7);
  const auto qt = build_quasi_tree(f.family, 4);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    const std::size_t m = rng() % f.family->size();
    const auto& g = *f.family->member(m).graph;
    const auto a = static_cast<WeightedGraph::Vertex>(rng() % g.vertex_count());
    const auto b = static_cast<WeightedGraph::Vertex>(rng() % g.vertex_count());
    ASSERT_LE(shortest_distance(qt.carrier, qt.carrier_vertex(m, a), qt.carrier_vertex(m, b)),
              shortest_distance(g, a, b));
  }
}

TEST(BuildQuasiTree, MonotoneInK) {
  const AxisFamily f = build_axis_family(2, {Word("a"), Word("ab")}, 2, 7);
  // the carrier has one vertex per member vertex whatever K is
  const std::size_t n = build_quasi_tree(f.family, 0).carrier.vertex_count();
  const auto pairs = all_pairs(n, 300, 6);
  std::optional<QuasiTreeOfSpaces> prev;
  for (int k = 0; k <= 8; ++k) {
    auto qt = build_quasi_tree(f.family, k);
    ASSERT_EQ(qt.carrier.vertex_count(), n);
    if (prev) {
      EXPECT_GE(qt.bridged_pairs.size(), prev->bridged_pairs.size());
      for (auto [a, b] : pairs) {
        const auto before = distances_from(prev->carrier, a);
        if (!reachable(before[b])) continue;
        const auto now = distances_from(qt.carrier, a);
        ASSERT_TRUE(reachable(now[b]));
        ASSERT_LE(now[b], before[b]) << k;
      }
    }
    prev = std::move(qt);
  }
}

TEST(BuildQuasiTree, WarnsWhenStrongAxiomsFail) {
  // collinear: d_Y(X,Z) = 9 while pi_X(Y) = pi_X(Z); fails at xi = K/4 = 1
  const auto qt = build_quasi_tree(collinear(), 4);
  EXPECT_TRUE(qt.warnings.empty() == check_strong_axioms(*collinear(), 1).pass);
}

TEST(DistanceFormula, HoldsWheneverStrongAxiomsPass) {
  struct Case {
    AxisFamily f;
    int K;
  };
  std::vector<Case> cases;
  for (int K : {4, 6, 8}) cases.push_back({build_axis_family(2, {Word("a")}, 4, 8), K});
  for (int K : {4, 8, 12}) cases.push_back({build_axis_family(2, {Word("a"), Word("ab")}, 2, 7), K});
  for (int K : {4, 8}) cases.push_back({build_axis_family(3, {Word("a"), Word("bc")}, 2, 6), K});
  int checked = 0;
  for (const auto& c : cases) {
    if (!check_strong_axioms(*c.f.family, Rational(c.K, 4)).pass) continue;
    ++checked;
    const auto qt = build_quasi_tree(c.f.family, c.K);
    const auto r = validate_distance_formula(qt, all_pairs(qt.carrier.vertex_count(), 300, c.K));
    EXPECT_EQ(r.lower_failures, 0u) << "K=" << c.K;
    EXPECT_EQ(r.upper_failures, 0u) << "K=" << c.K;
  }
  EXPECT_GE(checked, 3);
}

TEST(DistanceFormula, CutoffSumSameMemberIsClippedDistance) {
  const auto qt = build_quasi_tree(collinear(), 4);
  // two points of Y: only Y contributes
  EXPECT_EQ(cutoff_sum(qt, qt.carrier_vertex(1, 0), qt.carrier_vertex(1, 9)), Rational(9));
  EXPECT_EQ(cutoff_sum(qt, qt.carrier_vertex(1, 0), qt.carrier_vertex(1, 3)), Rational(0));
}

TEST(DistanceFormula, CsvHasOneRowPerSample) {
  const auto qt = build_quasi_tree(collinear(), 4);
  const auto r = validate_distance_formula(qt, all_pairs(qt.carrier.vertex_count(), 40, 1));
  const auto csv = r.to_csv(qt.carrier);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.rows.size() + 1);
  EXPECT_EQ(csv.rfind("pair,lhs,mid,rhs,margin\n", 0), 0u);
}

TEST(Bottleneck, TreeIsZero) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    WeightedGraph t;
    const int n = 2 + static_cast<int>(rng() % 25);
    t.add_vertex();
    for (int v = 1; v < n; ++v) {
      t.add_vertex();
      t.add_edge(static_cast<WeightedGraph::Vertex>(rng() % v), v, 1);
    }
    const auto r = bottleneck_check(t, all_pairs(n, 20, trial), 0);
    EXPECT_EQ(r.worst, Rational(0));
    EXPECT_TRUE(r.pass());
  }
}

TEST(Bottleneck, CycleOfLength4nGivesN) {
  for (int n = 1; n <= 8; ++n) {
    const auto g = cycle(4 * n);
    const auto r = bottleneck_check(g, {{0, static_cast<WeightedGraph::Vertex>(2 * n)}}, n - 1);
    EXPECT_EQ(r.worst, Rational(n));
    EXPECT_FALSE(r.pass());
  }
}

TEST(Bottleneck, BetweenOraclesOverMidpointChoices) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = qtlab::testing::random_graph(rng, 4 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 5), 1);
    const auto n = g.vertex_count();
    const auto x = static_cast<WeightedGraph::Vertex>(rng() % n), y = static_cast<WeightedGraph::Vertex>(rng() % n);
    if (x == y) continue;
    const auto dx = bfs(g, x), dy = bfs(g, y);
    const int d = dx[y];
    // candidate midpoints: first vertex at arc length >= d/2 on some geodesic
    const int h = (d + 1) / 2;
    int lo = 1 << 20, hi = -1;
    for (WeightedGraph::Vertex m = 0; m < n; ++m) {
      if (dx[m] + dy[m] != d || dx[m] != h) continue;
      const int v = bottleneck_oracle(g, x, y, m);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const auto r = bottleneck_check(g, {{x, y}}, 0);
    ASSERT_GE(r.worst, Rational(lo));
    ASSERT_LE(r.worst, Rational(hi));
  }
}

TEST(Bottleneck, DisconnectedPairThrows) {
  WeightedGraph g;
  g.add_vertex();
  g.add_vertex();
  try {
    bottleneck_check(g, {{0, 1}}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DisconnectedPair);
  }
}
