#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "qtlab/error.hpp"
#include "qtlab/free_tree.hpp"
#include "qtlab/graph.hpp"
#include "support.hpp"

using namespace qtlab;
using qtlab::testing::random_graph;

namespace {

// Floyd-Warshall over exact rationals; -1 for unreachable.
std::vector<std::vector<Rational>> all_pairs(const WeightedGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, Rational(-1)));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges()) {
    if (d[e.u][e.v] < 0 || e.length < d[e.u][e.v]) d[e.u][e.v] = d[e.v][e.u] = e.length;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] < 0 || d[k][j] < 0) continue;
        const Rational via = d[i][k] + d[k][j];
        if (d[i][j] < 0 || via < d[i][j]) d[i][j] = via;
      }
  return d;
}

WeightedGraph path_graph(int n) {
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex();
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

WeightedGraph cycle(int n) {
  WeightedGraph g = path_graph(n);
  g.add_edge(n - 1, 0);
  return g;
}

}  // namespace

TEST(ShortestDistance, PathGraph) {
  WeightedGraph g;
  auto a = g.add_vertex("a"), b = g.add_vertex("b"), c = g.add_vertex("c");
  g.add_edge(a, b);
  g.add_edge(b, c);
  EXPECT_EQ(shortest_distance(g, a, c), Rational(2));
  EXPECT_EQ(shortest_distance(g, b, b), Rational(0));
}

TEST(ShortestDistance, DisconnectedPairThrows) {
  WeightedGraph g;
  auto a = g.add_vertex(), b = g.add_vertex();
  try {
    shortest_distance(g, a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DisconnectedPair);
  }
}

TEST(ShortestDistance, MatchesFloydWarshallOnRandomGraphs) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const WeightedGraph g = random_graph(rng, 20, 15, 5);
    const auto oracle = all_pairs(g);
    for (WeightedGraph::Vertex u = 0; u < 20; ++u) {
      const auto d = distances_from(g, u);
      for (WeightedGraph::Vertex v = 0; v < 20; ++v) ASSERT_EQ(d[v], oracle[u][v]) << trial << " " << u << " " << v;
    }
  }
}

TEST(ShortestDistance, RationalLengthsMatchOracle) {
  std::mt19937_64 rng(2);
  WeightedGraph g;
  for (int i = 0; i < 12; ++i) g.add_vertex();
  for (int i = 1; i < 12; ++i) g.add_edge(i, rng() % i, Rational(1 + rng() % 5, 1 + rng() % 3));
  for (int k = 0; k < 8; ++k) {
    auto u = rng() % 12, v = rng() % 12;
    if (u != v && !g.adjacent(u, v)) g.add_edge(u, v, Rational(1 + rng() % 5, 1 + rng() % 3));
  }
  const auto oracle = all_pairs(g);
  for (WeightedGraph::Vertex u = 0; u < 12; ++u)
    for (WeightedGraph::Vertex v = 0; v < 12; ++v) EXPECT_EQ(shortest_distance(g, u, v), oracle[u][v]);
}

TEST(ShortestDistance, MetricAxiomsOnSampledTriples) {
  std::mt19937_64 rng(3);
  const WeightedGraph g = random_graph(rng, 25, 20, 4);
  std::vector<std::vector<Rational>> d;
  for (WeightedGraph::Vertex u = 0; u < 25; ++u) d.push_back(distances_from(g, u));
  for (int k = 0; k < 2000; ++k) {
    const auto x = rng() % 25, y = rng() % 25, z = rng() % 25;
    ASSERT_EQ(d[x][y], d[y][x]);
    ASSERT_LE(d[x][z], d[x][y] + d[y][z]);
  }
}

TEST(ShortestPath, IsAGeodesic) {
  std::mt19937_64 rng(4);
  const WeightedGraph g = random_graph(rng, 30, 25, 3);
  for (int k = 0; k < 50; ++k) {
    const auto u = static_cast<WeightedGraph::Vertex>(rng() % 30), v = static_cast<WeightedGraph::Vertex>(rng() % 30);
    const auto p = shortest_path(g, u, v);
    ASSERT_EQ(p.front(), u);
    ASSERT_EQ(p.back(), v);
    EXPECT_TRUE(is_geodesic(g, ExplicitLine{p}));
  }
}

// ---------------------------------------------------------------------------

TEST(TreeProjection, VertexOntoAxis) {
  FreeTree t(2, 8);
  const Axis a(Word("a"), Word());
  EXPECT_EQ(tree_projection(t, a, Word("b")), std::vector<Word>{Word()});
}

TEST(TreeProjection, DisjointAxesThroughIdentity) {
  FreeTree t(2, 8);
  EXPECT_EQ(tree_projection(t, Axis(Word("a"), Word()), Axis(Word("b"), Word())), std::vector<Word>{Word()});
}

TEST(TreeProjection, ConjugateAxisMatchesExhaustiveSearch) {
  FreeTree t(2, 8);
  const Axis target(Word("a"), Word());
  const Axis source(Word("b"), Word("aaaaa"));  // a^5 axis(b) a^-5
  EXPECT_EQ(tree_projection(t, target, source), std::vector<Word>{Word("aaaaa")});

  // Exhaustive: nearest target points over all window points of both lines.
  std::vector<Word> tpts, spts;
  for (const auto& w : t.vertices()) {
    if (target.parameter(w)) tpts.push_back(w);
    if (source.parameter(w)) spts.push_back(w);
  }
  std::int64_t best = -1;
  std::vector<Word> arg;
  for (const auto& p : tpts) {
    for (const auto& s : spts) {
      const auto d = tree_distance(p, s);
      if (best < 0 || d < best) {
        best = d;
        arg.clear();
      }
      if (d == best && std::find(arg.begin(), arg.end(), p) == arg.end()) arg.push_back(p);
    }
  }
  EXPECT_EQ(arg, std::vector<Word>{Word("aaaaa")});
}

TEST(TreeProjection, OneLipschitzInSource) {
  FreeTree t(2, 7);
  const Axis target(Word("ab"), Word("b"));
  for (const auto& w : t.vertices()) {
    if (w.length() >= 7) continue;
    const auto p = tree_projection(t, target, w);
    for (const auto& s : t.letters()) {
      const Word u = w * s;
      if (!t.contains(u)) continue;
      const auto q = tree_projection(t, target, u);
      ASSERT_LE(tree_distance(p.front(), q.front()), 1) << w.to_string() << " " << u.to_string();
    }
  }
}

TEST(Axis, ConsecutivePointsAdjacent) {
  for (const char* w : {"a", "ab", "aBB", "abAbb"}) {
    const Axis ax(Word(w), Word("bA"));
    for (std::int64_t h = -20; h < 20; ++h) ASSERT_EQ(tree_distance(ax.point(h), ax.point(h + 1)), 1) << w << " " << h;
  }
}

TEST(Axis, RejectsTrivialWord) {
  EXPECT_THROW(Axis(Word(), Word()), Error);
  EXPECT_THROW(Axis(Word("abA"), Word()), Error);
}

TEST(FreeTree, RegularTreeOutToRadius) {
  FreeTree t(3, 4);
  const auto& g = t.graph();
  for (WeightedGraph::Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto& w = t.vertices()[v];
    const std::size_t expect = w.length() < 4 ? 6 : 1;
    EXPECT_EQ(g.neighbors(v).size(), w.empty() ? 6u : expect);
  }
  EXPECT_EQ(g.edge_count() + 1, g.vertex_count());
  EXPECT_THROW(tree_projection(t, Axis(Word("a"), Word()), Word("bbbbbb")), Error);
}

// ---------------------------------------------------------------------------

TEST(FourPointDelta, TreesAreZeroHyperbolic) {
  FreeTree t(2, 2);
  const auto q = all_quadruples(t.graph());
  EXPECT_EQ(four_point_delta(t.graph(), q), Rational(0));
  std::mt19937_64 rng(5);
  const WeightedGraph tree = random_graph(rng, 12, 0, 3);
  EXPECT_EQ(four_point_delta(tree, all_quadruples(tree)), Rational(0));
}

TEST(FourPointDelta, CycleMatchesExhaustiveOracle) {
  for (int n : {1, 2, 3}) {
    const WeightedGraph g = cycle(4 * n);
    const auto d = all_pairs(g);
    Rational worst = 0;
    const int m = 4 * n;
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y)
        for (int z = 0; z < m; ++z)
          for (int w = 0; w < m; ++w) {
            std::array<Rational, 3> s{d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]};
            std::sort(s.begin(), s.end());
            worst = std::max(worst, (s[2] - s[1]) / 2);
          }
    EXPECT_EQ(four_point_delta(g, all_quadruples(g)), worst) << n;
  }
}

TEST(FourPointDelta, DegenerateInputs) {
  WeightedGraph g;
  g.add_vertex();
  EXPECT_EQ(four_point_delta(g, all_quadruples(g)), Rational(0));
  EXPECT_EQ(four_point_delta(g, {}), Rational(0));
}

// ---------------------------------------------------------------------------

TEST(QuasiGeodesicFit, GeodesicGivesOne) {
  const WeightedGraph g = path_graph(10);
  std::vector<WeightedGraph::Vertex> p{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(fit_quasi_geodesic_constants(p, g).lambda, Rational(1));
}

TEST(QuasiGeodesicFit, FoldedPathMatchesExhaustiveScan) {
  const int L = 6;
  const WeightedGraph g = path_graph(2 * L + 1);
  std::vector<WeightedGraph::Vertex> p;
  for (int i = 0; i <= 2 * L; ++i) p.push_back(i);
  for (int i = 2 * L - 1; i >= L; --i) p.push_back(i);  // forward 2L, back L
  const Rational fit = fit_quasi_geodesic_constants(p, g).lambda;

  Rational scan = 1;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const Rational arc(static_cast<std::int64_t>(j - i));
      const Rational d(std::abs(static_cast<std::int64_t>(p[j]) - static_cast<std::int64_t>(p[i])));
      scan = std::max(scan, arc / (d + 1));
    }
  EXPECT_EQ(fit, scan);
  EXPECT_EQ(fit, Rational(2 * L));                   // the fold: arc 2L, d = 0
  EXPECT_GE(fit, Rational(3 * L, L + 1));            // arc 3L against d = L
}

// ---------------------------------------------------------------------------

TEST(Serialization, TextRoundTrip) {
  std::mt19937_64 rng(6);
  const WeightedGraph g = random_graph(rng, 15, 10, 4);
  const WeightedGraph h = from_text(to_text(g));
  ASSERT_EQ(h.vertex_count(), g.vertex_count());
  ASSERT_EQ(h.edge_count(), g.edge_count());
  for (WeightedGraph::Vertex u = 0; u < 15; ++u) EXPECT_EQ(distances_from(h, u), distances_from(g, u));
}

TEST(Serialization, DotRoundTrip) {
  WeightedGraph g;
  auto a = g.add_vertex("a"), b = g.add_vertex("b"), c = g.add_vertex("c");
  g.add_edge(a, b, Rational(3, 2));
  g.add_edge(b, c, Rational(2));
  const WeightedGraph h = from_dot(to_dot(g));
  EXPECT_EQ(shortest_distance(h, *h.find("a"), *h.find("c")), Rational(7, 2));
}
