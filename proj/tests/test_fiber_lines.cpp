#include <gtest/gtest.h>

#include <random>

#include "qtlab/error.hpp"
#include "qtlab/fiber_lines.hpp"
#include "qtlab/quasi_tree.hpp"
#include "support.hpp"

using namespace qtlab;
using qtlab::testing::kind_of;

namespace {

const CKAWindow& flip3() {
  static const CKAWindow win = qtlab::testing::window("flip3");
  return win;
}

const FiberFamily& flip3_fibers() {
  static const FiberFamily fam = build_fiber_family(flip3());
  return fam;
}

PieceId leaf(const CKAWindow& win) {
  for (const auto& p : win.pieces())
    if (p.edges.size() == 1) return p.id;
  ADD_FAILURE() << "no valence-one piece";
  return 0;
}

std::set<WeightedGraph::Vertex> as_set(const std::vector<WeightedGraph::Vertex>& v) { return {v.begin(), v.end()}; }

Rational set_diameter(const WeightedGraph& g, const std::vector<WeightedGraph::Vertex>& s) {
  Rational best = 0;
  for (auto a : s) {
    const auto d = distances_from(g, a);
    for (auto b : s) best = std::max(best, d[b]);
  }
  return best;
}

}  // namespace

TEST(ThickFiberLine, ValenceOneLayout) {
  const auto& win = flip3();
  const PieceId v = leaf(win);
  const auto fl = build_fiber_line(win, v);
  ASSERT_EQ(fl.edges().size(), 1u);
  const std::int64_t W = fl.W();
  const std::size_t side = static_cast<std::size_t>(2 * W + 1);
  // binding line + plane window + one apex per neighbour fiber line
  EXPECT_GE(fl.carrier().vertex_count(), side + side * side + 1);
  EXPECT_EQ(shortest_distance(fl.carrier(), fl.binding(-W), fl.binding(W)), Rational(2 * W));
  EXPECT_EQ(kind_of([&] { fl.binding(W + 1); }), ErrorKind::WindowExceeded);
}

TEST(ThickFiberLine, AdjacentApexesWithinThree) {
  const auto& win = flip3();
  const auto fl = build_fiber_line(win, leaf(win));
  const auto e = fl.edges().front();
  int checked = 0;
  for (std::int64_t c = -fl.W(); c < fl.W(); ++c) {
    const auto a = fl.apex(e, c), b = fl.apex(e, c + 1);
    if (!a || !b) continue;
    ++checked;
    // apex -> line -> adjacent line -> apex
    EXPECT_LE(shortest_distance(fl.carrier(), *a, *b), 2 * fl.r() + 1);
  }
  EXPECT_GT(checked, 0);
}

TEST(ThickFiberLine, ConeShortcutsFarPointsOfOneLine) {
  auto params = qtlab::testing::scenario("flip3").window;
  params.W = 26;
  const CKAWindow win(GraphOfGroupsConfig::from_config(qtlab::testing::scenario("flip3").config), params);
  const auto fl = build_fiber_line(win, leaf(win));
  const auto e = fl.edges().front();
  const auto& line = fl.coned_line(e, 0);
  const auto& next = fl.coned_line(e, 1);
  ASSERT_GE(line.size(), 51u);
  // plane distance 50 between the ends of one coned line
  EXPECT_LE(shortest_distance(fl.carrier(), line.front(), line.back()), 2 * fl.r());
  EXPECT_LE(shortest_distance(fl.carrier(), line.front(), next.back()), 2 * fl.r() + 1);
}

TEST(ThickFiberLine, MarkedLineMeetsBindingLineByLadder) {
  const auto& win = flip3();
  const auto fl = build_fiber_line(win, win.root());
  for (auto e : fl.edges())
    for (std::int64_t f = -fl.W(); f <= fl.W(); ++f) {
      const auto p = fl.plane(e, 0, f);
      ASSERT_TRUE(p.has_value());
      EXPECT_TRUE(fl.carrier().adjacent(fl.binding(f), *p));
    }
}

TEST(ThickFiberLine, CarrierIsAQuasiLine) {
  std::optional<Rational> prev;
  for (int W : {6, 12}) {
    auto params = qtlab::testing::scenario("twisted3").window;
    params.W = W;
    const CKAWindow win(GraphOfGroupsConfig::from_config(qtlab::testing::scenario("twisted3").config), params);
    const auto fl = build_fiber_line(win, leaf(win));
    std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>> pairs;
    for (std::int64_t k = 1; k <= W; ++k) pairs.emplace_back(fl.binding(-k), fl.binding(k));
    const auto b = bottleneck_check(fl.carrier(), pairs, 0);
    if (prev) EXPECT_LE(b.worst, *prev + 2) << W;
    prev = b.worst;
  }
}

TEST(ProjectFiberLine, IsAConedLineOfDiameterAtMostThree) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  int checked = 0;
  for (int c = 1; c <= 2; ++c) {
    const auto& ids = fam.members[static_cast<std::size_t>(c - 1)];
    for (auto v : ids)
      for (auto u : ids) {
        if (u == v) continue;
        const auto& fl = *fam.lines[v];
        const auto proj = project_fiber_line(win, fl, u);
        const auto e1 = win.edge_path(v, u).front();
        bool found = false;
        for (std::int64_t h = -2 * fl.W(); h <= 2 * fl.W() && !found; ++h)
          found = as_set(fl.coned_line(e1, h)) == as_set(proj);
        EXPECT_TRUE(found);
        EXPECT_LE(set_diameter(fl.carrier(), proj), 2 * fam.r + 1);
        ++checked;
      }
  }
  EXPECT_GT(checked, 4);
}

TEST(ProjectFiberLine, RejectsSelfAndOtherClass) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  const PieceId root = win.root();
  EXPECT_EQ(kind_of([&] { project_fiber_line(win, *fam.lines[root], root); }), ErrorKind::IndexClash);
  const PieceId child = win.edge(win.piece(root).edges.front()).child;
  EXPECT_EQ(kind_of([&] { project_fiber_line(win, *fam.lines[root], child); }), ErrorKind::IndexClash);
}

TEST(ProjectFiberLine, CommonProjectionFarFromGeodesic) {
  for (const char* name : {"flip3", "star4"}) {
    const auto win = qtlab::testing::window(name);
    const auto fam = build_fiber_family(win);
    std::size_t triples = 0;
    for (int c = 1; c <= 2; ++c) {
      const auto& ids = fam.members[static_cast<std::size_t>(c - 1)];
      for (auto w : ids)
        for (auto u : ids)
          for (auto v : ids) {
            if (u == w || v == w || u >= v) continue;
            // d_T(w, [u, v]) by walking the piece path
            int dist = 1 << 20;
            for (auto p : win.piece_path(u, v)) dist = std::min(dist, win.tree_distance(w, p));
            if (dist < 2) continue;
            ++triples;
            EXPECT_EQ(as_set(project_fiber_line(win, *fam.lines[w], u)),
                      as_set(project_fiber_line(win, *fam.lines[w], v)));
          }
    }
    EXPECT_GT(triples, 0u) << name;
  }
}

TEST(VerifyFiberAxioms, PassOnBundledScenarios) {
  for (const char* name : {"flip3", "twisted3", "star4"}) {
    const auto win = qtlab::testing::window(name);
    const auto fam = build_fiber_family(win);
    const auto xi = verify_fiber_axioms(fam, 0).xi_witnessed();
    const auto r = verify_fiber_axioms(fam, xi);
    EXPECT_TRUE(r.pass()) << name;
    EXPECT_EQ(r.common_failures, 0u);
    EXPECT_LE(r.max_projection_diameter, 2 * fam.r + 3);
    EXPECT_EQ(r.diameter_bound, 2 * fam.r + 3);
  }
}

TEST(VerifyFiberAxioms, BackProjectionsVanishOnGeodesic) {
  // w on [u, v]: pi_u(w) and pi_u(v) coincide, so d_u(w, v) = diam pi_u(w)
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  for (int c = 1; c <= 2; ++c) {
    const auto& ids = fam.members[static_cast<std::size_t>(c - 1)];
    const auto& f = fam.of_class(c);
    for (std::size_t iu = 0; iu < ids.size(); ++iu)
      for (std::size_t iw = 0; iw < ids.size(); ++iw)
        for (std::size_t iv = 0; iv < ids.size(); ++iv) {
          if (iu == iw || iu == iv || iw == iv) continue;
          const auto path = win.piece_path(ids[iu], ids[iv]);
          if (std::find(path.begin(), path.end(), ids[iw]) == path.end()) continue;
          EXPECT_EQ(f.projection_distance(iu, iw, iv), f.projection_distance(iu, iw, iw));
          EXPECT_EQ(f.projection_distance(iv, iw, iu), f.projection_distance(iv, iw, iw));
        }
  }
}

TEST(VerifyFiberAxioms, PlantedCorruptionFails) {
  const auto& fam = flip3_fibers();
  const auto& f = fam.of_class(1);
  ASSERT_GE(f.size(), 3u);
  const auto& fl = *fam.lines[fam.members[0][0]];
  std::vector<ProjectionFamily::Member> members;
  std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> proj(f.size(),
                                                                   std::vector<std::vector<WeightedGraph::Vertex>>(f.size()));
  for (std::size_t y = 0; y < f.size(); ++y) {
    members.push_back(f.member(y));
    for (std::size_t x = 0; x < f.size(); ++x)
      if (x != y) proj[y][x] = f.projection(y, x);
  }
  proj[0][1] = {fl.binding(-fl.W()), fl.binding(fl.W())};
  const ProjectionFamily bad(std::move(members), std::move(proj));
  const auto xi = verify_fiber_axioms(fam, 0).xi_witnessed();
  const auto r = verify_axioms(bad, xi);
  ASSERT_FALSE(r.pass);
  EXPECT_EQ(r.violations.front().y, 0u);
}

TEST(Pi1, BindingLineHeights) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  const PieceId v = fam.members[0].front();
  const auto& fl = *fam.lines[v];
  EXPECT_EQ(pi1(win, fam, PiecePoint{v, Word(), 0}).vertex, fl.binding(0));
  EXPECT_EQ(pi1(win, fam, PiecePoint{v, Word("ab"), 0}).vertex, fl.binding(0));
  EXPECT_EQ(pi1(win, fam, PiecePoint{v, Word(), -8}).vertex, fl.binding(-8));
  for (std::int64_t f = -4; f <= 4; ++f)
    for (std::int64_t k = -3; k <= 3; ++k) {
      const auto a = pi1(win, fam, PiecePoint{v, Word("b"), f});
      const auto b = pi1(win, fam, PiecePoint{v, Word("b"), f + k});
      EXPECT_EQ(shortest_distance(fl.carrier(), a.vertex, b.vertex), Rational(std::abs(k)));
    }
  const PieceId w = fam.members[1].front();
  EXPECT_EQ(kind_of([&] { pi1(win, fam, PiecePoint{w, Word(), 0}); }), ErrorKind::IndexClash);
}

TEST(Pi1, HeightNineWithWiderWindow) {
  auto params = qtlab::testing::scenario("flip3").window;
  params.W = 10;
  const CKAWindow win(GraphOfGroupsConfig::from_config(qtlab::testing::scenario("flip3").config), params);
  const auto fam = build_fiber_family(win);
  const PieceId v = fam.members[0].front();
  EXPECT_EQ(pi1(win, fam, PiecePoint{v, Word(), 9}).vertex, fam.lines[v]->binding(9));
}

TEST(Pi2, PlanePointMapsToItself) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  for (const auto& piece : win.pieces()) {
    const auto e0 = chosen_edge(win, piece.id);
    const PieceId w0 = win.across(e0, piece.id);
    const auto& line = win.line(e0, piece.id);
    for (std::int64_t h = -1; h <= 1; ++h)
      for (std::int64_t f = -3; f <= 3; ++f) {
        const Word base = line.point(h);
        if (!win.base_tree(piece.id).contains(base)) continue;
        const auto got = pi2(win, fam, PiecePoint{piece.id, base, f});
        EXPECT_EQ(got.piece, w0);
        auto [hw, fw] = win.convert(e0, piece.id, h, f);
        EXPECT_EQ(got.vertex, *fam.lines[w0]->plane(e0, hw, fw));
      }
  }
}

TEST(Pi2, OffPlanePointIsPushedAlongItsStrip) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const auto& piece = win.pieces()[rng() % win.pieces().size()];
    const Word base = random_word(rng, 2, win.params().R_tree - 1);
    const std::int64_t f = static_cast<std::int64_t>(rng() % 7) - 3;
    const auto e0 = chosen_edge(win, piece.id);
    const auto& line = win.line(e0, piece.id);
    // nearest line point by scanning parameters
    std::int64_t best_h = 0, best_d = -1;
    for (std::int64_t h = -12; h <= 12; ++h) {
      const auto d = tree_distance(line.point(h), base);
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best_h = h;
      }
    }
    const auto pushed = pi2(win, fam, PiecePoint{piece.id, line.point(best_h), f});
    EXPECT_EQ(pi2(win, fam, PiecePoint{piece.id, base, f}).vertex, pushed.vertex);
  }
}

TEST(Pi2, FiberShiftMovesImageBoundedly) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  const PieceId v = win.root();
  const auto e0 = chosen_edge(win, v);
  const auto m = win.frame_from(e0, v).m;
  const auto step = std::abs(m[1]) + std::abs(m[3]);
  const auto& fl = *fam.lines[win.across(e0, v)];
  const auto a = pi2(win, fam, PiecePoint{v, Word(), 0});
  for (std::int64_t k = 1; k <= 4; ++k) {
    const auto b = pi2(win, fam, PiecePoint{v, Word(), k});
    const auto d = shortest_distance(fl.carrier(), a.vertex, b.vertex);
    EXPECT_GT(d, Rational(0));
    EXPECT_LE(d, Rational(k * step));
  }
}

TEST(VerticalFormula, SamePiecePairIsExact) {
  for (const char* name : {"flip3", "twisted3"}) {
    const auto win = qtlab::testing::window(name);
    const auto fam = build_fiber_family(win);
    std::vector<std::pair<PiecePoint, PiecePoint>> pairs;
    for (auto v : fam.members[0])
      for (std::int64_t k = 0; k <= 6; ++k) pairs.push_back({PiecePoint{v, Word("a"), -3}, PiecePoint{v, Word("B"), k - 3}});
    const auto r = vertical_formula_report(win, fam, pairs);
    ASSERT_EQ(r.rows.size(), pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EXPECT_EQ(r.rows[i].dv, Rational(std::abs(pairs[i].second.fiber - pairs[i].first.fiber))) << name;
      EXPECT_EQ(r.rows[i].rhs, r.rows[i].dv) << name;
    }
  }
}

TEST(VerticalFormula, SampledPairsHaveNoViolations) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  const auto r = vertical_formula_report(win, fam, clean_pairs(win, 200, 42, 4, 1));
  EXPECT_EQ(r.rows.size(), 200u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_GT(r.C, Rational(0));
  for (const auto& row : r.rows) EXPECT_LE(row.dv, r.C * (row.rhs + 1));
  const auto j = to_json(r);
  EXPECT_EQ(j["pairs"], 200);
}

TEST(FiberEstimates, SamePiecePairsContributeNoRows) {
  const auto& win = flip3();
  const auto& fam = flip3_fibers();
  const PieceId v = fam.members[0].front();
  const auto r = check_fiber_estimates(win, fam, {{PiecePoint{v, Word(), 0}, PiecePoint{v, Word("ab"), 3}}});
  EXPECT_TRUE(r.rows.empty());
  EXPECT_TRUE(r.pass());
}

TEST(FiberEstimates, EnvelopeHoldsOnSample) {
  for (const char* name : {"flip3", "twisted3"}) {
    const auto win = qtlab::testing::window(name);
    const auto fam = build_fiber_family(win);
    const auto r = check_fiber_estimates(win, fam, clean_pairs(win, 100, 42, 4, 1));
    EXPECT_FALSE(r.rows.empty());
    EXPECT_EQ(r.additive, 4 * fam.r + 4);
    for (const auto& row : r.rows) {
      EXPECT_LE(row.lhs, r.multiplicative * row.rhs + r.additive) << name << " " << row.estimate;
      EXPECT_LE(row.rhs, r.multiplicative * row.lhs + r.additive) << name << " " << row.estimate;
    }
    EXPECT_TRUE(r.pass()) << name;
  }
}
