#include "qtlab/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qtlab/error.hpp"

namespace qtlab {

EmbeddingContext build_embedding_context(const CKAWindow& win, const Rational& r, std::optional<Rational> K) {
  EmbeddingContext ctx;
  ctx.win = &win;
  ctx.r = r;
  auto fam = std::make_shared<FiberFamily>(build_fiber_family(win, r));
  // xi_witnessed does not depend on the xi that is checked.
  ctx.xi = verify_fiber_axioms(*fam, Rational(1000)).xi_witnessed();
  ctx.K = K ? *K : 4 * std::max(ctx.xi, Rational(1));
  for (std::size_t c = 0; c < 2; ++c) {
    ctx.carriers[c] = std::make_shared<const QuasiTreeOfSpaces>(build_quasi_tree(fam->family[c], ctx.K));
  }
  ctx.fibers = std::move(fam);
  ctx.coned = std::make_shared<const ConedPieces>(win, r);
  return ctx;
}

EmbeddingCoordinates embed(const EmbeddingContext& ctx, const PiecePoint& x) {
  const CKAWindow& win = *ctx.win;
  if (!win.contains(x)) throw Error(ErrorKind::WindowExceeded, "point outside the window");
  const FiberFamily& fam = *ctx.fibers;
  EmbeddingCoordinates c;
  c.tree = x.piece;
  const FiberPoint p1 = pi1(win, fam, x);
  const FiberPoint p2 = pi2(win, fam, x);
  c.f1 = ctx.carriers[0]->carrier_vertex(fam.member_index(p1.piece), p1.vertex);
  c.f2 = ctx.carriers[1]->carrier_vertex(fam.member_index(p2.piece), p2.vertex);
  c.x1 = pi3(win, x);
  c.x2 = pi4(win, x, win.across(chosen_edge(win, x.piece), x.piece));
  return c;
}

double ProductDistance::l2() const {
  double s = 0;
  for (const auto* q : {&tree, &f1, &f2, &x1, &x2}) s += to_double(*q) * to_double(*q);
  return std::sqrt(s);
}

namespace {

Rational carrier_distance(const QuasiTreeOfSpaces& qt, WeightedGraph::Vertex a, WeightedGraph::Vertex b) {
  if (a == b) return 0;
  return shortest_distance(qt.carrier, a, b);
}

}  // namespace

ProductDistance product_distance(const EmbeddingContext& ctx, const EmbeddingCoordinates& a,
                                 const EmbeddingCoordinates& b) {
  ProductDistance d;
  d.tree = ctx.win->tree_distance(a.tree, b.tree);
  d.f1 = carrier_distance(*ctx.carriers[0], a.f1, b.f1);
  d.f2 = carrier_distance(*ctx.carriers[1], a.f2, b.f2);
  d.x1 = global_thick_distance(*ctx.coned, 1, a.x1, b.x1, ctx.K).total;
  d.x2 = global_thick_distance(*ctx.coned, 2, a.x2, b.x2, ctx.K).total;
  return d;
}

QIFitReport fit_qi_constants(const EmbeddingContext& ctx, const std::vector<std::pair<PiecePoint, PiecePoint>>& samples,
                             std::uint64_t seed, std::optional<Rational> lipschitz, std::size_t spot_checks,
                             std::size_t min_pairs) {
  const CKAWindow& win = *ctx.win;
  QIFitReport rep;
  rep.R_bs = win.params().R_bs;
  rep.R_tree = win.params().R_tree;
  rep.W = win.params().W;
  rep.K = ctx.K;
  rep.r = ctx.r;
  rep.seed = seed;
  rep.spot_mu = 0;

  std::vector<std::pair<PiecePoint, PiecePoint>> kept;
  for (const auto& [x, y] : samples) {
    if (x == y) continue;
    auto q = win.oracle().query(x, y);
    if (q.boundary_suspect) {
      ++rep.boundary_dropped;
      continue;
    }
    kept.emplace_back(x, y);
    if (rep.spot_checks < spot_checks) {
      ++rep.spot_checks;
      const Rational l1 = path_components(special_path(win, x, y)).l1;
      rep.spot_mu = std::max(rep.spot_mu, l1 / (q.distance + 1));
    }
  }
  if (kept.size() < min_pairs) {
    throw Error(ErrorKind::InsufficientSample, std::to_string(kept.size()) + " usable pairs, need " +
                                                   std::to_string(min_pairs));
  }

  rep.lambda = 1;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& [x, y] = kept[i];
    QIRow row;
    row.pair = i;
    row.d_X = path_components(special_path(win, x, y)).l1;
    row.d_product = product_distance(ctx, embed(ctx, x), embed(ctx, y)).total();
    row.ratio = row.d_X > 0 ? to_double(row.d_product / row.d_X) : 0.0;
    rep.lambda = std::max({rep.lambda, row.d_product / (row.d_X + 1), row.d_X / (row.d_product + 1)});
    rep.rows.push_back(row);
  }
  rep.c = rep.lambda;
  for (const auto& row : rep.rows) {
    if (row.d_product > rep.lambda * row.d_X + rep.c || row.d_X > rep.lambda * row.d_product + rep.c) ++rep.violations;
  }

  rep.lipschitz = lipschitz ? *lipschitz : rep.lambda;
  for (const auto& row : rep.rows) {
    if (row.d_product > rep.lipschitz * row.d_X + rep.lipschitz) ++rep.lipschitz_failures;
  }
  return rep;
}

std::string QIFitReport::headline() const {
  std::ostringstream s;
  s << "QI(lambda=" << to_string(lambda) << ", c=" << to_string(c) << ", violations=" << violations
    << ", pairs=" << rows.size() << ", window=R_bs" << R_bs << "/R_tree" << R_tree << "/W" << W << ")";
  return s.str();
}

nlohmann::json to_json(const QIFitReport& r) {
  nlohmann::json j;
  j["headline"] = r.headline();
  j["lambda"] = to_string(r.lambda);
  j["lambda_value"] = to_double(r.lambda);
  j["c"] = to_string(r.c);
  j["violations"] = r.violations;
  j["lipschitz"] = to_string(r.lipschitz);
  j["lipschitz_failures"] = r.lipschitz_failures;
  j["pairs"] = r.rows.size();
  j["boundary_dropped"] = r.boundary_dropped;
  j["spot_checks"] = r.spot_checks;
  j["spot_mu"] = to_string(r.spot_mu);
  j["window"] = {{"R_bs", r.R_bs}, {"R_tree", r.R_tree}, {"W", r.W}, {"K", to_string(r.K)}, {"r", to_string(r.r)},
                 {"seed", r.seed}};
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"pair", row.pair}, {"d_X", to_string(row.d_X)}, {"d_product", to_string(row.d_product)},
                         {"ratio", row.ratio}});
  }
  return j;
}

std::string to_csv(const QIFitReport& r) {
  std::ostringstream s;
  s << "pair,d_X,d_product,ratio\n";
  for (const auto& row : r.rows) {
    s << row.pair << ',' << to_string(row.d_X) << ',' << to_string(row.d_product) << ',' << row.ratio << '\n';
  }
  return s.str();
}

QIStability fit_qi_stability(const EmbeddingContext& base, const EmbeddingContext& doubled,
                             const std::vector<std::pair<PiecePoint, PiecePoint>>& samples, std::uint64_t seed) {
  QIStability s;
  s.base = fit_qi_constants(base, samples, seed);
  s.doubled = fit_qi_constants(doubled, samples, seed, s.base.lambda);
  s.drift = std::abs(to_double(s.doubled.lambda) - to_double(s.base.lambda)) / to_double(s.base.lambda);
  return s;
}

nlohmann::json to_json(const QIStability& s) {
  return {{"base", to_json(s.base)},
          {"doubled", to_json(s.doubled)},
          {"drift", s.drift},
          {"stable", s.stable()}};
}

}  // namespace qtlab
