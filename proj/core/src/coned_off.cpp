#include "qtlab/coned_off.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "qtlab/error.hpp"

namespace qtlab {

using Vertex = WeightedGraph::Vertex;

namespace {

Rational arc_length(const WeightedGraph& g, Vertex u, Vertex v) {
  for (const auto& a : g.neighbors(u)) {
    if (a.to == v) return a.length;
  }
  throw std::invalid_argument("arc_length: vertices not adjacent");
}

}  // namespace

Rational ConedSpace::line_distance(std::size_t i, Vertex u, Vertex v) const {
  const std::size_t a = slot[i].at(u);
  const std::size_t b = slot[i].at(v);
  if (!position[i].empty()) return abs(position[i][a] - position[i][b]);
  return matrix[i][a * lines[i].size() + b];
}

WeightedGraph ConedSpace::base() const {
  WeightedGraph g;
  for (std::size_t v = 0; v < base_count; ++v) g.add_vertex(graph.label(static_cast<Vertex>(v)));
  for (const auto& e : graph.edges()) {
    if (!is_apex(e.u) && !is_apex(e.v)) g.add_edge(e.u, e.v, e.length, e.tag);
  }
  return g;
}

ConedSpace cone_off(const WeightedGraph& base, std::vector<std::vector<Vertex>> lines, const Rational& r,
                    bool geodesic_lines) {
  ConedSpace cs;
  cs.graph = base;
  cs.base_count = base.vertex_count();
  cs.r = r;
  cs.slot.resize(lines.size());
  cs.position.resize(lines.size());
  cs.matrix.resize(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (!base.contains(line[k])) throw std::invalid_argument("cone_off: line vertex outside the base");
      cs.slot[i].emplace(line[k], k);
    }
    if (geodesic_lines) {
      Rational at = 0;
      for (std::size_t k = 0; k < line.size(); ++k) {
        if (k > 0) at += arc_length(base, line[k - 1], line[k]);
        cs.position[i].push_back(at);
      }
    } else {
      auto& m = cs.matrix[i];
      m.resize(line.size() * line.size());
      for (std::size_t a = 0; a < line.size(); ++a) {
        auto d = distances_from(base, line[a]);
        for (std::size_t b = 0; b < line.size(); ++b) m[a * line.size() + b] = d[line[b]];
      }
    }
    auto apex = cs.graph.add_vertex("c" + std::to_string(i));
    cs.apexes.push_back(apex);
    for (auto v : line) cs.graph.add_edge(apex, v, r, 1);
  }
  cs.lines = std::move(lines);
  return cs;
}

ThickDecomposition decompose(const ConedSpace& cs, const std::vector<Vertex>& path, const Rational& K) {
  ThickDecomposition d;
  d.path = path;
  d.value = 0;
  Rational run = 0;
  auto close = [&] {
    if (run > 0) {
      d.segments.push_back(run);
      d.value += cutoff(run, K);
    }
    run = 0;
  };
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (cs.is_apex(path[i + 1])) {
      if (i + 2 >= path.size()) throw std::invalid_argument("decompose: path ends at an apex");
      const Vertex u = path[i];
      const Vertex c = path[i + 1];
      const Vertex w = path[i + 2];
      const Rational len = arc_length(cs.graph, u, c) + arc_length(cs.graph, c, w);
      if (cs.line_distance(cs.line_of_apex(c), u, w) <= K) {
        run += len;
      } else {
        close();
        d.excluded.emplace_back(u, w);
      }
      ++i;
    } else {
      run += arc_length(cs.graph, path[i], path[i + 1]);
    }
  }
  close();
  return d;
}

namespace {

struct RunState {
  Rational run;
  Rational acc;
};

void prune(std::vector<RunState>& states) {
  std::sort(states.begin(), states.end(), [](const RunState& a, const RunState& b) {
    if (a.run != b.run) return a.run > b.run;
    return a.acc > b.acc;
  });
  std::vector<RunState> kept;
  for (const auto& s : states) {
    if (kept.empty() || s.acc > kept.back().acc) kept.push_back(s);
  }
  states = std::move(kept);
}

}  // namespace

Rational thick_distance(const ConedSpace& cs, const std::vector<Rational>& dx, const std::vector<Rational>& dy, Vertex x,
                        Vertex y, const Rational& K) {
  if (x == y) return 0;
  const Rational D = dx[y];
  if (!reachable(D)) throw Error(ErrorKind::DisconnectedPair, cs.graph.label(x) + " and " + cs.graph.label(y));
  auto on_geodesic = [&](Vertex v) { return reachable(dx[v]) && reachable(dy[v]) && dx[v] + dy[v] == D; };

  std::vector<Vertex> order;
  for (Vertex v = 0; v < cs.base_count; ++v) {
    if (on_geodesic(v)) order.push_back(v);
  }
  std::sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return dx[a] < dx[b]; });

  std::unordered_map<Vertex, std::vector<RunState>> states;
  states[x].push_back({Rational(0), Rational(0)});
  for (Vertex u : order) {
    auto it = states.find(u);
    if (it == states.end()) continue;
    auto& here = it->second;
    prune(here);
    if (u == y) break;
    for (const auto& a : cs.graph.neighbors(u)) {
      if (!on_geodesic(a.to) || dx[u] + a.length != dx[a.to]) continue;
      if (!cs.is_apex(a.to)) {
        auto& next = states[a.to];
        for (const auto& s : here) next.push_back({s.run + a.length, s.acc});
        continue;
      }
      const std::size_t line = cs.line_of_apex(a.to);
      for (const auto& b : cs.graph.neighbors(a.to)) {
        if (!on_geodesic(b.to) || dx[a.to] + b.length != dx[b.to]) continue;
        const bool bounded = cs.line_distance(line, u, b.to) <= K;
        auto& next = states[b.to];
        for (const auto& s : here) {
          if (bounded) {
            next.push_back({s.run + a.length + b.length, s.acc});
          } else {
            next.push_back({Rational(0), s.acc + cutoff(s.run, K)});
          }
        }
      }
    }
  }
  Rational best = 0;
  for (const auto& s : states.at(y)) best = std::max(best, s.acc + cutoff(s.run, K));
  return best;
}

Rational thick_distance(const ConedSpace& cs, Vertex x, Vertex y, const Rational& K) {
  return thick_distance(cs, distances_from(cs.graph, x), distances_from(cs.graph, y), x, y, K);
}

std::vector<std::vector<Vertex>> enumerate_geodesics(const WeightedGraph& g, Vertex x, Vertex y, std::size_t budget) {
  std::vector<char> used(g.vertex_count(), 0);
  std::vector<Vertex> path{x};
  used[x] = 1;
  std::optional<Rational> best;
  std::vector<std::vector<Vertex>> found;
  // Pass 1 finds the minimum; pass 2 collects every path that attains it.
  std::function<void(Rational, bool)> dfs = [&](Rational len, bool collect) {
    const Vertex u = path.back();
    if (u == y) {
      if (!best || len < *best) best = len;
      if (collect && len == *best) {
        if (found.size() >= budget) throw Error(ErrorKind::BudgetExceeded, "too many geodesics");
        found.push_back(path);
      }
      return;
    }
    for (const auto& a : g.neighbors(u)) {
      if (used[a.to]) continue;
      const Rational next = len + a.length;
      if (best && next > *best) continue;
      used[a.to] = 1;
      path.push_back(a.to);
      dfs(next, collect);
      path.pop_back();
      used[a.to] = 0;
    }
  };
  dfs(0, false);
  if (!best) throw Error(ErrorKind::DisconnectedPair, g.label(x) + " and " + g.label(y));
  dfs(0, true);
  return found;
}

Rational thick_distance_exhaustive(const ConedSpace& cs, Vertex x, Vertex y, const Rational& K) {
  const WeightedGraph base = cs.base();
  std::map<Vertex, std::vector<Rational>> rows;
  auto base_distance = [&](Vertex u, Vertex v) {
    auto it = rows.find(u);
    if (it == rows.end()) it = rows.emplace(u, distances_from(base, u)).first;
    return it->second[v];
  };
  Rational best = 0;
  for (const auto& path : enumerate_geodesics(cs.graph, x, y)) {
    Rational value = 0;
    Rational run = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (cs.is_apex(path[i + 1])) {
        const Rational len = arc_length(cs.graph, path[i], path[i + 1]) + arc_length(cs.graph, path[i + 1], path[i + 2]);
        if (base_distance(path[i], path[i + 2]) <= K) {
          run += len;
        } else {
          value += cutoff(run, K);
          run = 0;
        }
        ++i;
      } else {
        run += arc_length(cs.graph, path[i], path[i + 1]);
      }
    }
    value += cutoff(run, K);
    best = std::max(best, value);
  }
  return best;
}

// ---------------------------------------------------------------------------

Vertex ConedPiece::vertex(const Word& w) const {
  auto v = tree->index(w);
  if (!v) throw Error(ErrorKind::WindowExceeded, "base point " + w.to_string() + " outside the coned ball");
  return *v;
}

std::optional<Vertex> ConedPiece::apex(const Axis& line) const {
  auto it = line_index.find({line.word().letters(), line.anchor().letters()});
  if (it == line_index.end()) return std::nullopt;
  return space.apexes[it->second];
}

int coned_radius(int rank, int min_radius, std::size_t cap) {
  auto ball = [&](int R) {
    std::size_t total = 1;
    std::size_t sphere = 2 * static_cast<std::size_t>(rank);
    for (int k = 1; k <= R; ++k) {
      total += sphere;
      sphere *= 2 * static_cast<std::size_t>(rank) - 1;
    }
    return total;
  };
  int R = min_radius;
  while (R < 8 && ball(R + 1) <= cap) ++R;
  return R;
}

namespace {

// Cosets g<w> of each word with at least two vertices in the ball, as
// ordered vertex lists.
void collect_cosets(const FreeTree& tree, const std::vector<Word>& words, std::vector<std::vector<Vertex>>& lines,
                    std::map<std::pair<std::string, std::string>, std::size_t>& index) {
  for (const auto& w : words) {
    for (const auto& g : tree.vertices()) {
      Axis axis(w, g);
      auto key = std::make_pair(w.letters(), axis.anchor().letters());
      if (index.count(key)) continue;
      auto range = axis.parameters_within(tree.radius());
      if (!range || range->second <= range->first) {
        index.emplace(key, static_cast<std::size_t>(-1));
        continue;
      }
      std::vector<Vertex> line;
      for (auto h = range->first; h <= range->second; ++h) line.push_back(*tree.index(axis.point(h)));
      index.emplace(key, lines.size());
      lines.push_back(std::move(line));
    }
  }
  std::erase_if(index, [](const auto& kv) { return kv.second == static_cast<std::size_t>(-1); });
}

}  // namespace

ConedPieces::ConedPieces(const CKAWindow& win, const Rational& r) : win_(&win), r_(r) {
  const auto& cfg = win.config();
  for (const auto& p : win.pieces()) {
    if (by_type_.count(p.type)) continue;
    const auto& v = cfg.vertices[p.type];
    auto piece = std::make_shared<ConedPiece>();
    piece->type = p.type;
    piece->tree = std::make_shared<const FreeTree>(v.rank, coned_radius(v.rank, win.params().R_tree));
    std::vector<Word> words;
    for (auto e : cfg.incident(p.type)) words.push_back(v.words.at(cfg.edges[e].id));
    std::vector<std::vector<Vertex>> lines;
    collect_cosets(*piece->tree, words, lines, piece->line_index);
    piece->space = cone_off(piece->tree->graph(), std::move(lines), r, true);
    by_type_.emplace(p.type, std::move(piece));
  }
}

namespace {

using End = std::variant<Word, Axis>;

std::pair<Word, Word> resolve_ends(const End& a, const End& b) {
  auto nearest = [](const Axis& l, const Word& p) { return l.point(l.nearest_parameter(p)); };
  if (auto wa = std::get_if<Word>(&a)) {
    if (auto wb = std::get_if<Word>(&b)) return {*wa, *wb};
    return {*wa, nearest(std::get<Axis>(b), *wa)};
  }
  const Axis& la = std::get<Axis>(a);
  if (auto wb = std::get_if<Word>(&b)) return {nearest(la, *wb), *wb};
  const Axis& lb = std::get<Axis>(b);
  if (la == lb) {
    Word p = nearest(la, Word());
    return {p, p};
  }
  Strip s = strip_between_lines(la, lb);
  return {s.base_segment.front(), s.base_segment.back()};
}

}  // namespace

ThickBreakdown global_thick_distance(const ConedPieces& cp, int cls, const ThickPoint& x, const ThickPoint& y,
                                     const Rational& K) {
  const CKAWindow& win = cp.window();
  const auto alpha = win.piece_path(x.piece, y.piece);
  const auto path = win.edge_path(x.piece, y.piece);
  const std::size_t n = alpha.size() - 1;
  ThickBreakdown out;
  out.total = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const PieceId v = alpha[i];
    if (win.piece(v).cls != cls) continue;
    End entry = i == 0 ? x.at : End(win.line(path[i - 1], v));
    End exit = i == n ? y.at : End(win.line(path[i], v));
    auto [a, b] = resolve_ends(entry, exit);
    const ConedPiece& piece = cp.of(v);
    ThickTerm t{v, a, b, a == b ? Rational(0) : thick_distance(piece.space, piece.vertex(a), piece.vertex(b), K)};
    out.total += t.value;
    out.terms.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Word> default_quasi_line_words(const GogVertex& v) {
  std::set<char> coned;
  for (const auto& [edge, w] : v.words) {
    if (w.length() == 1) coned.insert(static_cast<char>(std::tolower(w.letters()[0])));
  }
  std::vector<Word> out;
  std::string product;
  for (int i = 0; i < v.rank; ++i) {
    const char c = static_cast<char>('a' + i);
    if (coned.count(c)) {
      product += c;
    } else {
      out.emplace_back(std::string(1, c));
    }
  }
  if (product.size() >= 2) out.emplace_back(product);
  return out;
}

QuasiLineFamily quasi_line_family(const ConedPiece& piece, const std::vector<Word>& words, int member_radius) {
  QuasiLineFamily q;
  q.theta = 0;
  if (words.empty()) return q;
  const FreeTree& tree = *piece.tree;
  const ConedSpace& cs = piece.space;
  const auto from_identity = distances_from(cs.graph, piece.vertex(Word()));
  for (const auto& w : words) {
    if (!w.cyclically_reduced() || w.empty()) {
      throw Error(ErrorKind::NotLoxodromic, w.to_string() + " is not cyclically reduced");
    }
    const auto k_max = tree.radius() / static_cast<std::int64_t>(w.length());
    if (k_max < 2) throw Error(ErrorKind::NotLoxodromic, w.to_string() + ": ball too small to see two translates");
    Rational last = 0;
    for (std::int64_t k = 1; k <= k_max; ++k) {
      const Rational d = from_identity[piece.vertex(w.power(k))];
      if (d <= last) {
        throw Error(ErrorKind::NotLoxodromic, w.to_string() + ": d(1, w^" + std::to_string(k) + ") = " + to_string(d));
      }
      last = d;
    }
  }
  std::vector<ProjectionFamily::Member> members;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& w : words) {
    for (const auto& g : tree.vertices()) {
      if (static_cast<int>(g.length()) > member_radius) break;
      Axis axis(w, g);
      if (!seen.emplace(w.letters(), axis.anchor().letters()).second) continue;
      auto range = axis.parameters_within(tree.radius());
      if (!range || range->second <= range->first) continue;
      std::vector<Vertex> pts;
      auto graph = std::make_shared<WeightedGraph>();
      for (auto h = range->first; h <= range->second; ++h) {
        pts.push_back(*tree.index(axis.point(h)));
        auto v = graph->add_vertex(std::to_string(h));
        if (v > 0) graph->add_edge(v - 1, v);
      }
      members.push_back({w.to_string() + "@" + axis.anchor().to_string(), graph});
      q.words.push_back(w);
      q.axes.push_back(axis);
      q.first.push_back(range->first);
      q.points.push_back(std::move(pts));
    }
  }
  const std::size_t m = q.axes.size();
  std::vector<std::vector<std::vector<Vertex>>> proj(m, std::vector<std::vector<Vertex>>(m));
  for (std::size_t x = 0; x < m; ++x) {
    const auto d = distances_from(cs.graph, q.points[x]);
    for (std::size_t y = 0; y < m; ++y) {
      if (x == y) continue;
      Rational low = -1;
      for (auto v : q.points[y]) {
        if (reachable(d[v]) && (low < 0 || d[v] < low)) low = d[v];
      }
      for (std::size_t k = 0; k < q.points[y].size(); ++k) {
        if (d[q.points[y][k]] == low) proj[y][x].push_back(static_cast<Vertex>(k));
      }
      q.theta = std::max(q.theta, Rational(static_cast<std::int64_t>(proj[y][x].back() - proj[y][x].front())));
    }
  }
  if (m > 0) q.family = std::make_shared<const ProjectionFamily>(std::move(members), std::move(proj));
  return q;
}

std::vector<Rational> quasi_line_distances(const QuasiLineFamily& f, const std::vector<Rational>& da,
                                           const std::vector<Rational>& db) {
  std::vector<Rational> out;
  out.reserve(f.size());
  for (const auto& pts : f.points) {
    auto nearest = [&](const std::vector<Rational>& d) {
      Rational low = -1;
      for (auto v : pts) {
        if (low < 0 || d[v] < low) low = d[v];
      }
      std::size_t lo = pts.size(), hi = 0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (d[pts[k]] == low) {
          lo = std::min(lo, k);
          hi = std::max(hi, k);
        }
      }
      return std::make_pair(lo, hi);
    };
    auto [a0, a1] = nearest(da);
    auto [b0, b1] = nearest(db);
    out.emplace_back(static_cast<std::int64_t>(std::max(a1, b1) - std::min(a0, b0)));
  }
  return out;
}

// ---------------------------------------------------------------------------

AffineFit fit_affine(std::vector<FormulaFitRow> rows) {
  AffineFit fit;
  fit.lambda = 1;
  for (const auto& r : rows) {
    fit.lambda = std::max({fit.lambda, r.lhs / (r.rhs + 1), r.rhs / (r.lhs + 1)});
  }
  for (const auto& r : rows) {
    if (r.lhs > fit.lambda * (r.rhs + 1) || r.rhs > fit.lambda * (r.lhs + 1)) ++fit.violations;
  }
  fit.rows = std::move(rows);
  return fit;
}

RelativePresentation RelativePresentation::from_config(const Config& cfg) {
  RelativePresentation p;
  p.rank = static_cast<int>(cfg.get_int_or("group", "rank", 2));
  if (p.rank < 1 || p.rank > 26) throw Error(ErrorKind::ConfigInvalid, "group rank out of range");
  for (const auto& id : cfg.subsections("peripheral")) {
    Word w(cfg.get_string("peripheral." + id, "word"));
    if (w.empty() || !w.cyclically_reduced() || w.rank_used() > p.rank) {
      throw Error(ErrorKind::ConfigInvalid, "peripheral." + id + ": word must be nontrivial, cyclically reduced and within rank");
    }
    p.peripherals.emplace_back(id, w);
  }
  if (p.peripherals.empty()) throw Error(ErrorKind::ConfigInvalid, "no [peripheral.<id>] sections");
  return p;
}

RelativeSpace build_relative_space(const RelativePresentation& pres, int radius) {
  RelativeSpace rs;
  rs.pres = pres;
  rs.tree = std::make_shared<const FreeTree>(pres.rank, radius);
  std::vector<Word> words;
  for (const auto& [id, w] : pres.peripherals) words.push_back(w);
  std::vector<std::vector<Vertex>> lines;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  collect_cosets(*rs.tree, words, lines, index);
  rs.space = cone_off(rs.tree->graph(), std::move(lines), Rational(1, 2), true);
  return rs;
}

namespace {

std::vector<RelativeReport> relative_reports(const RelativeSpace& rs, const std::vector<std::pair<Word, Word>>& samples,
                                             const std::vector<Rational>& Ks) {
  std::vector<RelativeReport> out(Ks.size());
  std::vector<std::vector<FormulaFitRow>> fit_rows(Ks.size());
  for (std::size_t k = 0; k < Ks.size(); ++k) {
    out[k].K = Ks[k];
    out[k].radius = rs.tree->radius();
  }
  const auto& tree = *rs.tree;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [x, y] = samples[i];
    const Vertex vx = *tree.index(x);
    const Vertex vy = *tree.index(y);
    const Vertex sx[] = {vx};
    const Rational word_distance(hop_distances(tree.graph(), sx)[vy]);
    const auto dx = distances_from(rs.space.graph, vx);
    const auto dy = distances_from(rs.space.graph, vy);
    // Cosets off the geodesic [x, y] see x and y project to one point.
    std::vector<Rational> dP;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& g : tree_geodesic(x, y)) {
      for (const auto& [id, w] : rs.pres.peripherals) {
        Axis P(w, g);
        if (!seen.emplace(w.letters(), P.anchor().letters()).second) continue;
        dP.emplace_back(std::abs(P.nearest_parameter(x) - P.nearest_parameter(y)));
      }
    }
    for (std::size_t k = 0; k < Ks.size(); ++k) {
      RelativeRow row{x, y, word_distance, thick_distance(rs.space, dx, dy, vx, vy, Ks[k]), Rational(0)};
      for (const auto& d : dP) row.peripheral += cutoff(d, Ks[k]);
      fit_rows[k].push_back({i, row.word_distance, row.thick + row.peripheral});
      out[k].rows.push_back(std::move(row));
    }
  }
  for (std::size_t k = 0; k < Ks.size(); ++k) out[k].fit = fit_affine(std::move(fit_rows[k]));
  return out;
}

std::vector<std::pair<Word, Word>> word_pairs(std::mt19937_64& rng, int rank, int radius, std::size_t count) {
  std::vector<std::pair<Word, Word>> out;
  while (out.size() < count) {
    Word a = random_word(rng, rank, radius);
    Word b = random_word(rng, rank, radius);
    if (a != b) out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

}  // namespace

RelativeReport validate_relative_formula(const RelativeSpace& rs, const std::vector<std::pair<Word, Word>>& samples,
                                         const Rational& K) {
  return relative_reports(rs, samples, {K}).front();
}

bool RelativeSweep::pass() const {
  if (!threshold) return false;
  auto clean = [](const std::vector<RelativeReport>& v) {
    return std::all_of(v.begin(), v.end(), [](const RelativeReport& r) { return r.fit.violations == 0; });
  };
  return clean(base) && clean(doubled);
}

RelativeSweep sweep_relative_formula(const RelativePresentation& pres, int radius, const std::vector<Rational>& Ks,
                                     std::size_t samples, std::uint64_t seed, double tolerance) {
  RelativeSweep s;
  std::mt19937_64 rng(seed);
  const int half = std::max(1, radius / 2);
  const auto pairs = word_pairs(rng, pres.rank, half, samples);
  s.base = relative_reports(build_relative_space(pres, half), pairs, Ks);
  s.doubled = relative_reports(build_relative_space(pres, radius), pairs, Ks);
  for (std::size_t k = 0; k < Ks.size(); ++k) {
    const double a = to_double(s.base[k].fit.lambda);
    const double b = to_double(s.doubled[k].fit.lambda);
    s.drift.push_back(std::abs(b - a) / a);
  }
  for (std::size_t k = Ks.size(); k-- > 0;) {
    if (s.drift[k] >= tolerance || s.base[k].fit.violations > 0 || s.doubled[k].fit.violations > 0) break;
    s.threshold = Ks[k];
  }
  return s;
}

nlohmann::json to_json(const RelativeSweep& s) {
  nlohmann::json j;
  j["verdict"] = s.pass() ? "pass" : "fail";
  j["threshold"] = s.threshold ? nlohmann::json(to_string(*s.threshold)) : nlohmann::json(nullptr);
  j["grid"] = nlohmann::json::array();
  for (std::size_t k = 0; k < s.base.size(); ++k) {
    j["grid"].push_back({{"K", to_string(s.base[k].K)},
                         {"lambda", to_string(s.base[k].fit.lambda)},
                         {"lambda_doubled", to_string(s.doubled[k].fit.lambda)},
                         {"radius", s.base[k].radius},
                         {"radius_doubled", s.doubled[k].radius},
                         {"pairs", s.base[k].rows.size()},
                         {"violations", s.base[k].fit.violations + s.doubled[k].fit.violations},
                         {"drift", s.drift[k]}});
  }
  return j;
}

// ---------------------------------------------------------------------------

std::map<std::size_t, QuasiLineFamily> build_quasi_line_families(const ConedPieces& cp,
                                                                 const std::map<std::string, std::vector<Word>>& words) {
  const CKAWindow& win = cp.window();
  std::map<std::size_t, QuasiLineFamily> out;
  for (const auto& p : win.pieces()) {
    if (out.count(p.type)) continue;
    const auto& v = win.config().vertices[p.type];
    auto it = words.find(v.id);
    out.emplace(p.type, quasi_line_family(cp.of_type(p.type), it != words.end() ? it->second : default_quasi_line_words(v),
                                          win.params().R_tree));
  }
  return out;
}

ConeoffReport validate_coneoff_formula(const ConedPieces& cp, const std::map<std::size_t, QuasiLineFamily>& families,
                                       int cls, const std::vector<std::pair<PiecePoint, PiecePoint>>& samples,
                                       const Rational& K) {
  const CKAWindow& win = cp.window();
  ConeoffReport report;
  report.cls = cls;
  report.K = K;
  std::vector<FormulaFitRow> rows;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [x, y] = samples[i];
    ThickBreakdown b = global_thick_distance(cp, cls, pi3(win, x), pi3(win, y), K);
    ConeoffRow row{i, b.total, Rational(0), Rational(win.tree_distance(x.piece, y.piece))};
    for (const auto& t : b.terms) {
      const ConedPiece& piece = cp.of(t.piece);
      const auto da = distances_from(piece.space.graph, piece.vertex(t.entry));
      const auto db = distances_from(piece.space.graph, piece.vertex(t.exit));
      for (const auto& d : quasi_line_distances(families.at(piece.type), da, db)) row.quasi += cutoff(d, K);
    }
    rows.push_back({i, row.thick, row.quasi + row.tree});
    report.rows.push_back(row);
  }
  report.fit = fit_affine(std::move(rows));
  return report;
}

nlohmann::json to_json(const ConeoffReport& r) {
  nlohmann::json j;
  j["class"] = r.cls;
  j["K"] = to_string(r.K);
  j["lambda"] = to_string(r.fit.lambda);
  j["violations"] = r.fit.violations;
  j["pairs"] = r.rows.size();
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"thick", to_string(row.thick)}, {"quasi", to_string(row.quasi)}, {"tree", to_string(row.tree)}});
  }
  return j;
}

ThickPoint pi3(const CKAWindow&, const PiecePoint& x) { return {x.piece, x.base}; }

ThickPoint pi4(const CKAWindow& win, const PiecePoint& x, PieceId w0) {
  auto e = win.edge_between(x.piece, w0);
  if (!e) throw Error(ErrorKind::IndexClash, "Pi_4 needs a neighbor of rho(x)");
  return {w0, win.line(*e, w0)};
}

}  // namespace qtlab
