#include "qtlab/cka.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_set>

#include <boost/pending/disjoint_sets.hpp>

#include "qtlab/error.hpp"

namespace qtlab {

AffineFrame AffineFrame::inverse() const {
  const std::int64_t d = det();
  if (d != 1 && d != -1) throw Error(ErrorKind::ConfigInvalid, "gluing matrix is not unimodular");
  AffineFrame inv;
  inv.m = {d * m[3], -d * m[1], -d * m[2], d * m[0]};
  auto [a, b] = inv.linear(t[0], t[1]);
  inv.t = {-a, -b};
  return inv;
}

AffineFrame AffineFrame::then(const AffineFrame& next) const {
  AffineFrame out;
  const auto& n = next.m;
  out.m = {n[0] * m[0] + n[1] * m[2], n[0] * m[1] + n[1] * m[3], n[2] * m[0] + n[3] * m[2],
           n[2] * m[1] + n[3] * m[3]};
  auto [a, b] = next.apply(t[0], t[1]);
  out.t = {a, b};
  return out;
}

std::int64_t round_half_down(const Rational& q) {
  Rational shifted = q - Rational(1, 2);
  std::int64_t n = shifted.numerator();
  std::int64_t d = shifted.denominator();
  std::int64_t fl = n / d - ((n % d != 0 && n < 0) ? 1 : 0);
  return (Rational(fl) == shifted) ? fl : fl + 1;
}

// ---------------------------------------------------------------------------
// Graph of groups

std::size_t GraphOfGroupsConfig::vertex_index(const std::string& id) const {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].id == id) return i;
  throw Error(ErrorKind::ConfigInvalid, "unknown vertex '" + id + "'");
}

std::size_t GraphOfGroupsConfig::edge_index(const std::string& id) const {
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].id == id) return i;
  throw Error(ErrorKind::ConfigInvalid, "unknown edge '" + id + "'");
}

std::vector<std::size_t> GraphOfGroupsConfig::incident(std::size_t vertex) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].from == vertices[vertex].id || edges[i].to == vertices[vertex].id) out.push_back(i);
  }
  return out;
}

std::size_t GraphOfGroupsConfig::other_end(std::size_t edge, std::size_t vertex) const {
  const auto& e = edges[edge];
  return vertex_index(e.from == vertices[vertex].id ? e.to : e.from);
}

AffineFrame GraphOfGroupsConfig::gluing_from(std::size_t edge, std::size_t vertex) const {
  const auto& e = edges[edge];
  if (e.from == vertices[vertex].id) return e.gluing;
  return e.reverse ? *e.reverse : e.gluing.inverse();
}

void GraphOfGroupsConfig::validate() {
  auto invalid = [](const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); };
  if (vertices.empty()) invalid("graph of groups has no vertices");
  if (edges.empty()) invalid("graph of groups needs at least one edge");
  std::set<std::string> ids;
  for (const auto& v : vertices) {
    if (!ids.insert(v.id).second) invalid("duplicate vertex id " + v.id);
    if (v.rank < 1 || v.rank > 26) invalid("vertex " + v.id + ": rank out of range");
  }
  std::set<std::string> edge_ids;
  for (const auto& e : edges) {
    if (!edge_ids.insert(e.id).second) invalid("duplicate edge id " + e.id);
    vertex_index(e.from);
    vertex_index(e.to);
    if (e.from == e.to) invalid("edge " + e.id + " is a loop; underlying graph must be bipartite");
    const auto& m = e.gluing;
    if (m.det() != 1 && m.det() != -1) invalid("edge " + e.id + ": gluing matrix must have |det| = 1");
    if (m.m[1] == 0) invalid("edge " + e.id + ": fiber-nonparallel requires m12 != 0");
    if (e.reverse) {
      AffineFrame round = m.then(*e.reverse);
      if (!(round == AffineFrame{})) invalid("edge " + e.id + ": reverse gluing is not the inverse");
    }
  }

  // Connected and 2-colorable.
  std::vector<int> color(vertices.size(), 0);
  color[0] = vertices[0].cls != 0 ? vertices[0].cls : 1;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (auto e : incident(u)) {
      auto w = other_end(e, u);
      if (color[w] == 0) {
        color[w] = 3 - color[u];
        queue.push_back(w);
      } else if (color[w] == color[u]) {
        invalid("underlying graph is not bipartite (edge " + edges[e].id + ")");
      }
    }
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (color[i] == 0) invalid("underlying graph is not connected (vertex " + vertices[i].id + ")");
    if (vertices[i].cls != 0 && vertices[i].cls != color[i]) {
      invalid("vertex " + vertices[i].id + ": declared class contradicts the bipartition");
    }
    vertices[i].cls = color[i];
  }

  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& v = vertices[i];
    std::vector<Word> seen;
    for (auto e : incident(i)) {
      auto it = v.words.find(edges[e].id);
      if (it == v.words.end()) invalid("vertex " + v.id + ": missing boundary word for edge " + edges[e].id);
      const Word& w = it->second;
      if (w.empty() || !w.cyclically_reduced()) {
        invalid("vertex " + v.id + ": boundary word " + w.to_string() + " must be nontrivial and cyclically reduced");
      }
      if (w.rank_used() > v.rank) invalid("vertex " + v.id + ": word " + w.to_string() + " exceeds rank");
      if (w.proper_power()) invalid("vertex " + v.id + ": boundary word " + w.to_string() + " is a proper power");
      for (const auto& u : seen) {
        if (u.conjugate_to(w) || u.conjugate_to(w.inverse())) {
          invalid("vertex " + v.id + ": boundary words " + u.to_string() + " and " + w.to_string() +
                  " are commensurable");
        }
      }
      seen.push_back(w);
    }
    for (const auto& [edge_id, _] : v.words) {
      auto e = edge_index(edge_id);
      if (edges[e].from != v.id && edges[e].to != v.id) {
        invalid("vertex " + v.id + ": word given for non-incident edge " + edge_id);
      }
    }
  }
}

namespace {

AffineFrame frame_from_config(const Config& cfg, const std::string& sec, const std::string& mkey,
                              const std::string& tkey) {
  AffineFrame f;
  auto m = cfg.get_matrix(sec, mkey);
  if (m.size() != 2 || m[0].size() != 2) throw Error(ErrorKind::ConfigInvalid, "[" + sec + "] " + mkey + " must be 2x2");
  for (int i = 0; i < 4; ++i) {
    const Rational& q = m[static_cast<std::size_t>(i / 2)][static_cast<std::size_t>(i % 2)];
    if (q.denominator() != 1) throw Error(ErrorKind::ConfigInvalid, "[" + sec + "] " + mkey + " must be integral");
    f.m[static_cast<std::size_t>(i)] = q.numerator();
  }
  if (cfg.has(sec, tkey)) {
    auto t = cfg.get_rationals(sec, tkey);
    if (t.size() != 2 || t[0].denominator() != 1 || t[1].denominator() != 1) {
      throw Error(ErrorKind::ConfigInvalid, "[" + sec + "] " + tkey + " must be two integers");
    }
    f.t = {t[0].numerator(), t[1].numerator()};
  }
  return f;
}

}  // namespace

GraphOfGroupsConfig GraphOfGroupsConfig::from_config(const Config& cfg) {
  GraphOfGroupsConfig g;
  for (const auto& id : cfg.subsections("vertex")) {
    const std::string sec = "vertex." + id;
    GogVertex v;
    v.id = id;
    v.rank = static_cast<int>(cfg.get_int(sec, "rank"));
    v.cls = static_cast<int>(cfg.get_int_or(sec, "class", 0));
    for (const auto& [key, value] : cfg.section(sec)) {
      if (key.rfind("word.", 0) == 0) v.words.emplace(key.substr(5), Word(cfg.get_string(sec, key)));
    }
    g.vertices.push_back(std::move(v));
  }
  for (const auto& id : cfg.subsections("edge")) {
    const std::string sec = "edge." + id;
    GogEdge e;
    e.id = id;
    auto ends = cfg.get_strings(sec, "ends");
    if (ends.size() != 2) throw Error(ErrorKind::ConfigInvalid, "[" + sec + "] ends must list two vertices");
    e.from = ends[0];
    e.to = ends[1];
    e.gluing = frame_from_config(cfg, sec, "matrix", "translation");
    if (cfg.has(sec, "reverse_matrix")) e.reverse = frame_from_config(cfg, sec, "reverse_matrix", "reverse_translation");
    g.edges.push_back(std::move(e));
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Window

CKAWindow::CKAWindow(GraphOfGroupsConfig cfg, WindowParams params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  if (params_.R_bs < 0 || params_.R_tree < 1 || params_.W < 1 || params_.R_child < 0) {
    throw Error(ErrorKind::ConfigInvalid, "window sizes must be positive");
  }
  const std::size_t center = params_.center.empty() ? 0 : cfg_.vertex_index(params_.center);
  for (const auto& v : cfg_.vertices) {
    if (!trees_.count(v.rank)) trees_.emplace(v.rank, std::make_shared<const FreeTree>(v.rank, params_.R_tree));
  }

  pieces_.push_back(Piece{0, center, cfg_.vertices[center].cls, 0, std::nullopt, {}});
  for (std::size_t head = 0; head < pieces_.size(); ++head) {
    if (pieces_[head].depth == params_.R_bs) continue;
    const PieceId p = static_cast<PieceId>(head);
    const std::size_t type = pieces_[head].type;
    const int rank = cfg_.vertices[type].rank;
    const FreeTree reps(rank, params_.R_child);
    for (auto etype : cfg_.incident(type)) {
      const Word& w = cfg_.vertices[type].words.at(cfg_.edges[etype].id);
      std::set<Word> anchors;
      for (const auto& c : reps.vertices()) {
        Axis line(w, c);
        if (static_cast<int>(line.anchor().length()) <= params_.R_child) anchors.insert(line.anchor());
      }
      const std::optional<std::size_t> parent_edge =
          pieces_[head].parent ? std::optional(pieces_[head].edges.front()) : std::nullopt;
      for (const auto& a : anchors) {
        if (parent_edge && edges_[*parent_edge].type == etype && a.empty()) continue;
        const std::size_t other = cfg_.other_end(etype, type);
        const PieceId child = static_cast<PieceId>(pieces_.size());
        const std::size_t eid = edges_.size();
        const Word& child_word = cfg_.vertices[other].words.at(cfg_.edges[etype].id);
        edges_.push_back(TreeEdge{eid, p, child, etype, Axis(w, a), Axis(child_word, Word()),
                                  cfg_.gluing_from(etype, type)});
        pieces_.push_back(Piece{child, other, cfg_.vertices[other].cls, pieces_[head].depth + 1, p, {eid}});
        pieces_[head].edges.push_back(eid);
        child_index_.emplace(std::make_tuple(p, etype, a.letters()), eid);
      }
    }
  }
}

std::string CKAWindow::piece_name(PieceId p) const {
  return cfg_.vertices[pieces_.at(p).type].id + "#" + std::to_string(p);
}

const FreeTree& CKAWindow::base_tree(PieceId p) const { return *trees_.at(cfg_.vertices[pieces_.at(p).type].rank); }

const Axis& CKAWindow::line(std::size_t e, PieceId p) const {
  const auto& te = edges_.at(e);
  if (te.parent == p) return te.parent_line;
  if (te.child == p) return te.child_line;
  throw Error(ErrorKind::IndexClash, "edge " + std::to_string(e) + " is not incident to " + piece_name(p));
}

PieceId CKAWindow::across(std::size_t e, PieceId p) const {
  const auto& te = edges_.at(e);
  if (te.parent == p) return te.child;
  if (te.child == p) return te.parent;
  throw Error(ErrorKind::IndexClash, "edge " + std::to_string(e) + " is not incident to " + piece_name(p));
}

AffineFrame CKAWindow::frame_from(std::size_t e, PieceId p) const {
  const auto& te = edges_.at(e);
  if (te.parent == p) return te.frame;
  if (te.child == p) return te.frame.inverse();
  throw Error(ErrorKind::IndexClash, "edge " + std::to_string(e) + " is not incident to " + piece_name(p));
}

std::pair<std::int64_t, std::int64_t> CKAWindow::convert(std::size_t e, PieceId from, std::int64_t h,
                                                         std::int64_t f) const {
  return frame_from(e, from).apply(h, f);
}

std::optional<std::size_t> CKAWindow::child_edge(PieceId p, std::size_t type, const Word& anchor) const {
  auto it = child_index_.find(std::make_tuple(p, type, anchor.letters()));
  if (it == child_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> CKAWindow::edge_path(PieceId a, PieceId b) const {
  std::vector<std::size_t> up;
  std::vector<std::size_t> down;
  while (a != b) {
    if (pieces_.at(a).depth >= pieces_.at(b).depth) {
      up.push_back(pieces_[a].edges.front());
      a = *pieces_[a].parent;
    } else {
      down.push_back(pieces_[b].edges.front());
      b = *pieces_[b].parent;
    }
  }
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

std::vector<PieceId> CKAWindow::piece_path(PieceId a, PieceId b) const {
  std::vector<PieceId> out{a};
  for (auto e : edge_path(a, b)) out.push_back(across(e, out.back()));
  return out;
}

int CKAWindow::tree_distance(PieceId a, PieceId b) const { return static_cast<int>(edge_path(a, b).size()); }

std::optional<std::size_t> CKAWindow::edge_between(PieceId a, PieceId b) const {
  for (auto e : pieces_.at(a).edges) {
    if (across(e, a) == b) return e;
  }
  return std::nullopt;
}

std::vector<PieceId> CKAWindow::pieces_of_class(int cls) const {
  std::vector<PieceId> out;
  for (const auto& p : pieces_)
    if (p.cls == cls) out.push_back(p.id);
  return out;
}

WeightedGraph CKAWindow::bass_serre_graph() const {
  WeightedGraph g;
  for (const auto& p : pieces_) g.add_vertex(piece_name(p.id));
  for (const auto& e : edges_) g.add_edge(e.parent, e.child);
  return g;
}

bool CKAWindow::contains(const PiecePoint& x) const {
  return x.piece < pieces_.size() && base_tree(x.piece).contains(x.base) && x.fiber >= -params_.W &&
         x.fiber <= params_.W;
}

const WindowOracle& CKAWindow::oracle() const {
  std::call_once(oracle_once_, [this] { oracle_ = std::make_shared<const WindowOracle>(*this); });
  return *oracle_;
}

CKAWindow build_window(const GraphOfGroupsConfig& cfg, const WindowParams& params) { return CKAWindow(cfg, params); }

PieceId index_map(const CKAWindow& win, const WindowPoint& x) {
  if (const auto* p = std::get_if<PiecePoint>(&x)) return p->piece;
  return win.edge(std::get<PlanePoint>(x).edge).child;
}

// ---------------------------------------------------------------------------
// Strips and special paths

Strip strip_between_lines(const Axis& a, const Axis& b) {
  Strip s;
  const std::int64_t ha = projection_parameters(a, b).front();
  const Word pa = a.point(ha);
  s.h_a = ha;
  if (auto hb = b.parameter(pa)) {
    s.h_b = *hb;
    s.base_segment = {pa};
    return s;
  }
  const std::int64_t hb = b.nearest_parameter(pa);
  s.h_b = hb;
  s.base_segment = tree_geodesic(pa, b.point(hb));
  return s;
}

Strip strip_between(const CKAWindow& win, PieceId v, const StripEnd& a, const StripEnd& b) {
  auto point_of = [&](const PiecePoint& x) {
    if (x.piece != v) throw Error(ErrorKind::IndexClash, "strip end outside piece " + win.piece_name(v));
    return x.base;
  };
  Strip s;
  if (std::holds_alternative<std::size_t>(a) && std::holds_alternative<std::size_t>(b)) {
    if (std::get<std::size_t>(a) == std::get<std::size_t>(b)) {
      throw Error(ErrorKind::IndexClash, "strip between an edge and itself");
    }
    s = strip_between_lines(win.line(std::get<std::size_t>(a), v), win.line(std::get<std::size_t>(b), v));
  } else if (std::holds_alternative<std::size_t>(a)) {
    const Axis& la = win.line(std::get<std::size_t>(a), v);
    const Word pb = point_of(std::get<PiecePoint>(b));
    s.h_a = la.nearest_parameter(pb);
    s.base_segment = tree_geodesic(la.point(*s.h_a), pb);
  } else if (std::holds_alternative<std::size_t>(b)) {
    const Axis& lb = win.line(std::get<std::size_t>(b), v);
    const Word pa = point_of(std::get<PiecePoint>(a));
    s.h_b = lb.nearest_parameter(pa);
    s.base_segment = tree_geodesic(pa, lb.point(*s.h_b));
  } else {
    s.base_segment = tree_geodesic(point_of(std::get<PiecePoint>(a)), point_of(std::get<PiecePoint>(b)));
  }
  s.piece = v;
  for (const auto& w : s.base_segment) {
    if (!win.base_tree(v).contains(w)) {
      throw Error(ErrorKind::RadiusExceeded, "strip leaves the base ball of " + win.piece_name(v) + " at " + w.to_string());
    }
  }
  return s;
}

SpecialPath special_path(const CKAWindow& win, const PiecePoint& x, const PiecePoint& y) {
  for (const auto* p : {&x, &y}) {
    if (p->piece >= win.pieces().size() || !win.base_tree(p->piece).contains(p->base)) {
      throw Error(ErrorKind::WindowExceeded, "special path endpoint outside the window");
    }
  }
  SpecialPath sp;
  sp.x = x;
  sp.y = y;
  sp.pieces = win.piece_path(x.piece, y.piece);
  const auto path = win.edge_path(x.piece, y.piece);
  const std::size_t n = path.size();

  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t e = path[i - 1];
    const PieceId from = sp.pieces[i - 1];
    const PieceId to = sp.pieces[i];
    const Axis& l_from = win.line(e, from);
    const Axis& l_to = win.line(e, to);
    const std::int64_t h0 = (i == 1) ? l_from.nearest_parameter(x.base)
                                     : *strip_between_lines(l_from, win.line(path[i - 2], from)).h_a;
    const std::int64_t h1 = (i == n) ? l_to.nearest_parameter(y.base)
                                     : *strip_between_lines(l_to, win.line(path[i], to)).h_a;
    const AffineFrame frame = win.frame_from(e, from);
    if (frame.m[1] == 0) throw Error(ErrorKind::FiberParallel, "m12 = 0 on edge " + std::to_string(e));
    Corner c;
    c.edge = e;
    c.from = from;
    c.to = to;
    c.h_from = h0;
    c.f_exact = Rational(h1 - frame.t[0] - frame.m[0] * h0, frame.m[1]);
    c.f_from = round_half_down(c.f_exact);
    std::tie(c.h_to, c.f_to) = frame.apply(h0, c.f_from);
    c.f_to_exact = Rational(frame.m[2] * h0 + frame.t[1]) + Rational(frame.m[3]) * c.f_exact;
    sp.corners.push_back(c);
  }

  for (std::size_t i = 0; i <= n; ++i) {
    Segment s;
    s.piece = sp.pieces[i];
    Rational start_exact;
    Rational end_exact;
    if (i == 0) {
      s.start_base = x.base;
      s.start_fiber = x.fiber;
      start_exact = x.fiber;
    } else {
      const Corner& c = sp.corners[i - 1];
      s.start_base = win.line(c.edge, c.to).point(c.h_to);
      s.start_fiber = c.f_to;
      start_exact = c.f_to_exact;
    }
    if (i == n) {
      s.end_base = y.base;
      s.end_fiber = y.fiber;
      end_exact = y.fiber;
    } else {
      const Corner& c = sp.corners[i];
      s.end_base = win.line(c.edge, c.from).point(c.h_from);
      s.end_fiber = c.f_from;
      end_exact = c.f_exact;
    }
    s.H = tree_distance(s.start_base, s.end_base);
    s.R = std::abs(s.end_fiber - s.start_fiber);
    s.R_exact = abs(end_exact - start_exact);
    sp.segments.push_back(std::move(s));
  }
  return sp;
}

PathComponents path_components(const SpecialPath& sp) {
  PathComponents pc{0, 0, 0, 0};
  for (const auto& s : sp.segments) {
    pc.dh += s.H;
    pc.dv += s.R;
    pc.l2 += std::hypot(to_double(s.H), to_double(s.R));
  }
  pc.l1 = pc.dh + pc.dv;
  return pc;
}

nlohmann::json to_json(const CKAWindow& win, const SpecialPath& sp) {
  using nlohmann::json;
  auto point = [&](const PiecePoint& p) {
    return json{{"piece", win.piece_name(p.piece)}, {"base", p.base.to_string()}, {"fiber", p.fiber}};
  };
  json j;
  j["x"] = point(sp.x);
  j["y"] = point(sp.y);
  j["pieces"] = json::array();
  for (auto p : sp.pieces) j["pieces"].push_back(win.piece_name(p));
  j["corners"] = json::array();
  for (const auto& c : sp.corners) {
    j["corners"].push_back({{"edge", c.edge},
                            {"from", win.piece_name(c.from)},
                            {"to", win.piece_name(c.to)},
                            {"from_frame", {c.h_from, c.f_from}},
                            {"to_frame", {c.h_to, c.f_to}},
                            {"f_exact", to_string(c.f_exact)}});
  }
  j["segments"] = json::array();
  for (const auto& s : sp.segments) {
    j["segments"].push_back({{"piece", win.piece_name(s.piece)},
                             {"start", {{"base", s.start_base.to_string()}, {"fiber", s.start_fiber}}},
                             {"end", {{"base", s.end_base.to_string()}, {"fiber", s.end_fiber}}},
                             {"H", to_string(s.H)},
                             {"R", to_string(s.R)}});
  }
  auto pc = path_components(sp);
  j["d_h"] = to_string(pc.dh);
  j["d_v"] = to_string(pc.dv);
  j["l1"] = to_string(pc.l1);
  return j;
}

// ---------------------------------------------------------------------------
// Oracle

WindowOracle::WindowOracle(const CKAWindow& win) : win_(&win), span_(2 * win.params().W + 1) {
  const int W = win.params().W;
  const int R = win.params().R_tree;
  std::size_t raw = 0;
  for (const auto& p : win.pieces()) {
    offset_.push_back(static_cast<WeightedGraph::Vertex>(raw));
    raw += win.base_tree(p.id).vertices().size() * static_cast<std::size_t>(span_);
  }
  auto slot = [&](PieceId p, const Word& base, std::int64_t f) {
    return offset_[p] + *win.base_tree(p).index(base) * static_cast<std::size_t>(span_) + static_cast<std::size_t>(f + W);
  };

  boost::disjoint_sets_with_storage<> sets(raw);
  for (const auto& e : win.edges()) {
    auto range = e.parent_line.parameters_within(R);
    if (!range) continue;
    for (std::int64_t h = range->first; h <= range->second; ++h) {
      const Word pp = e.parent_line.point(h);
      for (std::int64_t f = -W; f <= W; ++f) {
        auto [hc, fc] = e.frame.apply(h, f);
        if (fc < -W || fc > W) continue;
        const Word pc = e.child_line.point(hc);
        if (static_cast<int>(pc.length()) > R) continue;
        sets.union_set(slot(e.parent, pp, f), slot(e.child, pc, fc));
      }
    }
  }

  rep_.assign(raw, 0);
  std::vector<std::int64_t> compact(raw, -1);
  for (std::size_t i = 0; i < raw; ++i) {
    auto r = sets.find_set(i);
    if (compact[r] < 0) compact[r] = static_cast<std::int64_t>(graph_.add_vertex());
    rep_[i] = static_cast<WeightedGraph::Vertex>(compact[r]);
  }
  shell_.assign(graph_.vertex_count(), 0);

  std::unordered_set<std::uint64_t> seen;
  auto link = [&](std::size_t a, std::size_t b) {
    auto u = rep_[a];
    auto v = rep_[b];
    if (u == v) return;
    if (u > v) std::swap(u, v);
    if (seen.insert((static_cast<std::uint64_t>(u) << 32) | v).second) graph_.add_edge(u, v);
  };
  for (const auto& p : win.pieces()) {
    const auto& tree = win.base_tree(p.id);
    const auto& bases = tree.vertices();
    for (std::size_t b = 0; b < bases.size(); ++b) {
      const bool rim = static_cast<int>(bases[b].length()) == R;
      for (std::int64_t f = -W; f <= W; ++f) {
        const std::size_t s = offset_[p.id] + b * static_cast<std::size_t>(span_) + static_cast<std::size_t>(f + W);
        if (rim || f == -W || f == W) shell_[rep_[s]] = 1;
        if (f < W) link(s, s + 1);
      }
    }
    for (const auto& e : tree.graph().edges()) {
      for (std::int64_t f = -W; f <= W; ++f) {
        link(offset_[p.id] + e.u * static_cast<std::size_t>(span_) + static_cast<std::size_t>(f + W),
             offset_[p.id] + e.v * static_cast<std::size_t>(span_) + static_cast<std::size_t>(f + W));
      }
    }
  }
}

WeightedGraph::Vertex WindowOracle::vertex(const PiecePoint& x) const {
  if (!win_->contains(x)) {
    throw Error(ErrorKind::WindowExceeded, "point (" + win_->piece_name(x.piece) + ", " + x.base.to_string() + ", " +
                                               std::to_string(x.fiber) + ") outside the grid");
  }
  const int W = win_->params().W;
  return rep_[offset_[x.piece] + *win_->base_tree(x.piece).index(x.base) * static_cast<std::size_t>(span_) +
              static_cast<std::size_t>(x.fiber + W)];
}

namespace {

std::int64_t masked_bfs(const WeightedGraph& g, WeightedGraph::Vertex s, WeightedGraph::Vertex t,
                        const std::vector<char>* blocked) {
  if (s == t) return 0;
  std::vector<std::int64_t> dist(g.vertex_count(), -1);
  std::deque<WeightedGraph::Vertex> queue{s};
  dist[s] = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (const auto& a : g.neighbors(u)) {
      if (dist[a.to] >= 0 || (blocked && (*blocked)[a.to])) continue;
      dist[a.to] = dist[u] + 1;
      if (a.to == t) return dist[t];
      queue.push_back(a.to);
    }
  }
  return -1;
}

}  // namespace

WindowOracle::Result WindowOracle::query(const PiecePoint& x, const PiecePoint& y) const {
  const auto s = vertex(x);
  const auto t = vertex(y);
  const std::int64_t full = masked_bfs(graph_, s, t, nullptr);
  if (full < 0) throw Error(ErrorKind::DisconnectedPair, "window grid is disconnected");
  Result r{Rational(full), false};
  if (shell_[s] || shell_[t]) {
    r.boundary_suspect = true;
    return r;
  }
  const std::int64_t inner = masked_bfs(graph_, s, t, &shell_);
  r.boundary_suspect = inner < 0 || inner > full;
  return r;
}

Rational WindowOracle::distance(const PiecePoint& x, const PiecePoint& y) const {
  const std::int64_t d = masked_bfs(graph_, vertex(x), vertex(y), nullptr);
  if (d < 0) throw Error(ErrorKind::DisconnectedPair, "window grid is disconnected");
  return d;
}

Rational brute_force_distance(const CKAWindow& win, const PiecePoint& x, const PiecePoint& y) {
  return win.oracle().distance(x, y);
}

// ---------------------------------------------------------------------------
// Deck transformations

std::vector<std::optional<DeckImage>> deck_images(const CKAWindow& win, const DeckTransform& t) {
  std::vector<std::optional<DeckImage>> images(win.pieces().size());
  if (t.g.rank_used() > win.base_tree(win.root()).rank()) {
    throw Error(ErrorKind::ConfigInvalid, "deck element outside the root vertex group");
  }
  images[win.root()] = DeckImage{win.root(), t.g, t.s};
  // Pieces are stored breadth-first, so parents precede children.
  for (const auto& p : win.pieces()) {
    const auto& img = images[p.id];
    if (!img) continue;
    for (auto e : p.edges) {
      const TreeEdge& te = win.edge(e);
      if (te.parent != p.id) continue;
      const Word moved = img->g * te.parent_line.anchor();
      Axis target(te.parent_line.word(), moved);
      auto e2 = win.child_edge(img->piece, te.type, target.anchor());
      if (!e2) continue;
      const std::int64_t delta = *target.parameter(moved);
      auto [j, s] = te.frame.linear(delta, img->s);
      const Word& wc = te.child_line.word();
      const auto n = static_cast<std::int64_t>(wc.length());
      if (j % n != 0) continue;
      images[te.child] = DeckImage{win.edge(*e2).child, wc.power(j / n), s};
    }
  }
  return images;
}

std::optional<PiecePoint> apply_deck(const CKAWindow& win, const std::vector<std::optional<DeckImage>>& images,
                                     const PiecePoint& x) {
  const auto& img = images.at(x.piece);
  if (!img) return std::nullopt;
  PiecePoint out{img->piece, img->g * x.base, x.fiber + img->s};
  if (!win.base_tree(out.piece).contains(out.base)) return std::nullopt;
  return out;
}

std::optional<PlanePoint> apply_deck(const CKAWindow& win, const std::vector<std::optional<DeckImage>>& images,
                                     const PlanePoint& x) {
  const auto& img = images.at(x.side);
  if (!img) return std::nullopt;
  const TreeEdge& te = win.edge(x.edge);
  const Axis& l = win.line(x.edge, x.side);
  const Word moved = img->g * l.point(x.h);
  std::optional<std::size_t> e2;
  if (te.parent == x.side) {
    e2 = win.child_edge(img->piece, te.type, Axis(l.word(), img->g * l.anchor()).anchor());
  } else {
    e2 = win.piece(img->piece).parent ? std::optional(win.piece(img->piece).edges.front()) : std::nullopt;
  }
  if (!e2) return std::nullopt;
  auto h = win.line(*e2, img->piece).parameter(moved);
  if (!h) return std::nullopt;
  return PlanePoint{*e2, img->piece, *h, x.f + img->s};
}

}  // namespace qtlab

namespace qtlab {

std::vector<std::pair<PiecePoint, PiecePoint>> sample_pairs(const CKAWindow& win, std::size_t count,
                                                            std::uint64_t seed, std::int64_t fiber_span, int cls) {
  std::vector<PieceId> pool;
  for (const auto& p : win.pieces()) {
    if (cls == 0 || p.cls == cls) pool.push_back(p.id);
  }
  if (pool.empty()) throw Error(ErrorKind::InsufficientSample, "no pieces of class " + std::to_string(cls));
  std::mt19937_64 rng(seed);
  const int radius = std::max(0, win.params().R_tree - 1);
  auto draw = [&] {
    PiecePoint x;
    x.piece = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    x.base = random_word(rng, win.config().vertices[win.piece(x.piece).type].rank, radius);
    x.fiber = std::uniform_int_distribution<std::int64_t>(-fiber_span, fiber_span)(rng);
    return x;
  };
  std::vector<std::pair<PiecePoint, PiecePoint>> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 100 * count + 100) throw Error(ErrorKind::InsufficientSample, "window too small for distinct pairs");
    PiecePoint a = draw();
    PiecePoint b = draw();
    if (!(a == b)) out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

}  // namespace qtlab

namespace qtlab {

std::vector<std::pair<PiecePoint, PiecePoint>> clean_pairs(const CKAWindow& win, std::size_t count, std::uint64_t seed,
                                                           std::int64_t fiber_span, int cls) {
  const auto stream = sample_pairs(win, 20 * count, seed, fiber_span, cls);
  std::vector<std::pair<PiecePoint, PiecePoint>> out;
  for (const auto& p : stream) {
    if (out.size() == count) break;
    if (!win.oracle().query(p.first, p.second).boundary_suspect) out.push_back(p);
  }
  if (out.size() < count) {
    throw Error(ErrorKind::InsufficientSample, "only " + std::to_string(out.size()) + " non-boundary pairs");
  }
  return out;
}

}  // namespace qtlab
