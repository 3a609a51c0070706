#include "qtlab/fiber_lines.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "qtlab/error.hpp"

namespace qtlab {

ThickFiberLine::ThickFiberLine(const CKAWindow& win, PieceId owner, Rational r)
    : owner_(owner), W_(win.params().W), r_(r) {
  const std::int64_t W = W_;
  const std::int64_t span = 2 * W + 1;
  for (std::int64_t f = -W; f <= W; ++f) {
    carrier_.add_vertex("b" + std::to_string(f));
    if (f > -W) carrier_.add_edge(binding(f - 1), binding(f));
  }
  edges_ = win.piece(owner).edges;
  std::sort(edges_.begin(), edges_.end());

  for (auto e : edges_) {
    const AffineFrame frame = win.frame_from(e, owner);
    const auto base = static_cast<WeightedGraph::Vertex>(carrier_.vertex_count());
    plane_offset_[e] = base;
    const std::string tag = "p" + std::to_string(e) + ":";
    for (std::int64_t h = -W; h <= W; ++h)
      for (std::int64_t f = -W; f <= W; ++f) carrier_.add_vertex(tag + std::to_string(h) + ":" + std::to_string(f));

    // Unit steps of both frames, written in the owner frame.
    const AffineFrame back = frame.inverse();
    std::vector<std::pair<std::int64_t, std::int64_t>> steps{{1, 0}, {0, 1}, back.linear(1, 0), back.linear(0, 1)};
    std::set<std::pair<std::int64_t, std::int64_t>> unique;
    for (auto [dh, df] : steps) {
      if (dh < 0 || (dh == 0 && df < 0)) {
        dh = -dh;
        df = -df;
      }
      unique.emplace(dh, df);
    }
    for (std::int64_t h = -W; h <= W; ++h)
      for (std::int64_t f = -W; f <= W; ++f) {
        const auto u = base + static_cast<WeightedGraph::Vertex>((h + W) * span + (f + W));
        for (auto [dh, df] : unique) {
          if (auto v = plane(e, h + dh, f + df)) carrier_.add_edge(u, *v);
        }
        const std::int64_t c = frame.apply(h, f).first;
        lines_[{e, c}].push_back(u);
      }
    // Ladder strip from the binding line to the marked line h = 0.
    for (std::int64_t f = -W; f <= W; ++f) carrier_.add_edge(binding(f), *plane(e, 0, f));
    for (const auto& [key, members] : lines_) {
      if (key.first != e) continue;
      auto a = carrier_.add_vertex("c" + std::to_string(e) + ":" + std::to_string(key.second));
      apex_[key] = a;
      for (auto v : members) carrier_.add_edge(a, v, r_);
    }
  }
}

WeightedGraph::Vertex ThickFiberLine::binding(std::int64_t f) const {
  if (f < -W_ || f > W_) throw Error(ErrorKind::WindowExceeded, "binding height " + std::to_string(f));
  return static_cast<WeightedGraph::Vertex>(f + W_);
}

std::optional<WeightedGraph::Vertex> ThickFiberLine::plane(std::size_t edge, std::int64_t h, std::int64_t f) const {
  auto it = plane_offset_.find(edge);
  if (it == plane_offset_.end() || h < -W_ || h > W_ || f < -W_ || f > W_) return std::nullopt;
  return it->second + static_cast<WeightedGraph::Vertex>((h + W_) * (2 * W_ + 1) + (f + W_));
}

const std::vector<WeightedGraph::Vertex>& ThickFiberLine::coned_line(std::size_t edge, std::int64_t c) const {
  static const std::vector<WeightedGraph::Vertex> none;
  auto it = lines_.find({edge, c});
  return it == lines_.end() ? none : it->second;
}

std::optional<WeightedGraph::Vertex> ThickFiberLine::apex(std::size_t edge, std::int64_t c) const {
  auto it = apex_.find({edge, c});
  if (it == apex_.end()) return std::nullopt;
  return it->second;
}

ThickFiberLine build_fiber_line(const CKAWindow& win, PieceId v, const Rational& r) {
  return ThickFiberLine(win, v, r);
}

std::size_t FiberFamily::member_index(PieceId p) const {
  const auto& list = members[static_cast<std::size_t>(class_of(p) - 1)];
  auto it = std::lower_bound(list.begin(), list.end(), p);
  if (it == list.end() || *it != p) throw Error(ErrorKind::IndexClash, "piece is not a family member");
  return static_cast<std::size_t>(it - list.begin());
}

std::vector<WeightedGraph::Vertex> project_fiber_line(const CKAWindow& win, const ThickFiberLine& target,
                                                      PieceId source) {
  const PieceId v = target.owner();
  if (source == v || win.piece(source).cls != win.piece(v).cls) {
    throw Error(ErrorKind::IndexClash, "fiber projection needs a distinct member of the same class");
  }
  const auto path = win.edge_path(v, source);
  const std::size_t e1 = path[0];
  const PieceId w = win.across(e1, v);
  const std::int64_t h_star = *strip_between_lines(win.line(e1, w), win.line(path[1], w)).h_a;
  const auto& line = target.coned_line(e1, h_star);
  if (line.empty()) {
    throw Error(ErrorKind::WindowExceeded, "projection line h = " + std::to_string(h_star) + " misses the plane window of " +
                                               win.piece_name(v));
  }
  return line;
}

FiberFamily build_fiber_family(const CKAWindow& win, const Rational& r) {
  FiberFamily fam;
  fam.win = &win;
  fam.r = r;
  fam.lines.resize(win.pieces().size());
  for (const auto& p : win.pieces()) {
    fam.members[static_cast<std::size_t>(p.cls - 1)].push_back(p.id);
    fam.lines[p.id] = std::make_shared<const ThickFiberLine>(win, p.id, r);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& ids = fam.members[c];
    std::vector<ProjectionFamily::Member> members;
    for (auto p : ids) {
      members.push_back({win.piece_name(p), std::shared_ptr<const WeightedGraph>(fam.lines[p], &fam.lines[p]->carrier())});
    }
    std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> proj(ids.size(),
                                                                      std::vector<std::vector<WeightedGraph::Vertex>>(ids.size()));
    for (std::size_t y = 0; y < ids.size(); ++y)
      for (std::size_t x = 0; x < ids.size(); ++x) {
        if (x != y) proj[y][x] = project_fiber_line(win, *fam.lines[ids[y]], ids[x]);
      }
    fam.family[c] = std::make_shared<const ProjectionFamily>(std::move(members), std::move(proj));
  }
  return fam;
}

FiberAxiomReport verify_fiber_axioms(const FiberFamily& fam, const Rational& xi) {
  FiberAxiomReport report;
  report.diameter_bound = 2 * fam.r + 3;
  report.max_projection_diameter = 0;
  const CKAWindow& win = *fam.win;
  for (std::size_t c = 0; c < 2; ++c) {
    const ProjectionFamily& f = *fam.family[c];
    report.classes[c] = verify_axioms(f, xi);
    const auto& ids = fam.members[c];
    for (std::size_t y = 0; y < ids.size(); ++y) {
      for (std::size_t x = 0; x < ids.size(); ++x) {
        if (x == y) continue;
        report.max_projection_diameter = std::max(report.max_projection_diameter, f.projection_distance(y, x, x));
        for (std::size_t z = x + 1; z < ids.size(); ++z) {
          if (z == y) continue;
          const int dxy = win.tree_distance(ids[y], ids[x]);
          const int dzy = win.tree_distance(ids[y], ids[z]);
          const int dxz = win.tree_distance(ids[x], ids[z]);
          if (dxy + dzy - dxz < 4) continue;  // d_T(y, [x, z]) >= 2
          ++report.common_triples;
          if (f.projection(y, x) != f.projection(y, z)) ++report.common_failures;
        }
      }
    }
  }
  return report;
}

nlohmann::json to_json(const FiberAxiomReport& r) {
  nlohmann::json j;
  j["verdict"] = r.pass() ? "pass" : "fail";
  j["class1"] = to_json(r.classes[0]);
  j["class2"] = to_json(r.classes[1]);
  j["common_projection_triples"] = r.common_triples;
  j["common_projection_failures"] = r.common_failures;
  j["max_projection_diameter"] = to_string(r.max_projection_diameter);
  j["diameter_bound"] = to_string(r.diameter_bound);
  j["xi_witnessed"] = to_string(r.xi_witnessed());
  return j;
}

FiberPoint pi1(const CKAWindow& win, const FiberFamily& fam, const PiecePoint& x) {
  if (win.piece(x.piece).cls != 1) throw Error(ErrorKind::IndexClash, "Pi_1 is defined on class-1 pieces");
  return {x.piece, fam.lines[x.piece]->binding(x.fiber)};
}

std::size_t chosen_edge(const CKAWindow& win, PieceId v0) {
  const auto& edges = win.piece(v0).edges;
  return *std::min_element(edges.begin(), edges.end());
}

FiberPoint pi2(const CKAWindow& win, const FiberFamily& fam, const PiecePoint& x) {
  const std::size_t e0 = chosen_edge(win, x.piece);
  const PieceId w0 = win.across(e0, x.piece);
  const std::int64_t h = win.line(e0, x.piece).nearest_parameter(x.base);
  auto [hw, fw] = win.convert(e0, x.piece, h, x.fiber);
  auto v = fam.lines[w0]->plane(e0, hw, fw);
  if (!v) {
    throw Error(ErrorKind::WindowExceeded, "Pi_2 image (" + std::to_string(hw) + ", " + std::to_string(fw) +
                                               ") outside the plane window of " + win.piece_name(w0));
  }
  return {w0, *v};
}

Rational fiber_extended_distance(const FiberFamily& fam, PieceId v, const FiberPoint& a, const FiberPoint& b) {
  const int cls = fam.class_of(v);
  const ProjectionFamily& f = fam.of_class(cls);
  const std::size_t y = fam.member_index(v);
  auto as_arg = [&](const FiberPoint& p) -> PointOrMember {
    if (p.piece == v) return MemberPoint{y, p.vertex};
    return MemberIndex{fam.member_index(p.piece)};
  };
  return f.extended_distance(y, as_arg(a), as_arg(b));
}

// ---------------------------------------------------------------------------
// Distance estimates

bool EstimateReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const EstimateRow& r) { return r.within; });
}

EstimateReport check_fiber_estimates(const CKAWindow& win, const FiberFamily& fam,
                                     const std::vector<std::pair<PiecePoint, PiecePoint>>& samples) {
  EstimateReport report;
  report.additive = 4 * fam.r + 4;
  report.max_defect = 0;
  auto add = [&](std::size_t pair, const char* estimate, PieceId piece, Rational lhs, Rational rhs) {
    EstimateRow row{pair, estimate, piece, lhs, rhs, true};
    row.within = lhs <= report.multiplicative * rhs + report.additive &&
                 rhs <= report.multiplicative * lhs + report.additive;
    if (rhs > 0) report.max_ratio = std::max(report.max_ratio, to_double(lhs / rhs));
    if (lhs > 0) report.max_ratio = std::max(report.max_ratio, to_double(rhs / lhs));
    report.max_defect = std::max(report.max_defect, abs(lhs - rhs));
    report.rows.push_back(std::move(row));
  };

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& [x, y] = samples[k];
    if (x.piece == y.piece) continue;
    const SpecialPath sp = special_path(win, x, y);
    const auto& alpha = sp.pieces;
    const std::size_t n = alpha.size() - 1;
    const auto path = win.edge_path(x.piece, y.piece);

    // Horizontal: segment length across an interior piece vs the strip width.
    for (std::size_t i = 1; i < n; ++i) {
      Strip s = strip_between_lines(win.line(path[i - 1], alpha[i]), win.line(path[i], alpha[i]));
      add(k, "HDist", alpha[i], sp.segments[i].H, s.width());
    }
    // Vertical: fiber travel in v_i vs d_{fl(v_i)}(fl(v_{i-2}), fl(v_{i+2})).
    for (std::size_t i = 2; i + 2 <= n; ++i) {
      const ProjectionFamily& f = fam.of_class(fam.class_of(alpha[i]));
      Rational d = f.projection_distance(fam.member_index(alpha[i]), fam.member_index(alpha[i - 2]),
                                         fam.member_index(alpha[i + 2]));
      add(k, "VDist", alpha[i], sp.segments[i].R, d);
    }
    // End pieces: distance from the endpoint to the first strip.
    if (n >= 2) {
      for (int end = 0; end < 2; ++end) {
        const PiecePoint& p = end == 0 ? x : y;
        const std::size_t seg = end == 0 ? 0 : n;
        const std::size_t e = end == 0 ? path.front() : path.back();
        const PieceId other = end == 0 ? alpha[2] : alpha[n - 2];
        add(k, "WDist-h", p.piece, sp.segments[seg].H, tree_distance(p.base, win.line(e, p.piece).point(
                                                                         win.line(e, p.piece).nearest_parameter(p.base))));
        if (win.piece(p.piece).cls == 1) {
          FiberPoint a = pi1(win, fam, p);
          FiberPoint b{other, 0};
          add(k, "WDist-f", p.piece, sp.segments[seg].R, fiber_extended_distance(fam, p.piece, a, b));
        }
      }
    }
  }
  return report;
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j;
  j["verdict"] = r.pass() ? "pass" : "fail";
  j["envelope"] = {{"multiplicative", to_string(r.multiplicative)}, {"additive", to_string(r.additive)}};
  j["max_ratio"] = r.max_ratio;
  j["max_defect"] = to_string(r.max_defect);
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"pair", row.pair},
                         {"estimate", row.estimate},
                         {"piece", row.piece},
                         {"lhs", to_string(row.lhs)},
                         {"rhs", to_string(row.rhs)},
                         {"within", row.within}});
  }
  return j;
}

VerticalReport vertical_formula_report(const CKAWindow& win, const FiberFamily& fam,
                                       const std::vector<std::pair<PiecePoint, PiecePoint>>& samples) {
  VerticalReport report;
  report.C = 0;
  for (const auto& [x, y] : samples) {
    const SpecialPath sp = special_path(win, x, y);
    VerticalRow row{path_components(sp).dv, Rational(win.tree_distance(x.piece, y.piece))};
    const std::array<FiberPoint, 2> px{pi1(win, fam, x), pi2(win, fam, x)};
    const std::array<FiberPoint, 2> py{pi1(win, fam, y), pi2(win, fam, y)};
    for (PieceId v : sp.pieces) {
      const std::size_t j = static_cast<std::size_t>(fam.class_of(v) - 1);
      if (px[j].piece == v || py[j].piece == v || px[j].piece != py[j].piece) {
        row.rhs += fiber_extended_distance(fam, v, px[j], py[j]);
      } else {
        // Both images lie in one other member: d_{fl(v)}(X, X) = diam pi(X).
        const ProjectionFamily& f = fam.of_class(static_cast<int>(j) + 1);
        const auto m = fam.member_index(px[j].piece);
        row.rhs += f.projection_distance(fam.member_index(v), m, m);
      }
    }
    report.C = std::max(report.C, row.dv / (row.rhs + 1));
    report.rows.push_back(row);
  }
  for (const auto& row : report.rows) {
    if (row.dv > report.C * (row.rhs + 1)) ++report.violations;
  }
  return report;
}

nlohmann::json to_json(const VerticalReport& r) {
  nlohmann::json j;
  j["C"] = to_string(r.C);
  j["C_value"] = to_double(r.C);
  j["violations"] = r.violations;
  j["pairs"] = r.rows.size();
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) j["rows"].push_back({{"dv", to_string(row.dv)}, {"rhs", to_string(row.rhs)}});
  return j;
}

}  // namespace qtlab
