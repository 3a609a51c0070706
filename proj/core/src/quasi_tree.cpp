#include "qtlab/quasi_tree.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <boost/pending/disjoint_sets.hpp>

#include "qtlab/error.hpp"

namespace qtlab {

MemberPoint QuasiTreeOfSpaces::locate(WeightedGraph::Vertex c) const {
  auto it = std::upper_bound(offset.begin(), offset.end(), c);
  auto member = static_cast<std::size_t>(it - offset.begin()) - 1;
  return {member, c - offset[member]};
}

std::string QuasiTreeOfSpaces::to_dot() const { return qtlab::to_dot(carrier, "C_K", "bridge"); }

QuasiTreeOfSpaces build_quasi_tree(std::shared_ptr<const ProjectionFamily> f, const Rational& K) {
  if (!f || f->size() == 0) throw Error(ErrorKind::EmptyFamily, "quasi-tree of an empty family");
  QuasiTreeOfSpaces qt;
  qt.family = f;
  qt.K = K;
  const std::size_t n = f->size();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = f->member(i);
    qt.offset.push_back(static_cast<WeightedGraph::Vertex>(qt.carrier.vertex_count()));
    for (WeightedGraph::Vertex v = 0; v < m.graph->vertex_count(); ++v) {
      qt.carrier.add_vertex(m.name + ":" + m.graph->label(v));
    }
    for (const auto& e : m.graph->edges()) {
      qt.carrier.add_edge(qt.offset[i] + e.u, qt.offset[i] + e.v, e.length);
    }
  }

  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t z = x + 1; z < n; ++z) {
      bool admitted = true;
      for (std::size_t y = 0; y < n && admitted; ++y) {
        if (y != x && y != z) admitted = f->projection_distance(y, x, z) <= K;
      }
      if (!admitted) continue;
      qt.bridged_pairs.emplace_back(x, z);
      for (auto u : f->projection(x, z))
        for (auto v : f->projection(z, x)) {
          qt.carrier.add_edge(qt.carrier_vertex(x, u), qt.carrier_vertex(z, v), 1, 1);
          ++qt.bridge_edges;
        }
    }

  if (n >= 3) {
    auto strong = check_strong_axioms(*f, K / 4);
    if (!strong.pass) {
      qt.warnings.push_back("strong projection axioms fail at K/4 = " + to_string(K / 4) + " (least xi " +
                            to_string(strong.xi_witnessed) + ")");
    }
  }
  return qt;
}

Rational cutoff_sum(const QuasiTreeOfSpaces& qt, WeightedGraph::Vertex x, WeightedGraph::Vertex y) {
  const auto& f = *qt.family;
  const MemberPoint px = qt.locate(x);
  const MemberPoint py = qt.locate(y);
  Rational sum = 0;
  for (std::size_t m = 0; m < f.size(); ++m) {
    PointOrMember a = px.member == m ? PointOrMember(px) : PointOrMember(MemberIndex{px.member});
    PointOrMember b = py.member == m ? PointOrMember(py) : PointOrMember(MemberIndex{py.member});
    sum += cutoff(f.extended_distance(m, a, b), qt.K);
  }
  return sum;
}

Rational FormulaReport::worst_margin() const {
  if (rows.empty()) return 0;
  Rational worst = rows.front().margin;
  for (const auto& r : rows) worst = std::min(worst, r.margin);
  return worst;
}

std::string FormulaReport::to_csv(const WeightedGraph& carrier) const {
  std::ostringstream out;
  out << "pair,lhs,mid,rhs,margin\n";
  for (const auto& r : rows) {
    out << carrier.label(r.x) << "|" << carrier.label(r.y) << ',' << to_string(r.lhs) << ',' << to_string(r.mid)
        << ',' << to_string(r.rhs) << ',' << to_string(r.margin) << '\n';
  }
  return out.str();
}

FormulaReport validate_distance_formula(
    const QuasiTreeOfSpaces& qt, const std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>>& samples,
    const FormulaConstants& constants) {
  FormulaReport report;
  report.K = qt.K;
  report.constants = constants;
  for (auto [x, y] : samples) {
    FormulaRow row{x, y, 0, 0, 0, 0, 0, true, true};
    row.sum = cutoff_sum(qt, x, y);
    row.mid = shortest_distance(qt.carrier, x, y);
    row.lhs = constants.lower * row.sum;
    row.rhs = constants.upper * row.sum + constants.additive * qt.K;
    row.margin = std::min(row.mid - row.lhs, row.rhs - row.mid);
    row.lower_ok = row.lhs <= row.mid;
    row.upper_ok = row.mid <= row.rhs;
    report.lower_failures += row.lower_ok ? 0 : 1;
    report.upper_failures += row.upper_ok ? 0 : 1;
    report.rows.push_back(row);
  }
  return report;
}

namespace {

Rational bottleneck_value(const WeightedGraph& g, WeightedGraph::Vertex x, WeightedGraph::Vertex y) {
  if (x == y) return 0;
  auto from_x = distances_from(g, x);
  if (!reachable(from_x[y])) throw Error(ErrorKind::DisconnectedPair, g.label(x) + " / " + g.label(y));
  // Midpoint: first vertex of a shortest path at arc length >= d/2.
  auto path = shortest_path(g, x, y);
  const Rational half = from_x[y] / 2;
  WeightedGraph::Vertex mid = path.back();
  for (auto v : path) {
    if (from_x[v] >= half) {
      mid = v;
      break;
    }
  }
  auto from_mid = distances_from(g, mid);

  // Add vertices farthest-first until x and y join; the last distance added
  // is the best any x-y path can keep away from the midpoint.
  std::vector<WeightedGraph::Vertex> order;
  for (WeightedGraph::Vertex v = 0; v < g.vertex_count(); ++v) {
    if (reachable(from_mid[v])) order.push_back(v);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return from_mid[a] > from_mid[b]; });
  boost::disjoint_sets_with_storage<> sets(g.vertex_count());
  std::vector<char> active(g.vertex_count(), 0);
  for (auto v : order) {
    active[v] = 1;
    for (const auto& arc : g.neighbors(v)) {
      if (active[arc.to]) sets.union_set(v, arc.to);
    }
    if (active[x] && active[y] && sets.find_set(x) == sets.find_set(y)) return from_mid[v];
  }
  return 0;
}

}  // namespace

BottleneckReport bottleneck_check(
    const WeightedGraph& g, const std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>>& samples,
    const Rational& delta) {
  BottleneckReport report;
  report.delta = delta;
  report.worst = 0;
  for (auto [x, y] : samples) {
    Rational v = bottleneck_value(g, x, y);
    report.per_pair.push_back(v);
    report.worst = std::max(report.worst, v);
  }
  return report;
}

}  // namespace qtlab
