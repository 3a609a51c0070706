#include "qtlab/families.hpp"

#include <set>
#include <string>

#include "qtlab/error.hpp"

namespace qtlab {

AxisFamily build_axis_family(int rank, const std::vector<Word>& words, int member_radius, int radius) {
  if (words.empty()) throw Error(ErrorKind::EmptyFamily, "no axis words");
  AxisFamily f;
  f.tree = std::make_shared<const FreeTree>(rank, radius);
  const FreeTree& tree = *f.tree;
  std::vector<ProjectionFamily::Member> members;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& w : words) {
    for (const auto& g : tree.vertices()) {
      if (static_cast<int>(g.length()) > member_radius) break;
      Axis axis(w, g);
      if (!seen.emplace(w.letters(), axis.anchor().letters()).second) continue;
      auto range = axis.parameters_within(radius);
      if (!range) continue;
      auto graph = std::make_shared<WeightedGraph>();
      std::vector<WeightedGraph::Vertex> pts;
      for (auto h = range->first; h <= range->second; ++h) {
        const Word p = axis.point(h);
        pts.push_back(*tree.index(p));
        auto v = graph->add_vertex(p.to_string());
        if (v > 0) graph->add_edge(v - 1, v);
      }
      members.push_back({w.to_string() + "@" + axis.anchor().to_string(), graph});
      f.axes.push_back(axis);
      f.points.push_back(std::move(pts));
    }
  }
  const std::size_t m = f.axes.size();
  if (m == 0) throw Error(ErrorKind::EmptyFamily, "no axis meets the ball");
  std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> proj(m, std::vector<std::vector<WeightedGraph::Vertex>>(m));
  for (std::size_t x = 0; x < m; ++x) {
    const auto d = hop_distances(tree.graph(), f.points[x]);
    for (std::size_t y = 0; y < m; ++y) {
      if (x == y) continue;
      std::int64_t low = -1;
      for (auto v : f.points[y]) {
        if (low < 0 || d[v] < low) low = d[v];
      }
      for (std::size_t k = 0; k < f.points[y].size(); ++k) {
        if (d[f.points[y][k]] == low) proj[y][x].push_back(static_cast<WeightedGraph::Vertex>(k));
      }
    }
  }
  f.family = std::make_shared<const ProjectionFamily>(std::move(members), std::move(proj));
  return f;
}

}  // namespace qtlab
