#include "qtlab/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <functional>
#include <queue>

#include "qtlab/error.hpp"

namespace qtlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DisconnectedPair: return "DisconnectedPair";
    case ErrorKind::RadiusExceeded: return "RadiusExceeded";
    case ErrorKind::WindowExceeded: return "WindowExceeded";
    case ErrorKind::IndexClash: return "IndexClash";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::LipschitzViolation: return "LipschitzViolation";
    case ErrorKind::EmptyFamily: return "EmptyFamily";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::FiberParallel: return "FiberParallel";
    case ErrorKind::NotLoxodromic: return "NotLoxodromic";
    case ErrorKind::InsufficientSample: return "InsufficientSample";
    case ErrorKind::BallCapExceeded: return "BallCapExceeded";
    case ErrorKind::InsufficientRange: return "InsufficientRange";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

namespace {

std::int64_t parse_int(std::string_view s) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError, "not an integer: '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw Error(ErrorKind::ParseError, "empty rational");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator");
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (negative) whole.remove_prefix(1);
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t w = whole.empty() ? 0 : parse_int(whole);
    std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    Rational q(w * scale + f, scale);
    return negative ? -q : q;
  }
  return Rational(parse_int(text));
}

WeightedGraph::Vertex WeightedGraph::add_vertex(std::string label) {
  auto id = static_cast<Vertex>(adjacency_.size());
  adjacency_.emplace_back();
  if (!label.empty()) {
    if (labels_.size() < adjacency_.size()) labels_.resize(adjacency_.size());
    by_label_.emplace(label, id);
    labels_[id] = std::move(label);
  }
  return id;
}

void WeightedGraph::add_edge(Vertex u, Vertex v, Rational length, std::uint32_t tag) {
  if (!contains(u) || !contains(v)) {
    throw std::out_of_range("add_edge: vertex out of range");
  }
  if (length <= 0) throw std::invalid_argument("add_edge: edge length must be positive");
  if (length != 1) unit_lengths_ = false;
  adjacency_[u].push_back({v, length, tag});
  if (u != v) adjacency_[v].push_back({u, length, tag});
  ++edge_count_;
}

bool WeightedGraph::adjacent(Vertex u, Vertex v) const {
  const auto& arcs = adjacency_[u];
  return std::any_of(arcs.begin(), arcs.end(), [v](const Arc& a) { return a.to == v; });
}

std::string WeightedGraph::label(Vertex v) const {
  if (v < labels_.size() && !labels_[v].empty()) return labels_[v];
  return std::to_string(v);
}

std::optional<WeightedGraph::Vertex> WeightedGraph::find(std::string_view label) const {
  if (auto it = by_label_.find(std::string(label)); it != by_label_.end()) return it->second;
  if (labels_.empty()) {
    std::uint32_t id = 0;
    auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), id);
    if (ec == std::errc{} && ptr == label.data() + label.size() && contains(id)) return id;
  }
  return std::nullopt;
}

std::vector<WeightedGraph::EdgeRecord> WeightedGraph::edges() const {
  std::vector<EdgeRecord> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < adjacency_.size(); ++u) {
    for (const Arc& a : adjacency_[u]) {
      if (u < a.to || (u == a.to)) out.push_back({u, a.to, a.length, a.tag});
    }
  }
  return out;
}

std::vector<std::int64_t> hop_distances(const WeightedGraph& g,
                                        std::span<const WeightedGraph::Vertex> sources) {
  std::vector<std::int64_t> dist(g.vertex_count(), -1);
  std::vector<WeightedGraph::Vertex> frontier;
  frontier.reserve(g.vertex_count());
  for (auto s : sources) {
    if (dist[s] != 0) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    auto u = frontier[head];
    for (const auto& arc : g.neighbors(u)) {
      if (dist[arc.to] < 0) {
        dist[arc.to] = dist[u] + 1;
        frontier.push_back(arc.to);
      }
    }
  }
  return dist;
}

std::vector<Rational> distances_from(const WeightedGraph& g,
                                     std::span<const WeightedGraph::Vertex> sources) {
  std::vector<Rational> dist(g.vertex_count(), kUnreachable);
  if (g.unit_lengths()) {
    auto hops = hop_distances(g, sources);
    for (std::size_t i = 0; i < hops.size(); ++i) {
      if (hops[i] >= 0) dist[i] = Rational(hops[i]);
    }
    return dist;
  }
  using Item = std::pair<Rational, WeightedGraph::Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (auto s : sources) {
    dist[s] = 0;
    queue.emplace(Rational(0), s);
  }
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d != dist[u]) continue;
    for (const auto& arc : g.neighbors(u)) {
      Rational candidate = d + arc.length;
      if (!reachable(dist[arc.to]) || candidate < dist[arc.to]) {
        dist[arc.to] = candidate;
        queue.emplace(candidate, arc.to);
      }
    }
  }
  return dist;
}

std::vector<Rational> distances_from(const WeightedGraph& g, WeightedGraph::Vertex source) {
  const WeightedGraph::Vertex sources[] = {source};
  return distances_from(g, sources);
}

Rational shortest_distance(const WeightedGraph& g, WeightedGraph::Vertex u,
                           WeightedGraph::Vertex v) {
  if (!g.contains(u) || !g.contains(v)) throw std::out_of_range("shortest_distance: vertex");
  if (u == v) return 0;
  Rational d = distances_from(g, u)[v];
  if (!reachable(d)) {
    throw Error(ErrorKind::DisconnectedPair, g.label(u) + " and " + g.label(v));
  }
  return d;
}

std::vector<WeightedGraph::Vertex> shortest_path(const WeightedGraph& g, WeightedGraph::Vertex u,
                                                 WeightedGraph::Vertex v) {
  auto dist = distances_from(g, v);
  if (!reachable(dist[u])) {
    throw Error(ErrorKind::DisconnectedPair, g.label(u) + " and " + g.label(v));
  }
  std::vector<WeightedGraph::Vertex> path{u};
  auto current = u;
  while (current != v) {
    WeightedGraph::Vertex next = current;
    for (const auto& arc : g.neighbors(current)) {
      if (reachable(dist[arc.to]) && dist[arc.to] + arc.length == dist[current] &&
          (next == current || arc.to < next)) {
        next = arc.to;
      }
    }
    path.push_back(next);
    current = next;
  }
  return path;
}

Rational set_diameter(const WeightedGraph& g, std::span<const WeightedGraph::Vertex> set) {
  Rational best = 0;
  for (std::size_t i = 0; i + 1 < set.size(); ++i) {
    auto dist = distances_from(g, set[i]);
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      if (!reachable(dist[set[j]])) {
        throw Error(ErrorKind::DisconnectedPair, g.label(set[i]) + " and " + g.label(set[j]));
      }
      best = std::max(best, dist[set[j]]);
    }
  }
  return best;
}

Rational four_point_delta(const WeightedGraph& g, std::span<const Quadruple> sample) {
  if (sample.empty()) return 0;
  std::unordered_map<WeightedGraph::Vertex, std::vector<Rational>> rows;
  auto d = [&](WeightedGraph::Vertex a, WeightedGraph::Vertex b) -> Rational {
    auto it = rows.find(a);
    if (it == rows.end()) it = rows.emplace(a, distances_from(g, a)).first;
    const Rational& value = it->second[b];
    if (!reachable(value)) {
      throw Error(ErrorKind::DisconnectedPair, g.label(a) + " and " + g.label(b));
    }
    return value;
  };
  Rational delta = 0;
  for (const auto& q : sample) {
    std::array<Rational, 3> sums{d(q[0], q[1]) + d(q[2], q[3]), d(q[0], q[2]) + d(q[1], q[3]),
                                 d(q[0], q[3]) + d(q[1], q[2])};
    std::sort(sums.begin(), sums.end());
    delta = std::max(delta, (sums[2] - sums[1]) / 2);
  }
  return delta;
}

std::vector<Quadruple> all_quadruples(const WeightedGraph& g) {
  std::vector<Quadruple> out;
  const auto n = static_cast<WeightedGraph::Vertex>(g.vertex_count());
  out.reserve(static_cast<std::size_t>(n) * n * n * n);
  for (WeightedGraph::Vertex a = 0; a < n; ++a)
    for (WeightedGraph::Vertex b = 0; b < n; ++b)
      for (WeightedGraph::Vertex c = 0; c < n; ++c)
        for (WeightedGraph::Vertex d = 0; d < n; ++d) out.push_back({a, b, c, d});
  return out;
}

QuasiGeodesicFit fit_quasi_geodesic_constants(std::span<const WeightedGraph::Vertex> path,
                                              const WeightedGraph& g) {
  QuasiGeodesicFit fit{Rational(1)};
  if (path.size() < 2) return fit;
  // arc[i] = length of the path from path[0] to path[i]
  std::vector<Rational> arc(path.size(), Rational(0));
  for (std::size_t i = 1; i < path.size(); ++i) {
    Rational step = -1;
    for (const auto& a : g.neighbors(path[i - 1])) {
      if (a.to == path[i] && (step < 0 || a.length < step)) step = a.length;
    }
    if (step < 0) throw std::invalid_argument("fit_quasi_geodesic_constants: path is not an edge path");
    arc[i] = arc[i - 1] + step;
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto dist = distances_from(g, path[i]);
    for (std::size_t j = i + 1; j < path.size(); ++j) {
      Rational ratio = (arc[j] - arc[i]) / (dist[path[j]] + 1);
      fit.lambda = std::max(fit.lambda, ratio);
    }
  }
  return fit;
}

}  // namespace qtlab
