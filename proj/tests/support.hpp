#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qtlab/cka.hpp"
#include "qtlab/coned_off.hpp"
#include "qtlab/error.hpp"
#include "qtlab/graph.hpp"
#include "qtlab/scenario.hpp"

namespace qtlab::testing {

inline std::string scenario_path(const std::string& name) {
  return std::string(QTLAB_SCENARIO_DIR) + "/" + name + ".toml";
}

/// Kind of the Error thrown by f, or nullopt when it returns normally.
inline std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline Scenario scenario(const std::string& name) { return Scenario::load(scenario_path(name)); }

inline CKAWindow window(const std::string& name, int W = 0) {
  Scenario s = scenario(name);
  if (W > 0) s.window.W = W;
  return CKAWindow(GraphOfGroupsConfig::from_config(s.config), s.window);
}

/// Connected graph: random spanning tree plus `extra` chords, lengths in
/// {1, ..., max_len}.
inline WeightedGraph random_graph(std::mt19937_64& rng, int n, int extra, int max_len) {
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex();
  for (int i = 1; i < n; ++i) {
    g.add_edge(static_cast<WeightedGraph::Vertex>(i), static_cast<WeightedGraph::Vertex>(rng() % i),
               Rational(1 + static_cast<std::int64_t>(rng() % max_len)));
  }
  for (int k = 0; k < extra; ++k) {
    const auto u = static_cast<WeightedGraph::Vertex>(rng() % n);
    const auto v = static_cast<WeightedGraph::Vertex>(rng() % n);
    if (u != v && !g.adjacent(u, v)) g.add_edge(u, v, Rational(1 + static_cast<std::int64_t>(rng() % max_len)));
  }
  return g;
}

/// Random coned instance with at most `max_vertices` vertices, apexes
/// included. Lines are base geodesics with at least two vertices.
inline ConedSpace random_coned(std::mt19937_64& rng, std::size_t max_vertices) {
  for (;;) {
    const int n = 4 + static_cast<int>(rng() % (max_vertices - 5));
    const WeightedGraph base = random_graph(rng, n, 1 + static_cast<int>(rng() % 4), 2);
    std::vector<std::vector<WeightedGraph::Vertex>> lines;
    const int want = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < want && static_cast<std::size_t>(n) + lines.size() < max_vertices; ++k) {
      auto p = shortest_path(base, static_cast<WeightedGraph::Vertex>(rng() % n),
                             static_cast<WeightedGraph::Vertex>(rng() % n));
      if (p.size() >= 2) lines.push_back(std::move(p));
    }
    if (lines.empty()) continue;
    const Rational r(1 + static_cast<std::int64_t>(rng() % 2), 2);
    return cone_off(base, std::move(lines), r);
  }
}

}  // namespace qtlab::testing
