#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qtlab/rational.hpp"

namespace qtlab {

/// Finite undirected graph with positive exact edge lengths. Vertices are
/// dense indices; an optional string label gives each vertex an opaque id
/// for serialization.
class WeightedGraph {
 public:
  using Vertex = std::uint32_t;

  struct Arc {
    Vertex to;
    Rational length;
    std::uint32_t tag;  // free for callers, e.g. bridge marking
  };

  struct EdgeRecord {
    Vertex u;
    Vertex v;
    Rational length;
    std::uint32_t tag;
  };

  WeightedGraph() = default;

  Vertex add_vertex(std::string label = {});
  void add_edge(Vertex u, Vertex v, Rational length = 1, std::uint32_t tag = 0);

  std::size_t vertex_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool contains(Vertex v) const { return v < adjacency_.size(); }

  std::span<const Arc> neighbors(Vertex v) const { return adjacency_[v]; }
  bool adjacent(Vertex u, Vertex v) const;

  /// Label if one was given, otherwise the decimal index.
  std::string label(Vertex v) const;
  std::optional<Vertex> find(std::string_view label) const;

  /// True while every edge has length exactly one (BFS fast path).
  bool unit_lengths() const { return unit_lengths_; }

  /// Each undirected edge once, with u < v, in insertion order of u.
  std::vector<EdgeRecord> edges() const;

 private:
  std::vector<std::vector<Arc>> adjacency_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Vertex> by_label_;
  std::size_t edge_count_ = 0;
  bool unit_lengths_ = true;
};

/// Sentinel returned for unreachable vertices.
inline const Rational kUnreachable{-1};

inline bool reachable(const Rational& d) { return d >= 0; }

/// Exact distances from a set of sources (distance to the nearest source).
std::vector<Rational> distances_from(const WeightedGraph& g,
                                     std::span<const WeightedGraph::Vertex> sources);

std::vector<Rational> distances_from(const WeightedGraph& g, WeightedGraph::Vertex source);

/// Hop counts from a source set; -1 for unreachable. Only meaningful for
/// unit-length graphs, where it coincides with distances_from.
std::vector<std::int64_t> hop_distances(const WeightedGraph& g,
                                        std::span<const WeightedGraph::Vertex> sources);

/// Throws DisconnectedPair when u and v lie in different components.
Rational shortest_distance(const WeightedGraph& g, WeightedGraph::Vertex u,
                           WeightedGraph::Vertex v);

/// One shortest path from u to v as a vertex list (u first).
std::vector<WeightedGraph::Vertex> shortest_path(const WeightedGraph& g, WeightedGraph::Vertex u,
                                                 WeightedGraph::Vertex v);

/// Largest pairwise distance within a vertex set.
Rational set_diameter(const WeightedGraph& g, std::span<const WeightedGraph::Vertex> set);

using Quadruple = std::array<WeightedGraph::Vertex, 4>;

/// Gromov four-point defect maximized over the given quadruples.
Rational four_point_delta(const WeightedGraph& g, std::span<const Quadruple> sample);

/// Every ordered quadruple of the vertex set (n^4 entries; small graphs only).
std::vector<Quadruple> all_quadruples(const WeightedGraph& g);

struct QuasiGeodesicFit {
  Rational lambda;  // c is reported equal to lambda
  double lambda_value() const { return to_double(lambda); }
};

/// Least lambda >= 1 such that every sub-path of `path` satisfies
/// arc <= lambda * d + lambda (the reverse inequality holds trivially).
QuasiGeodesicFit fit_quasi_geodesic_constants(std::span<const WeightedGraph::Vertex> path,
                                              const WeightedGraph& g);

// Serialization: line format ("v <id>", "e <id> <id> <len>") and DOT.
std::string to_text(const WeightedGraph& g);
WeightedGraph from_text(std::string_view text);
std::string to_dot(const WeightedGraph& g, std::string_view name = "G",
                   std::string_view tag_attribute = "");
WeightedGraph from_dot(std::string_view text);

}  // namespace qtlab
