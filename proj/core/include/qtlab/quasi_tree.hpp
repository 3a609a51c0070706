#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qtlab/graph.hpp"
#include "qtlab/projections.hpp"

namespace qtlab {

/// C_K(Y): disjoint union of the members plus unit bridge edges between
/// pi_X(Z) and pi_Z(X) for every admitted pair.
struct QuasiTreeOfSpaces {
  std::shared_ptr<const ProjectionFamily> family;
  Rational K;
  WeightedGraph carrier;
  std::vector<WeightedGraph::Vertex> offset;  // first carrier vertex of each member
  std::vector<std::pair<std::size_t, std::size_t>> bridged_pairs;
  std::size_t bridge_edges = 0;
  std::vector<std::string> warnings;

  WeightedGraph::Vertex carrier_vertex(std::size_t member, WeightedGraph::Vertex v) const {
    return offset[member] + v;
  }
  /// Owning member and local vertex of a carrier vertex.
  MemberPoint locate(WeightedGraph::Vertex c) const;

  std::string to_dot() const;
};

/// Members X != Z are bridged iff d_Y(X,Z) <= K for every other Y. Throws
/// EmptyFamily on an empty family. Records a warning when the strong axioms
/// fail at K/4.
QuasiTreeOfSpaces build_quasi_tree(std::shared_ptr<const ProjectionFamily> f, const Rational& K);

struct FormulaConstants {
  Rational lower{1, 4};
  Rational upper{2};
  Rational additive{3};  // multiplied by K

  /// Widened constants for perturbed endpoints.
  static FormulaConstants slack() { return {Rational(1, 8), Rational(4), Rational(3)}; }
};

struct FormulaRow {
  WeightedGraph::Vertex x;
  WeightedGraph::Vertex y;
  Rational sum;     // sum over Y of [d_Y(x,y)]_K
  Rational lhs;     // lower * sum
  Rational mid;     // carrier distance
  Rational rhs;     // upper * sum + additive * K
  Rational margin;  // min(mid - lhs, rhs - mid); negative on failure
  bool lower_ok;
  bool upper_ok;
};

struct FormulaReport {
  Rational K;
  FormulaConstants constants;
  std::vector<FormulaRow> rows;
  std::size_t lower_failures = 0;
  std::size_t upper_failures = 0;
  bool pass() const { return lower_failures == 0 && upper_failures == 0; }
  Rational worst_margin() const;
  /// Columns: pair, lhs, mid, rhs, margin.
  std::string to_csv(const WeightedGraph& carrier) const;
};

/// Sum over every member Y of [d_Y(x, y)]_K for carrier vertices x, y.
Rational cutoff_sum(const QuasiTreeOfSpaces& qt, WeightedGraph::Vertex x, WeightedGraph::Vertex y);

FormulaReport validate_distance_formula(
    const QuasiTreeOfSpaces& qt, const std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>>& samples,
    const FormulaConstants& constants = {});

struct BottleneckReport {
  Rational delta;                     // threshold checked against
  Rational worst;                     // largest witnessed value
  std::vector<Rational> per_pair;
  bool pass() const { return worst <= delta; }
};

/// For each pair (x, y), the largest t such that some x-y path avoids the
/// open t-ball around the midpoint of a shortest x-y path. Every path
/// between x and y is accounted for, not a sample. Throws DisconnectedPair.
BottleneckReport bottleneck_check(
    const WeightedGraph& g, const std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>>& samples,
    const Rational& delta);

}  // namespace qtlab
