#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qtlab/cka.hpp"
#include "qtlab/config.hpp"
#include "qtlab/free_tree.hpp"
#include "qtlab/graph.hpp"
#include "qtlab/projections.hpp"

namespace qtlab {

/// Base graph plus one apex per coned line, joined to every line vertex by
/// an edge of length r. Base vertices keep their indices; apexes follow.
/// Apex edges carry tag 1.
struct ConedSpace {
  using Vertex = WeightedGraph::Vertex;

  WeightedGraph graph;
  std::size_t base_count = 0;
  std::vector<std::vector<Vertex>> lines;
  std::vector<Vertex> apexes;
  Rational r;

  bool is_apex(Vertex v) const { return v >= base_count; }
  std::size_t line_of_apex(Vertex a) const { return a - static_cast<Vertex>(base_count); }
  /// Base distance between two vertices of line i.
  Rational line_distance(std::size_t i, Vertex u, Vertex v) const;
  /// The base graph again (apexes and their edges removed).
  WeightedGraph base() const;

  // Per line: either positions along a geodesic or a full distance matrix.
  std::vector<std::unordered_map<Vertex, std::size_t>> slot;
  std::vector<std::vector<Rational>> position;
  std::vector<std::vector<Rational>> matrix;
};

/// When `geodesic_lines` is set each line must list the vertices of a base
/// geodesic in order and base distances are read off cumulative lengths;
/// otherwise they are computed by Dijkstra from every line vertex.
ConedSpace cone_off(const WeightedGraph& base, std::vector<std::vector<WeightedGraph::Vertex>> lines,
                    const Rational& r, bool geodesic_lines = false);

/// A geodesic split into maximal K-bounded segments and the peripheral
/// edges (through an apex) whose ends are more than K apart in the base.
struct ThickDecomposition {
  std::vector<WeightedGraph::Vertex> path;
  std::vector<Rational> segments;  // Len of each segment, in path order
  std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>> excluded;
  Rational value;                  // sum of [Len]_K
};

ThickDecomposition decompose(const ConedSpace& cs, const std::vector<WeightedGraph::Vertex>& path, const Rational& K);

/// d^K(x, y): maximum of |beta|_K over all geodesics, by dynamic
/// programming over the geodesic DAG.
Rational thick_distance(const ConedSpace& cs, WeightedGraph::Vertex x, WeightedGraph::Vertex y, const Rational& K);
/// Same, reusing distance vectors from x and from y.
Rational thick_distance(const ConedSpace& cs, const std::vector<Rational>& dx, const std::vector<Rational>& dy,
                        WeightedGraph::Vertex x, WeightedGraph::Vertex y, const Rational& K);

/// Every geodesic from x to y, by depth-first enumeration of simple paths
/// with branch and bound (no shortest-path tables). Throws BudgetExceeded
/// past `budget` paths.
std::vector<std::vector<WeightedGraph::Vertex>> enumerate_geodesics(const WeightedGraph& g, WeightedGraph::Vertex x,
                                                                    WeightedGraph::Vertex y, std::size_t budget = 200000);

/// Exhaustive reference for thick_distance. Base distances for peripheral
/// edges come from Dijkstra on the apex-free graph.
Rational thick_distance_exhaustive(const ConedSpace& cs, WeightedGraph::Vertex x, WeightedGraph::Vertex y,
                                   const Rational& K);

// ---------------------------------------------------------------------------
// Coned pieces of a CKA window

/// Y-dot for one underlying vertex: the Cayley tree ball of its group with
/// every coset of every boundary word that meets the ball coned off.
struct ConedPiece {
  std::size_t type = 0;
  std::shared_ptr<const FreeTree> tree;
  ConedSpace space;
  std::map<std::pair<std::string, std::string>, std::size_t> line_index;  // (word, anchor) -> line

  WeightedGraph::Vertex vertex(const Word& w) const;  // WindowExceeded outside the ball
  std::optional<WeightedGraph::Vertex> apex(const Axis& line) const;
};

/// Largest radius in [min_radius, 8] whose ball has at most `cap` vertices.
int coned_radius(int rank, int min_radius, std::size_t cap = 25000);

class ConedPieces {
 public:
  ConedPieces(const CKAWindow& win, const Rational& r);

  const CKAWindow& window() const { return *win_; }
  const Rational& r() const { return r_; }
  const ConedPiece& of(PieceId p) const { return *by_type_.at(win_->piece(p).type); }
  const ConedPiece& of_type(std::size_t type) const { return *by_type_.at(type); }

 private:
  const CKAWindow* win_;
  Rational r_;
  std::map<std::size_t, std::shared_ptr<const ConedPiece>> by_type_;
};

/// A point of X-dot: a base point of a piece, or the cone point over a
/// boundary line of that piece.
struct ThickPoint {
  PieceId piece = 0;
  std::variant<Word, Axis> at;
};

/// Entry/exit base points of every piece on [rho(x), rho(y)].
struct ThickTerm {
  PieceId piece = 0;
  Word entry;
  Word exit;
  Rational value;
};

struct ThickBreakdown {
  Rational total;
  std::vector<ThickTerm> terms;  // pieces of the requested class only
};

/// Sum over pieces of class `cls` on [rho(x), rho(y)] of d^K between the
/// closest-point entry/exit pairs. Throws WindowExceeded when a point falls
/// outside the coned ball.
ThickBreakdown global_thick_distance(const ConedPieces& cp, int cls, const ThickPoint& x, const ThickPoint& y,
                                     const Rational& K);

// ---------------------------------------------------------------------------
// Quasi-lines

struct QuasiLineFamily {
  std::vector<Word> words;
  std::vector<Axis> axes;
  std::vector<std::int64_t> first;                        // parameter of vertex 0 of each member
  std::vector<std::vector<WeightedGraph::Vertex>> points;  // coned-space vertex per member vertex
  std::shared_ptr<const ProjectionFamily> family;         // empty when there are no members
  Rational theta;                                         // largest projection diameter

  std::size_t size() const { return axes.size(); }
};

/// Translates g<w> meeting the ball of `member_radius`, truncated to the
/// coned ball. Throws NotLoxodromic naming the first word whose
/// displacement d(1, w^k) fails to grow strictly over the ball.
QuasiLineFamily quasi_line_family(const ConedPiece& piece, const std::vector<Word>& words, int member_radius = 2);

/// Words not coned in the piece: free letters, plus the product of the
/// coned letters when there are at least two.
std::vector<Word> default_quasi_line_words(const GogVertex& v);

/// d-dot_gamma(a, b) for every member: diameter, in member parameters, of the
/// nearest points to a and b. Takes distance vectors from a and from b.
std::vector<Rational> quasi_line_distances(const QuasiLineFamily& f, const std::vector<Rational>& da,
                                           const std::vector<Rational>& db);

// ---------------------------------------------------------------------------
// Distance formula checks

struct FormulaFitRow {
  std::size_t pair = 0;
  Rational lhs;
  Rational rhs;
};

/// Least lambda with lhs <= lambda (rhs + 1) and rhs <= lambda (lhs + 1).
struct AffineFit {
  std::vector<FormulaFitRow> rows;
  Rational lambda;
  std::size_t violations = 0;
};

AffineFit fit_affine(std::vector<FormulaFitRow> rows);

struct RelativePresentation {
  int rank = 2;
  std::vector<std::pair<std::string, Word>> peripherals;

  /// `[group] rank` and `[peripheral.<id>] word`.
  static RelativePresentation from_config(const Config& cfg);
};

/// Cayley tree ball coned over every peripheral coset meeting it, half-edge
/// model (apex edges of length 1/2).
struct RelativeSpace {
  RelativePresentation pres;
  std::shared_ptr<const FreeTree> tree;
  ConedSpace space;
};

RelativeSpace build_relative_space(const RelativePresentation& pres, int radius);

struct RelativeRow {
  Word x;
  Word y;
  Rational word_distance;  // BFS in the Cayley ball
  Rational thick;          // d^K in the coned graph
  Rational peripheral;     // sum over cosets of [d_P]_K
};

struct RelativeReport {
  Rational K;
  int radius = 0;
  std::vector<RelativeRow> rows;
  AffineFit fit;
};

RelativeReport validate_relative_formula(const RelativeSpace& rs, const std::vector<std::pair<Word, Word>>& samples,
                                         const Rational& K);

struct RelativeSweep {
  std::vector<RelativeReport> base;     // one per K, half radius
  std::vector<RelativeReport> doubled;  // one per K, full radius
  std::vector<double> drift;            // relative lambda change per K
  std::optional<Rational> threshold;    // least K from which every drift is < tolerance
  bool pass() const;
};

/// Runs the K grid on the half-radius and full-radius balls, with one
/// sample set drawn inside the half-radius ball. The threshold is the least
/// K from which every grid value is violation-free and drifts < tolerance.
RelativeSweep sweep_relative_formula(const RelativePresentation& pres, int radius, const std::vector<Rational>& Ks,
                                     std::size_t samples, std::uint64_t seed, double tolerance = 0.15);

nlohmann::json to_json(const RelativeSweep& s);

struct ConeoffRow {
  std::size_t pair = 0;
  Rational thick;      // global thick distance
  Rational quasi;      // sum of [d-dot_gamma]_K over path pieces
  Rational tree;       // d_T(rho x, rho y)
};

struct ConeoffReport {
  int cls = 1;
  Rational K;
  std::vector<ConeoffRow> rows;
  AffineFit fit;
};

/// Quasi-line families per underlying vertex, from `words` (vertex id ->
/// words) or default_quasi_line_words.
std::map<std::size_t, QuasiLineFamily> build_quasi_line_families(const ConedPieces& cp,
                                                                 const std::map<std::string, std::vector<Word>>& words);

ConeoffReport validate_coneoff_formula(const ConedPieces& cp, const std::map<std::size_t, QuasiLineFamily>& families,
                                       int cls, const std::vector<std::pair<PiecePoint, PiecePoint>>& samples,
                                       const Rational& K);

nlohmann::json to_json(const ConeoffReport& r);

/// Pi_3(x): the base point of x in its coned piece.
ThickPoint pi3(const CKAWindow& win, const PiecePoint& x);
/// Pi_4(x): the cone point over the line of [rho(x), w0] in Y-dot_{w0}.
ThickPoint pi4(const CKAWindow& win, const PiecePoint& x, PieceId w0);

}  // namespace qtlab
