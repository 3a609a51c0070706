#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qtlab/cka.hpp"
#include "qtlab/projections.hpp"

namespace qtlab {

/// fl(v): the binding line {v} x [-W, W], one ladder strip per incident
/// edge joining it to the marked line (h = 0) of that edge's plane, and the
/// plane window |h|, |f| <= W in the owner frame with every fiber line of
/// the neighbor (constant neighbor-frame h) coned off by an apex at
/// distance r.
class ThickFiberLine {
 public:
  ThickFiberLine(const CKAWindow& win, PieceId owner, Rational r);

  PieceId owner() const { return owner_; }
  int W() const { return W_; }
  const Rational& r() const { return r_; }
  const WeightedGraph& carrier() const { return carrier_; }
  const std::vector<std::size_t>& edges() const { return edges_; }

  WeightedGraph::Vertex binding(std::int64_t f) const;
  /// Plane vertex in the owner frame, if inside the window.
  std::optional<WeightedGraph::Vertex> plane(std::size_t edge, std::int64_t h, std::int64_t f) const;
  /// Vertices of the coned neighbor-fiber line with neighbor-frame h == c.
  const std::vector<WeightedGraph::Vertex>& coned_line(std::size_t edge, std::int64_t c) const;
  std::optional<WeightedGraph::Vertex> apex(std::size_t edge, std::int64_t c) const;

 private:
  PieceId owner_;
  int W_;
  Rational r_;
  WeightedGraph carrier_;
  std::vector<std::size_t> edges_;
  std::map<std::size_t, WeightedGraph::Vertex> plane_offset_;
  std::map<std::pair<std::size_t, std::int64_t>, std::vector<WeightedGraph::Vertex>> lines_;
  std::map<std::pair<std::size_t, std::int64_t>, WeightedGraph::Vertex> apex_;
};

ThickFiberLine build_fiber_line(const CKAWindow& win, PieceId v, const Rational& r = 1);

/// F_1 = {fl(v) : v in class 1} and F_2 = {fl(w) : w in class 2}.
struct FiberFamily {
  const CKAWindow* win = nullptr;
  Rational r;
  std::array<std::vector<PieceId>, 2> members;  // per class, ascending piece id
  std::vector<std::shared_ptr<const ThickFiberLine>> lines;  // by piece id
  std::array<std::shared_ptr<const ProjectionFamily>, 2> family;

  std::size_t member_index(PieceId p) const;
  int class_of(PieceId p) const { return win->piece(p).cls; }
  const ProjectionFamily& of_class(int cls) const { return *family[static_cast<std::size_t>(cls - 1)]; }
};

/// Throws WindowExceeded when a projection line misses its plane window.
FiberFamily build_fiber_family(const CKAWindow& win, const Rational& r = 1);

/// pi_{fl(target)}(fl(source)): the coned line in F_{e1} over the point of
/// the neighbor's line closest to the next boundary line on [target, source].
std::vector<WeightedGraph::Vertex> project_fiber_line(const CKAWindow& win, const ThickFiberLine& target,
                                                      PieceId source);

struct FiberAxiomReport {
  std::array<AxiomReport, 2> classes;
  std::size_t common_triples = 0;       // triples with d_T(w, [u, v]) >= 2
  std::size_t common_failures = 0;      // ... whose projection sets differ
  Rational max_projection_diameter;
  Rational diameter_bound;              // 2r + 3
  bool pass() const {
    return classes[0].pass && classes[1].pass && common_failures == 0 && max_projection_diameter <= diameter_bound;
  }
  Rational xi_witnessed() const { return std::max(classes[0].xi_witnessed, classes[1].xi_witnessed); }
};

FiberAxiomReport verify_fiber_axioms(const FiberFamily& fam, const Rational& xi);

nlohmann::json to_json(const FiberAxiomReport& r);

/// A point of some fl(v).
struct FiberPoint {
  PieceId piece = 0;
  WeightedGraph::Vertex vertex = 0;
};

/// Binding-line vertex at the fiber height of x (x in a class-1 piece).
FiberPoint pi1(const CKAWindow& win, const FiberFamily& fam, const PiecePoint& x);
/// Least-id tree edge at rho(x); its other end is w0.
std::size_t chosen_edge(const CKAWindow& win, PieceId v0);
/// x pushed along its strip onto F_{e0}, as a plane vertex of fl(w0).
FiberPoint pi2(const CKAWindow& win, const FiberFamily& fam, const PiecePoint& x);

/// d_{fl(v)}(a, b) where a, b are points of some members of the same class.
Rational fiber_extended_distance(const FiberFamily& fam, PieceId v, const FiberPoint& a, const FiberPoint& b);

struct EstimateRow {
  std::size_t pair = 0;
  std::string estimate;  // "HDist", "VDist", "WDist-h", "WDist-f"
  PieceId piece = 0;
  Rational lhs;
  Rational rhs;
  bool within = true;
};

struct EstimateReport {
  std::vector<EstimateRow> rows;
  Rational multiplicative{2};   // declared envelope: lhs <= m rhs + a and rhs <= m lhs + a
  Rational additive;            // 4r + 4
  double max_ratio = 0;         // fitted
  Rational max_defect;          // fitted max |lhs - rhs|
  bool pass() const;
};

/// Both sides of the horizontal/vertical estimates along each sampled
/// special path. Pairs sharing a piece contribute no rows.
EstimateReport check_fiber_estimates(const CKAWindow& win, const FiberFamily& fam,
                                     const std::vector<std::pair<PiecePoint, PiecePoint>>& samples);

nlohmann::json to_json(const EstimateReport& r);

struct VerticalRow {
  Rational dv;
  Rational rhs;
};

struct VerticalReport {
  std::vector<VerticalRow> rows;
  Rational C;              // least C with dv <= C (rhs + 1) on every row
  std::size_t violations = 0;
};

/// d^v against sum_j sum_{v in alpha, class j} d_{fl(v)}(Pi_j x, Pi_j y) + d_T.
VerticalReport vertical_formula_report(const CKAWindow& win, const FiberFamily& fam,
                                       const std::vector<std::pair<PiecePoint, PiecePoint>>& samples);

nlohmann::json to_json(const VerticalReport& r);

}  // namespace qtlab
