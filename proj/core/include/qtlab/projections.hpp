#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qtlab/graph.hpp"

namespace qtlab {

/// Index of a member space inside a ProjectionFamily.
struct MemberIndex {
  std::size_t value;
  friend bool operator==(MemberIndex, MemberIndex) = default;
};

/// A vertex of a particular member.
struct MemberPoint {
  std::size_t member;
  WeightedGraph::Vertex vertex;
};

using PointOrMember = std::variant<MemberIndex, MemberPoint>;

/// Cutoff [t]_K: t when t >= K, otherwise 0.
inline Rational cutoff(const Rational& t, const Rational& K) { return t >= K ? t : Rational(0); }

/// Indexed collection of member spaces with extensional projections
/// pi_Y(X), a finite vertex set of Y for every ordered pair X != Y.
/// Immutable after construction; d_Y values are served from tables
/// computed in the constructor.
class ProjectionFamily {
 public:
  struct Member {
    std::string name;
    std::shared_ptr<const WeightedGraph> graph;
  };

  /// projections[y][x] is pi_Y(X) for x != y (the diagonal is ignored).
  /// Throws std::invalid_argument on empty or out-of-range sets.
  ProjectionFamily(std::vector<Member> members,
                   std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> projections);

  std::size_t size() const { return members_.size(); }
  const Member& member(std::size_t i) const { return members_[i]; }
  const std::vector<WeightedGraph::Vertex>& projection(std::size_t target, std::size_t source) const {
    return projections_[target][source];
  }

  /// d_Y(X, Z) = diam(pi_Y(X) u pi_Y(Z)); for X == Z this is diam pi_Y(X).
  /// Throws IndexClash when Y is X or Z.
  Rational projection_distance(std::size_t y, std::size_t x, std::size_t z) const;

  /// The point extension of d_Y: members or vertices of members on either side.
  Rational extended_distance(std::size_t y, const PointOrMember& x, const PointOrMember& z) const;

  /// Distance inside member y between two of its vertices.
  Rational member_distance(std::size_t y, WeightedGraph::Vertex a, WeightedGraph::Vertex b) const;

 private:
  Rational cached_distance(std::size_t y, WeightedGraph::Vertex a, WeightedGraph::Vertex b) const;
  Rational diameter_with(std::size_t y, const std::vector<WeightedGraph::Vertex>& a,
                         const std::vector<WeightedGraph::Vertex>& b) const;

  std::vector<Member> members_;
  std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> projections_;
  // Per member: vertices occurring in some projection set, and the matrix of
  // pairwise distances between them.
  std::vector<std::map<WeightedGraph::Vertex, std::size_t>> slot_;
  std::vector<std::vector<Rational>> table_;
};

struct AxiomViolation {
  std::string axiom;  // "1", "2", or "strong"
  std::size_t y;
  std::size_t x;
  std::size_t z;
  Rational value;

  friend auto operator<=>(const AxiomViolation& a, const AxiomViolation& b) {
    if (auto c = a.axiom <=> b.axiom; c != 0) return c;
    if (auto c = a.y <=> b.y; c != 0) return c;
    if (auto c = a.x <=> b.x; c != 0) return c;
    return a.z <=> b.z;
  }
  friend bool operator==(const AxiomViolation& a, const AxiomViolation& b) {
    return (a <=> b) == 0;
  }
};

struct AxiomReport {
  bool pass = true;
  bool strong = false;
  bool complete = true;     // false when pair_budget cut the check short
  Rational xi;              // the constant that was checked
  Rational xi_witnessed;    // least xi for which the checked axioms hold
  std::vector<AxiomViolation> violations;
  std::size_t members = 0;
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;
  // Axiom 3 profile: for each checked pair (X, Z), #{Y : d_Y(X,Z) > xi}.
  std::size_t axiom3_max = 0;
  std::map<std::size_t, std::size_t> axiom3_histogram;
};

/// Checks axioms (1) and (2) at `xi` over all members and all pairs up to
/// `pair_budget` unordered (X, Z) pairs, and records the axiom (3) profile.
AxiomReport verify_axioms(const ProjectionFamily& f, const Rational& xi,
                          std::size_t pair_budget = static_cast<std::size_t>(-1));

/// As verify_axioms, adding d_Y(X,Z) > xi  =>  pi_X(Y) == pi_X(Z).
AxiomReport check_strong_axioms(const ProjectionFamily& f, const Rational& xi,
                                std::size_t pair_budget = static_cast<std::size_t>(-1));

/// Family over new carriers: pi'(T_y, T_x) = map_y(pi(Y, X)). Each map must
/// be `lipschitz`-Lipschitz on member edges; otherwise LipschitzViolation.
ProjectionFamily pushforward_family(const ProjectionFamily& base,
                                    std::vector<std::shared_ptr<const WeightedGraph>> targets,
                                    const std::vector<std::vector<WeightedGraph::Vertex>>& maps,
                                    const Rational& lipschitz);

nlohmann::json to_json(const ProjectionFamily& f);
ProjectionFamily family_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AxiomReport& r);

}  // namespace qtlab
