#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qtlab/cka.hpp"
#include "qtlab/coned_off.hpp"
#include "qtlab/fiber_lines.hpp"
#include "qtlab/quasi_tree.hpp"

namespace qtlab {

/// Everything Phi needs for one window: the fiber families, their quasi-trees
/// of spaces, and the coned pieces.
struct EmbeddingContext {
  const CKAWindow* win = nullptr;
  Rational r;
  Rational K;
  Rational xi;  // witnessed by the fiber families
  std::shared_ptr<const FiberFamily> fibers;
  std::array<std::shared_ptr<const QuasiTreeOfSpaces>, 2> carriers;
  std::shared_ptr<const ConedPieces> coned;
};

/// K defaults to 4 max(xi, 1) with xi witnessed by verify_fiber_axioms.
EmbeddingContext build_embedding_context(const CKAWindow& win, const Rational& r,
                                         std::optional<Rational> K = std::nullopt);

struct EmbeddingCoordinates {
  PieceId tree = 0;
  WeightedGraph::Vertex f1 = 0;  // carrier vertex of C_K(F_1)
  WeightedGraph::Vertex f2 = 0;  // carrier vertex of C_K(F_2)
  ThickPoint x1;
  ThickPoint x2;
};

/// Phi(x) for x in a class-1 piece. Throws WindowExceeded when a coordinate
/// leaves the window and IndexClash for class-2 points.
EmbeddingCoordinates embed(const EmbeddingContext& ctx, const PiecePoint& x);

struct ProductDistance {
  Rational tree;
  Rational f1;
  Rational f2;
  Rational x1;
  Rational x2;
  Rational total() const { return tree + f1 + f2 + x1 + x2; }
  double l2() const;
};

ProductDistance product_distance(const EmbeddingContext& ctx, const EmbeddingCoordinates& a,
                                 const EmbeddingCoordinates& b);

struct QIRow {
  std::size_t pair = 0;
  Rational d_X;        // special-path l1 length
  Rational d_product;
  double ratio = 0;    // d_product / d_X
};

struct QIFitReport {
  Rational lambda;       // least lambda = c with both inequalities on every pair
  Rational c;
  Rational lipschitz;    // L checked as d_product <= L d_X + L
  std::size_t violations = 0;
  std::size_t lipschitz_failures = 0;  // pairs with d_product > L d_X + L
  std::vector<QIRow> rows;
  std::size_t boundary_dropped = 0;
  // mu certification of d_X on the spot-check subsample.
  std::size_t spot_checks = 0;
  Rational spot_mu;
  // provenance
  int R_bs = 0;
  int R_tree = 0;
  int W = 0;
  Rational K;
  Rational r;
  std::uint64_t seed = 0;

  std::string headline() const;
};

/// Drops boundary-suspect and identical pairs; throws InsufficientSample
/// when fewer than `min_pairs` remain. The Lipschitz check uses
/// `lipschitz` when given (a constant fitted elsewhere), else lambda.
QIFitReport fit_qi_constants(const EmbeddingContext& ctx, const std::vector<std::pair<PiecePoint, PiecePoint>>& samples,
                             std::uint64_t seed = 0, std::optional<Rational> lipschitz = std::nullopt,
                             std::size_t spot_checks = 20, std::size_t min_pairs = 50);

nlohmann::json to_json(const QIFitReport& r);
std::string to_csv(const QIFitReport& r);

struct QIStability {
  QIFitReport base;
  QIFitReport doubled;
  double drift = 0;  // |lambda' - lambda| / lambda
  bool stable(double tolerance = 0.15) const { return drift < tolerance; }
};

/// Fits on `base`, then refits on `doubled` with the base lambda as the
/// Lipschitz constant to hold on every pair.
QIStability fit_qi_stability(const EmbeddingContext& base, const EmbeddingContext& doubled,
                             const std::vector<std::pair<PiecePoint, PiecePoint>>& samples, std::uint64_t seed = 0);

nlohmann::json to_json(const QIStability& s);

}  // namespace qtlab
