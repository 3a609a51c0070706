#pragma once

#include <memory>
#include <vector>

#include "qtlab/free_tree.hpp"
#include "qtlab/projections.hpp"

namespace qtlab {

/// Cosets g<w> meeting the ball of `member_radius`, each truncated to the
/// ball of `radius` and carried as a unit path. Projections are
/// nearest-point sets in the Cayley tree ball.
struct AxisFamily {
  std::shared_ptr<const FreeTree> tree;
  std::vector<Axis> axes;
  std::vector<std::vector<WeightedGraph::Vertex>> points;  // tree vertex per member vertex
  std::shared_ptr<const ProjectionFamily> family;
};

AxisFamily build_axis_family(int rank, const std::vector<Word>& words, int member_radius, int radius);

}  // namespace qtlab
