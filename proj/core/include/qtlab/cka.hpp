#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qtlab/config.hpp"
#include "qtlab/free_tree.hpp"
#include "qtlab/graph.hpp"

namespace qtlab {

/// Integer affine map (h, f) -> M (h, f) + t on a boundary plane.
struct AffineFrame {
  std::array<std::int64_t, 4> m{1, 0, 0, 1};  // m11 m12 m21 m22
  std::array<std::int64_t, 2> t{0, 0};

  std::int64_t det() const { return m[0] * m[3] - m[1] * m[2]; }
  std::pair<std::int64_t, std::int64_t> apply(std::int64_t h, std::int64_t f) const {
    return {m[0] * h + m[1] * f + t[0], m[2] * h + m[3] * f + t[1]};
  }
  std::pair<std::int64_t, std::int64_t> linear(std::int64_t h, std::int64_t f) const {
    return {m[0] * h + m[1] * f, m[2] * h + m[3] * f};
  }
  /// Exact inverse; requires |det| == 1.
  AffineFrame inverse() const;
  AffineFrame then(const AffineFrame& next) const;  // next after this
  friend bool operator==(const AffineFrame&, const AffineFrame&) = default;
};

struct GogVertex {
  std::string id;
  int rank = 2;
  int cls = 0;                           // 1 or 2 after validation
  std::map<std::string, Word> words;     // incident edge id -> boundary word
};

/// Edge `from` -> `to` with (h_to, f_to) = gluing(h_from, f_from).
struct GogEdge {
  std::string id;
  std::string from;
  std::string to;
  AffineFrame gluing;
  std::optional<AffineFrame> reverse;  // declared reverse gluing, if any
};

struct GraphOfGroupsConfig {
  std::vector<GogVertex> vertices;
  std::vector<GogEdge> edges;

  std::size_t vertex_index(const std::string& id) const;
  std::size_t edge_index(const std::string& id) const;
  /// Incident edge indices of a vertex, ascending.
  std::vector<std::size_t> incident(std::size_t vertex) const;
  std::size_t other_end(std::size_t edge, std::size_t vertex) const;
  /// Gluing from the frame of `vertex` to the frame of the other end.
  AffineFrame gluing_from(std::size_t edge, std::size_t vertex) const;

  /// Throws ConfigInvalid naming the violated invariant; fills in classes.
  void validate();

  /// Reads `[vertex.<id>]` (rank, class, word.<edge>) and `[edge.<id>]`
  /// (ends, matrix, translation, optional reverse_matrix /
  /// reverse_translation) sections, then validates.
  static GraphOfGroupsConfig from_config(const Config& cfg);
};

struct WindowParams {
  std::string center;  // underlying vertex id of the root piece; empty = first vertex
  int R_bs = 2;
  int R_tree = 3;
  int W = 8;
  int R_child = 1;  // coset representatives of length <= R_child become neighbors
};

using PieceId = std::uint32_t;

struct Piece {
  PieceId id = 0;
  std::size_t type = 0;  // underlying vertex
  int cls = 1;
  int depth = 0;
  std::optional<PieceId> parent;
  std::vector<std::size_t> edges;  // incident tree edges, parent edge first
};

/// Tree edge oriented parent -> child. Planes use the parent frame
/// (h = parameter on parent_line, f = parent fiber) and the child frame
/// (h = parameter on child_line, f = child fiber).
struct TreeEdge {
  std::size_t id = 0;
  PieceId parent = 0;
  PieceId child = 0;
  std::size_t type = 0;  // underlying edge
  Axis parent_line;
  Axis child_line;
  AffineFrame frame;  // parent frame -> child frame
};

struct PiecePoint {
  PieceId piece = 0;
  Word base;
  std::int64_t fiber = 0;
  friend bool operator==(const PiecePoint&, const PiecePoint&) = default;
};

/// Point of the plane F_e in the frame of `side` (an end of `edge`).
struct PlanePoint {
  std::size_t edge = 0;
  PieceId side = 0;
  std::int64_t h = 0;
  std::int64_t f = 0;
};

class WindowOracle;

class CKAWindow {
 public:
  CKAWindow(GraphOfGroupsConfig cfg, WindowParams params);

  const GraphOfGroupsConfig& config() const { return cfg_; }
  const WindowParams& params() const { return params_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const Piece& piece(PieceId p) const { return pieces_.at(p); }
  const TreeEdge& edge(std::size_t e) const { return edges_.at(e); }
  PieceId root() const { return 0; }
  std::string piece_name(PieceId p) const;

  const FreeTree& base_tree(PieceId p) const;
  /// The boundary line of edge e inside the base of piece p (an end of e).
  const Axis& line(std::size_t e, PieceId p) const;
  PieceId across(std::size_t e, PieceId p) const;
  /// Gluing from the frame of p to the frame of the other end of e.
  AffineFrame frame_from(std::size_t e, PieceId p) const;
  std::pair<std::int64_t, std::int64_t> convert(std::size_t e, PieceId from, std::int64_t h, std::int64_t f) const;

  /// Child reached through underlying edge `type` and coset anchor, if instantiated.
  std::optional<std::size_t> child_edge(PieceId p, std::size_t type, const Word& anchor) const;

  std::vector<PieceId> piece_path(PieceId a, PieceId b) const;
  std::vector<std::size_t> edge_path(PieceId a, PieceId b) const;
  int tree_distance(PieceId a, PieceId b) const;
  std::optional<std::size_t> edge_between(PieceId a, PieceId b) const;
  /// Pieces of class 1 or 2, ascending.
  std::vector<PieceId> pieces_of_class(int cls) const;
  /// Bass-Serre window as a unit graph, labels = piece names.
  WeightedGraph bass_serre_graph() const;

  bool contains(const PiecePoint& x) const;

  /// Discretized window graph, built on first use.
  const WindowOracle& oracle() const;

 private:
  GraphOfGroupsConfig cfg_;
  WindowParams params_;
  std::vector<Piece> pieces_;
  std::vector<TreeEdge> edges_;
  std::map<int, std::shared_ptr<const FreeTree>> trees_;
  std::map<std::tuple<PieceId, std::size_t, std::string>, std::size_t> child_index_;
  mutable std::once_flag oracle_once_;
  mutable std::shared_ptr<const WindowOracle> oracle_;
};

/// Throws ConfigInvalid (via validate) on a bad config.
CKAWindow build_window(const GraphOfGroupsConfig& cfg, const WindowParams& params);

/// Point of a plane or piece, for the index map.
using WindowPoint = std::variant<PiecePoint, PlanePoint>;

/// rho: piece points map to their piece; plane points to the child end e_+.
PieceId index_map(const CKAWindow& win, const WindowPoint& x);

struct Strip {
  PieceId piece = 0;
  std::vector<Word> base_segment;     // from the a end to the b end
  std::optional<std::int64_t> h_a;    // parameter on the a line (edge ends only)
  std::optional<std::int64_t> h_b;
  std::int64_t width() const { return static_cast<std::int64_t>(base_segment.size()) - 1; }
};

using StripEnd = std::variant<std::size_t, PiecePoint>;

/// Closest-point segment between two lines of a tree (first closest pair
/// by parameter on `a` when they overlap).
Strip strip_between_lines(const Axis& a, const Axis& b);
/// Strip inside piece v between two incident edges or an edge and a point.
/// Throws RadiusExceeded when the segment leaves the piece ball.
Strip strip_between(const CKAWindow& win, PieceId v, const StripEnd& a, const StripEnd& b);

struct Corner {
  std::size_t edge = 0;
  PieceId from = 0;  // v_{i-1}
  PieceId to = 0;    // v_i
  std::int64_t h_from = 0;
  std::int64_t f_from = 0;
  std::int64_t h_to = 0;
  std::int64_t f_to = 0;
  Rational f_exact;       // unrounded fiber in the `from` frame
  Rational f_to_exact;    // unrounded fiber in the `to` frame
};

struct Segment {
  PieceId piece = 0;
  Word start_base;
  Word end_base;
  std::int64_t start_fiber = 0;
  std::int64_t end_fiber = 0;
  Rational H;        // horizontal length
  Rational R;        // vertical length
  Rational R_exact;  // vertical length from unrounded corners
};

struct SpecialPath {
  PiecePoint x;
  PiecePoint y;
  std::vector<PieceId> pieces;
  std::vector<Corner> corners;
  std::vector<Segment> segments;
};

/// Corners by the frame-intersection rule; throws WindowExceeded for
/// endpoints outside the window.
SpecialPath special_path(const CKAWindow& win, const PiecePoint& x, const PiecePoint& y);

struct PathComponents {
  Rational dh;
  Rational dv;
  Rational l1;
  double l2 = 0;  // sum of per-segment Euclidean lengths
};
PathComponents path_components(const SpecialPath& sp);

nlohmann::json to_json(const CKAWindow& win, const SpecialPath& sp);

/// Unit-grid model of the window: piece vertices (base, fiber) with
/// fibers in [-W, W], plane vertices identified across frames.
class WindowOracle {
 public:
  explicit WindowOracle(const CKAWindow& win);

  const WeightedGraph& graph() const { return graph_; }
  /// Throws WindowExceeded when x is outside the grid.
  WeightedGraph::Vertex vertex(const PiecePoint& x) const;
  bool on_shell(WeightedGraph::Vertex v) const { return shell_[v] != 0; }

  struct Result {
    Rational distance;
    bool boundary_suspect = false;
  };
  /// Distance, flagged when removing the outer shell lengthens it.
  Result query(const PiecePoint& x, const PiecePoint& y) const;
  Rational distance(const PiecePoint& x, const PiecePoint& y) const;

 private:
  const CKAWindow* win_;
  int span_;
  std::vector<WeightedGraph::Vertex> offset_;  // per piece
  std::vector<WeightedGraph::Vertex> rep_;     // raw slot -> graph vertex
  WeightedGraph graph_;
  std::vector<char> shell_;
};

Rational brute_force_distance(const CKAWindow& win, const PiecePoint& x, const PiecePoint& y);

/// Vertex-group element g and fiber shift s acting at the root piece,
/// propagated to every piece through the gluings.
struct DeckTransform {
  Word g;
  std::int64_t s = 0;
};

struct DeckImage {
  PieceId piece = 0;
  Word g;             // left multiplication on the base of the piece
  std::int64_t s = 0; // fiber shift
};

/// Per piece: where the transform sends it, or nullopt if the image
/// leaves the window.
std::vector<std::optional<DeckImage>> deck_images(const CKAWindow& win, const DeckTransform& t);
std::optional<PiecePoint> apply_deck(const CKAWindow& win, const std::vector<std::optional<DeckImage>>& images,
                                     const PiecePoint& x);
/// Image of a plane point (frame of `side`) under the transform.
std::optional<PlanePoint> apply_deck(const CKAWindow& win, const std::vector<std::optional<DeckImage>>& images,
                                     const PlanePoint& x);

/// Seeded sample of distinct point pairs in pieces of class `cls` (0 for
/// any): bases within R_tree - 1, fibers within +-fiber_span.
std::vector<std::pair<PiecePoint, PiecePoint>> sample_pairs(const CKAWindow& win, std::size_t count,
                                                            std::uint64_t seed, std::int64_t fiber_span, int cls = 0);

/// The first `count` pairs of the sample_pairs stream that are not
/// boundary suspect in `win`. Throws InsufficientSample when the stream
/// runs dry (20 * count draws).
std::vector<std::pair<PiecePoint, PiecePoint>> clean_pairs(const CKAWindow& win, std::size_t count, std::uint64_t seed,
                                                           std::int64_t fiber_span, int cls = 0);

/// Round to nearest, ties toward -infinity.
std::int64_t round_half_down(const Rational& q);

}  // namespace qtlab
