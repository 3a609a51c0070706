#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qtlab/graph.hpp"

namespace qtlab {

/// Element of a free group written over letters a, b, c, ... with the
/// upper-case letter as inverse. Always stored freely reduced; the identity
/// is the empty word.
class Word {
 public:
  Word() = default;
  /// Reduces the input; throws ParseError on characters outside [a-zA-Z].
  explicit Word(std::string_view letters);

  static Word generator(int index, bool inverse = false);

  const std::string& letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  /// Highest generator index used, plus one.
  int rank_used() const;

  Word inverse() const;
  Word operator*(const Word& rhs) const;
  Word power(std::int64_t k) const;

  bool cyclically_reduced() const;
  /// True when the word equals u^k for some |k| >= 2.
  bool proper_power() const;
  /// Cyclically reduced conjugate together with the conjugator c such that
  /// *this = c * core * c^-1.
  std::pair<Word, Word> cyclic_core() const;
  bool conjugate_to(const Word& other) const;

  std::string to_string() const { return letters_.empty() ? "1" : letters_; }

  friend bool operator==(const Word&, const Word&) = default;
  /// Shortlex order.
  friend bool operator<(const Word& a, const Word& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.letters_ < b.letters_;
  }

 private:
  std::string letters_;
};

char inverse_letter(char c);

/// Distance in the Cayley tree between two reduced words.
std::int64_t tree_distance(const Word& u, const Word& v);

/// Length of the common prefix of two reduced words.
std::size_t common_prefix(const Word& u, const Word& v);

/// Geodesic in the Cayley tree from u to v, both ends included.
std::vector<Word> tree_geodesic(const Word& u, const Word& v);

/// Axis {g * p : p prefix of w^k, k in Z} of a cyclically reduced word w
/// through the anchor g. The integer parameter h walks the axis: h = 0 at
/// the anchor, h = k*|w| at g*w^k.
class Axis {
 public:
  /// Throws ConfigInvalid if w is trivial or not cyclically reduced. The
  /// anchor is normalized to the shortlex-least element of g<w>.
  Axis(Word word, Word through);

  const Word& word() const { return word_; }
  const Word& anchor() const { return anchor_; }

  Word point(std::int64_t h) const;
  std::optional<std::int64_t> parameter(const Word& vertex) const;
  /// Parameter of the nearest axis point to `vertex`.
  std::int64_t nearest_parameter(const Word& vertex) const;
  /// Parameters h with |point(h)| <= radius (contiguous; empty if none).
  std::optional<std::pair<std::int64_t, std::int64_t>> parameters_within(std::int64_t radius) const;

  /// Axis translated on the left by g.
  Axis translated(const Word& g) const;

  friend bool operator==(const Axis& a, const Axis& b) {
    return a.word_ == b.word_ && a.anchor_ == b.anchor_;
  }

 private:
  Word word_;
  Word anchor_;
};

/// A bi-infinite line: either an explicit geodesic vertex list in some
/// graph, or an axis in a free-group tree.
struct ExplicitLine {
  std::vector<WeightedGraph::Vertex> vertices;
};
using Line = std::variant<ExplicitLine, Axis>;

/// True when consecutive vertices are adjacent and the list is a geodesic.
bool is_geodesic(const WeightedGraph& g, const ExplicitLine& line);

/// Cayley tree of the free group of the given rank, expanded out to
/// `radius` at construction. Queries that leave the ball raise
/// RadiusExceeded.
class FreeTree {
 public:
  FreeTree(int rank, int radius);

  int rank() const { return rank_; }
  int radius() const { return radius_; }
  bool contains(const Word& w) const {
    return static_cast<int>(w.length()) <= radius_ && w.rank_used() <= rank_;
  }

  /// All vertices of the ball in breadth-first order.
  const std::vector<Word>& vertices() const;
  /// Ball as a unit-length graph; vertex labels are words ("1" = identity).
  const WeightedGraph& graph() const;
  std::optional<WeightedGraph::Vertex> index(const Word& w) const;

  /// Generators and their inverses, in the order a, A, b, B, ...
  std::vector<Word> letters() const;

 private:
  void expand() const;

  int rank_;
  int radius_;
  mutable std::vector<Word> vertices_;
  mutable WeightedGraph graph_;
  mutable std::unordered_map<std::string, WeightedGraph::Vertex> index_;
  mutable bool expanded_ = false;
};

/// Nearest-point projection onto an axis. For a vertex source the result is
/// a single vertex; for an axis source it is the (possibly one-point)
/// segment of closest points. Throws RadiusExceeded when the answer leaves
/// the tree's ball or is not determined by a finite window (parallel axes).
std::vector<Word> tree_projection(const FreeTree& t, const Axis& target, const Word& source);
std::vector<Word> tree_projection(const FreeTree& t, const Axis& target, const Axis& source);

/// Parameters on `target` of tree_projection(target, source), ascending.
std::vector<std::int64_t> projection_parameters(const Axis& target, const Axis& source);

/// Reduced word of length <= radius: length uniform, letters uniform among
/// those that do not cancel.
Word random_word(std::mt19937_64& rng, int rank, int radius);

}  // namespace qtlab
