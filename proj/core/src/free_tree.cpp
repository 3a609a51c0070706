#include "qtlab/free_tree.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "qtlab/error.hpp"

namespace qtlab {

char inverse_letter(char c) {
  return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                      : static_cast<char>(std::tolower(c));
}

Word::Word(std::string_view letters) {
  letters_.reserve(letters.size());
  for (char c : letters) {
    if (c == '1' && letters.size() == 1) break;  // identity
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      throw Error(ErrorKind::ParseError, "invalid letter in word '" + std::string(letters) + "'");
    }
    if (!letters_.empty() && letters_.back() == inverse_letter(c)) {
      letters_.pop_back();
    } else {
      letters_.push_back(c);
    }
  }
}

Word Word::generator(int index, bool inverse) {
  char c = static_cast<char>('a' + index);
  return Word(std::string(1, inverse ? inverse_letter(c) : c));
}

int Word::rank_used() const {
  int rank = 0;
  for (char c : letters_) rank = std::max(rank, std::tolower(c) - 'a' + 1);
  return rank;
}

Word Word::inverse() const {
  Word out;
  out.letters_.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.letters_.push_back(inverse_letter(*it));
  return out;
}

Word Word::operator*(const Word& rhs) const {
  Word out = *this;
  for (char c : rhs.letters_) {
    if (!out.letters_.empty() && out.letters_.back() == inverse_letter(c)) {
      out.letters_.pop_back();
    } else {
      out.letters_.push_back(c);
    }
  }
  return out;
}

Word Word::power(std::int64_t k) const {
  Word base = k < 0 ? inverse() : *this;
  Word out;
  for (std::int64_t i = 0; i < (k < 0 ? -k : k); ++i) out = out * base;
  return out;
}

bool Word::cyclically_reduced() const {
  return letters_.size() < 2 || letters_.front() != inverse_letter(letters_.back());
}

std::pair<Word, Word> Word::cyclic_core() const {
  std::size_t lo = 0;
  std::size_t hi = letters_.size();
  while (hi - lo >= 2 && letters_[lo] == inverse_letter(letters_[hi - 1])) {
    ++lo;
    --hi;
  }
  Word core;
  core.letters_ = letters_.substr(lo, hi - lo);
  Word conjugator;
  conjugator.letters_ = letters_.substr(0, lo);
  return {core, conjugator};
}

bool Word::proper_power() const {
  const std::string core = cyclic_core().first.letters_;
  const std::size_t n = core.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = p; i < n && periodic; ++i) periodic = core[i] == core[i - p];
    if (periodic) return true;
  }
  return false;
}

bool Word::conjugate_to(const Word& other) const {
  const std::string a = cyclic_core().first.letters_;
  const std::string b = other.cyclic_core().first.letters_;
  if (a.size() != b.size()) return false;
  return (a + a).find(b) != std::string::npos;
}

std::size_t common_prefix(const Word& u, const Word& v) {
  const auto& a = u.letters();
  const auto& b = v.letters();
  std::size_t n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

std::int64_t tree_distance(const Word& u, const Word& v) {
  return static_cast<std::int64_t>(u.length() + v.length() - 2 * common_prefix(u, v));
}

std::vector<Word> tree_geodesic(const Word& u, const Word& v) {
  std::size_t c = common_prefix(u, v);
  std::vector<Word> path;
  for (std::size_t len = u.length(); len > c; --len) path.emplace_back(u.letters().substr(0, len));
  for (std::size_t len = c; len <= v.length(); ++len) path.emplace_back(v.letters().substr(0, len));
  return path;
}

namespace {

// Letter i of the infinite ray w w w ... (forward) or w^-1 w^-1 ... (backward).
char ray_letter(const Word& w, std::int64_t i, bool forward) {
  const auto& s = w.letters();
  const auto n = static_cast<std::int64_t>(s.size());
  if (forward) return s[static_cast<std::size_t>(i % n)];
  return inverse_letter(s[static_cast<std::size_t>(n - 1 - (i % n))]);
}

std::size_t ray_prefix(const Word& y, const Word& w, bool forward) {
  const auto& s = y.letters();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ray_letter(w, static_cast<std::int64_t>(i), forward)) ++i;
  return i;
}

Word ray_word(const Word& w, std::int64_t h) {
  std::string letters;
  const bool forward = h >= 0;
  const std::int64_t n = forward ? h : -h;
  letters.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) letters.push_back(ray_letter(w, i, forward));
  return Word(letters);
}

}  // namespace

Axis::Axis(Word word, Word through) : word_(std::move(word)), anchor_(std::move(through)) {
  if (word_.empty() || !word_.cyclically_reduced()) {
    throw Error(ErrorKind::ConfigInvalid,
                "axis word must be nontrivial and cyclically reduced: " + word_.to_string());
  }
  // Normalize the anchor to the shortlex-least element of anchor<w>, which
  // sits at one of the two multiples of |w| bracketing the nearest point to
  // the identity.
  const auto n = static_cast<std::int64_t>(word_.length());
  const std::int64_t h0 = nearest_parameter(Word());
  std::int64_t k_lo = (h0 >= 0) ? h0 / n : -((-h0 + n - 1) / n);
  Word best = anchor_ * word_.power(k_lo);
  Word other = anchor_ * word_.power(k_lo + 1);
  if (other < best) best = other;
  anchor_ = best;
}

Word Axis::point(std::int64_t h) const { return anchor_ * ray_word(word_, h); }

std::optional<std::int64_t> Axis::parameter(const Word& vertex) const {
  Word y = anchor_.inverse() * vertex;
  if (y.empty()) return 0;
  if (ray_prefix(y, word_, true) == y.length()) return static_cast<std::int64_t>(y.length());
  if (ray_prefix(y, word_, false) == y.length()) return -static_cast<std::int64_t>(y.length());
  return std::nullopt;
}

std::int64_t Axis::nearest_parameter(const Word& vertex) const {
  Word y = anchor_.inverse() * vertex;
  auto forward = ray_prefix(y, word_, true);
  if (forward > 0) return static_cast<std::int64_t>(forward);
  return -static_cast<std::int64_t>(ray_prefix(y, word_, false));
}

std::optional<std::pair<std::int64_t, std::int64_t>> Axis::parameters_within(std::int64_t radius) const {
  std::int64_t h0 = nearest_parameter(Word());
  if (static_cast<std::int64_t>(point(h0).length()) > radius) return std::nullopt;
  // |point(h)| = |point(h0)| + |h - h0| in a tree.
  std::int64_t slack = radius - static_cast<std::int64_t>(point(h0).length());
  return std::make_pair(h0 - slack, h0 + slack);
}

Axis Axis::translated(const Word& g) const { return Axis(word_, g * anchor_); }

bool is_geodesic(const WeightedGraph& g, const ExplicitLine& line) {
  const auto& v = line.vertices;
  if (v.empty()) return false;
  Rational arc = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    Rational step = -1;
    for (const auto& a : g.neighbors(v[i - 1])) {
      if (a.to == v[i] && (step < 0 || a.length < step)) step = a.length;
    }
    if (step < 0) return false;
    arc += step;
  }
  return shortest_distance(g, v.front(), v.back()) == arc;
}

FreeTree::FreeTree(int rank, int radius) : rank_(rank), radius_(radius) {
  if (rank < 1 || rank > 26) throw Error(ErrorKind::ConfigInvalid, "free rank out of range");
  if (radius < 0) throw Error(ErrorKind::ConfigInvalid, "negative tree radius");
  expand();
}

std::vector<Word> FreeTree::letters() const {
  std::vector<Word> out;
  for (int i = 0; i < rank_; ++i) {
    out.push_back(Word::generator(i));
    out.push_back(Word::generator(i, true));
  }
  return out;
}

void FreeTree::expand() const {
  if (expanded_) return;
  const auto gens = letters();
  vertices_.push_back(Word());
  index_.emplace(Word().letters(), graph_.add_vertex(Word().to_string()));
  for (std::size_t head = 0; head < vertices_.size(); ++head) {
    const Word current = vertices_[head];
    if (static_cast<int>(current.length()) == radius_) continue;
    for (const auto& g : gens) {
      Word next = current * g;
      if (next.length() <= current.length()) continue;
      auto id = graph_.add_vertex(next.to_string());
      index_.emplace(next.letters(), id);
      graph_.add_edge(index_.at(current.letters()), id);
      vertices_.push_back(std::move(next));
    }
  }
  expanded_ = true;
}

const std::vector<Word>& FreeTree::vertices() const {
  expand();
  return vertices_;
}

const WeightedGraph& FreeTree::graph() const {
  expand();
  return graph_;
}

std::optional<WeightedGraph::Vertex> FreeTree::index(const Word& w) const {
  expand();
  if (auto it = index_.find(w.letters()); it != index_.end()) return it->second;
  return std::nullopt;
}

std::vector<Word> tree_projection(const FreeTree& t, const Axis& target, const Word& source) {
  if (!t.contains(source)) {
    throw Error(ErrorKind::RadiusExceeded, "source " + source.to_string() + " outside tree ball");
  }
  Word foot = target.point(target.nearest_parameter(source));
  if (!t.contains(foot)) {
    throw Error(ErrorKind::RadiusExceeded, "projection " + foot.to_string() + " outside tree ball");
  }
  return {foot};
}

std::vector<std::int64_t> projection_parameters(const Axis& target, const Axis& source) {
  const auto n1 = static_cast<std::int64_t>(target.word().length());
  const auto n2 = static_cast<std::int64_t>(source.word().length());
  const std::int64_t span = static_cast<std::int64_t>(target.anchor().length() + source.anchor().length()) +
                            4 * (n1 + n2) + 4;
  std::set<std::int64_t> params;
  for (std::int64_t s = -span; s <= span; ++s) {
    params.insert(target.nearest_parameter(source.point(s)));
  }
  auto far = [&](std::int64_t s) { return target.nearest_parameter(source.point(s)); };
  if (far(-span) != far(-span - n2) || far(span) != far(span + n2)) {
    throw Error(ErrorKind::RadiusExceeded, "axes are parallel; projection is unbounded");
  }
  return {params.begin(), params.end()};
}

std::vector<Word> tree_projection(const FreeTree& t, const Axis& target, const Axis& source) {
  std::vector<Word> out;
  for (auto h : projection_parameters(target, source)) {
    Word p = target.point(h);
    if (!t.contains(p)) {
      throw Error(ErrorKind::RadiusExceeded, "projection " + p.to_string() + " outside tree ball");
    }
    out.push_back(std::move(p));
  }
  return out;
}

Word random_word(std::mt19937_64& rng, int rank, int radius) {
  const int len = std::uniform_int_distribution<int>(0, radius)(rng);
  std::string s;
  for (int k = 0; k < len; ++k) {
    for (;;) {
      const int pick = std::uniform_int_distribution<int>(0, 2 * rank - 1)(rng);
      const char c = static_cast<char>(pick % 2 == 0 ? 'a' + pick / 2 : 'A' + pick / 2);
      if (!s.empty() && s.back() == inverse_letter(c)) continue;
      s += c;
      break;
    }
  }
  return Word(s);
}

}  // namespace qtlab
