#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "qtlab/config.hpp"
#include "qtlab/rational.hpp"

namespace qtlab {

/// Square matrix with exact rational entries, row-major.
struct Matrix {
  int n = 0;
  std::vector<Rational> a;

  static Matrix identity(int n);
  static Matrix from_rows(const std::vector<std::vector<Rational>>& rows);
  const Rational& at(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
  Rational& at(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  Matrix operator*(const Matrix& rhs) const;
  /// Throws ConfigInvalid when singular.
  Matrix inverse() const;
  Matrix power(std::int64_t k) const;
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Generators labelled by lower-case letters; the upper-case letter is the
/// inverse, added automatically.
struct MatrixGroupPresentation {
  std::string name;
  int dimension = 0;
  std::vector<char> labels;
  std::vector<Matrix> generators;  // as listed
  std::vector<Matrix> inverses;

  /// Product of a word over the labels (upper case = inverse).
  Matrix evaluate(const std::string& word) const;

  /// `[lattice.<name>]`: dimension, generators = ["x", ...], matrix.<label>.
  static MatrixGroupPresentation from_config(const Config& cfg, const std::string& name);
};

/// Exact-entry key of a matrix, used for hashing.
struct MatrixKey {
  std::vector<std::int64_t> entries;  // numerator, denominator, ...
  friend bool operator==(const MatrixKey&, const MatrixKey&) = default;
};
struct MatrixKeyHash {
  std::size_t operator()(const MatrixKey& k) const;
};
MatrixKey key_of(const Matrix& m);

struct WordBall {
  int radius = 0;
  std::unordered_map<MatrixKey, int, MatrixKeyHash> table;
  std::vector<std::size_t> spheres;  // element count per length

  std::optional<int> length(const Matrix& g) const;
  std::size_t size() const { return table.size(); }
};

/// QTLAB_CAP from the environment, else 4,000,000.
std::size_t default_ball_cap();

/// Exact word lengths up to `radius` by breadth-first search. Throws
/// BallCapExceeded once the ball outgrows `cap` (default_ball_cap when 0).
WordBall word_ball(const MatrixGroupPresentation& p, int radius, std::size_t cap = 0);

struct DistortionRow {
  std::int64_t n = 0;
  int length = 0;
};

struct DistortionProfile {
  std::string element;
  std::vector<DistortionRow> rows;     // n = 1, 2, ... while g^n is in the ball
  std::vector<DistortionRow> dyadic;   // n = 2^k in the ball
  double exponent = 0;                 // log-log least squares slope
  double residual = 0;                 // rms of the fit
  std::int64_t fit_from = 0;           // fit range [fit_from, rows.back().n]
};

/// Rows n -> |g^n| and the fitted growth exponent over the largest decade
/// available. Throws InsufficientRange with fewer than three rows.
DistortionProfile distortion_profile(const MatrixGroupPresentation& p, const std::string& element, const WordBall& ball);

/// Least-squares slope and rms residual of log y against log x.
std::pair<double, double> loglog_fit(const std::vector<std::pair<double, double>>& points);

nlohmann::json to_json(const WordBall& b);
nlohmann::json to_json(const DistortionProfile& p);
std::string to_csv(const DistortionProfile& p);

}  // namespace qtlab
