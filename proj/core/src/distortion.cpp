#include "qtlab/distortion.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <boost/functional/hash.hpp>

#include "qtlab/error.hpp"

namespace qtlab {

Matrix Matrix::identity(int n) {
  Matrix m;
  m.n = n;
  m.a.assign(static_cast<std::size_t>(n * n), Rational(0));
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<Rational>>& rows) {
  Matrix m;
  m.n = static_cast<int>(rows.size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != m.n) throw Error(ErrorKind::ConfigInvalid, "matrix is not square");
    m.a.insert(m.a.end(), row.begin(), row.end());
  }
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  Matrix out;
  out.n = n;
  out.a.assign(a.size(), Rational(0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const Rational& x = at(i, k);
      if (x == 0) continue;
      for (int j = 0; j < n; ++j) out.at(i, j) += x * rhs.at(k, j);
    }
  return out;
}

Matrix Matrix::inverse() const {
  Matrix m = *this;
  Matrix inv = identity(n);
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && m.at(p, c) == 0) ++p;
    if (p == n) throw Error(ErrorKind::ConfigInvalid, "singular generator matrix");
    if (p != c) {
      for (int j = 0; j < n; ++j) {
        std::swap(m.at(p, j), m.at(c, j));
        std::swap(inv.at(p, j), inv.at(c, j));
      }
    }
    const Rational pivot = m.at(c, c);
    for (int j = 0; j < n; ++j) {
      m.at(c, j) /= pivot;
      inv.at(c, j) /= pivot;
    }
    for (int i = 0; i < n; ++i) {
      if (i == c || m.at(i, c) == 0) continue;
      const Rational f = m.at(i, c);
      for (int j = 0; j < n; ++j) {
        m.at(i, j) -= f * m.at(c, j);
        inv.at(i, j) -= f * inv.at(c, j);
      }
    }
  }
  return inv;
}

Matrix Matrix::power(std::int64_t k) const {
  Matrix base = k < 0 ? inverse() : *this;
  std::uint64_t e = static_cast<std::uint64_t>(k < 0 ? -k : k);
  Matrix out = identity(n);
  while (e > 0) {
    if (e & 1) out = out * base;
    base = base * base;
    e >>= 1;
  }
  return out;
}

Matrix MatrixGroupPresentation::evaluate(const std::string& word) const {
  Matrix out = Matrix::identity(dimension);
  for (char c : word) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::size_t i = 0;
    while (i < labels.size() && labels[i] != lower) ++i;
    if (i == labels.size()) throw Error(ErrorKind::ConfigInvalid, std::string("unknown generator '") + c + "'");
    out = out * (c == lower ? generators[i] : inverses[i]);
  }
  return out;
}

MatrixGroupPresentation MatrixGroupPresentation::from_config(const Config& cfg, const std::string& name) {
  const std::string sec = "lattice." + name;
  if (!cfg.has(sec)) throw Error(ErrorKind::ConfigInvalid, "missing [" + sec + "]");
  MatrixGroupPresentation p;
  p.name = name;
  p.dimension = static_cast<int>(cfg.get_int(sec, "dimension"));
  if (p.dimension < 1) throw Error(ErrorKind::ConfigInvalid, sec + ": dimension must be positive");
  const Matrix id = Matrix::identity(p.dimension);
  for (const auto& label : cfg.get_strings(sec, "generators")) {
    if (label.size() != 1 || !std::islower(static_cast<unsigned char>(label[0]))) {
      throw Error(ErrorKind::ConfigInvalid, sec + ": generator labels are single lower-case letters");
    }
    Matrix g = Matrix::from_rows(cfg.get_matrix(sec, "matrix." + label));
    if (g.n != p.dimension) throw Error(ErrorKind::ConfigInvalid, sec + ": matrix." + label + " has the wrong size");
    if (g == id) throw Error(ErrorKind::ConfigInvalid, sec + ": generator " + label + " is the identity");
    p.labels.push_back(label[0]);
    p.inverses.push_back(g.inverse());
    p.generators.push_back(std::move(g));
  }
  if (p.generators.empty()) throw Error(ErrorKind::ConfigInvalid, sec + ": no generators");
  return p;
}

std::size_t MatrixKeyHash::operator()(const MatrixKey& k) const { return boost::hash_range(k.entries.begin(), k.entries.end()); }

MatrixKey key_of(const Matrix& m) {
  MatrixKey k;
  k.entries.reserve(2 * m.a.size());
  for (const auto& q : m.a) {
    k.entries.push_back(q.numerator());
    k.entries.push_back(q.denominator());
  }
  return k;
}

std::optional<int> WordBall::length(const Matrix& g) const {
  auto it = table.find(key_of(g));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::size_t default_ball_cap() {
  if (const char* env = std::getenv("QTLAB_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 4000000;
}

WordBall word_ball(const MatrixGroupPresentation& p, int radius, std::size_t cap) {
  if (radius < 0) throw std::invalid_argument("word_ball: negative radius");
  if (cap == 0) cap = default_ball_cap();
  std::vector<const Matrix*> moves;
  for (std::size_t i = 0; i < p.generators.size(); ++i) {
    moves.push_back(&p.generators[i]);
    moves.push_back(&p.inverses[i]);
  }
  WordBall ball;
  ball.radius = radius;
  std::vector<Matrix> frontier{Matrix::identity(p.dimension)};
  ball.table.emplace(key_of(frontier[0]), 0);
  ball.spheres.push_back(1);
  for (int len = 1; len <= radius; ++len) {
    std::vector<Matrix> next;
    for (const auto& g : frontier) {
      for (const Matrix* s : moves) {
        Matrix h = g * *s;
        if (ball.table.emplace(key_of(h), len).second) {
          next.push_back(std::move(h));
          if (ball.table.size() > cap) {
            throw Error(ErrorKind::BallCapExceeded, p.name + ": ball of radius " + std::to_string(radius) +
                                                        " exceeds " + std::to_string(cap) + " elements");
          }
        }
      }
    }
    ball.spheres.push_back(next.size());
    frontier = std::move(next);
  }
  return ball;
}

std::pair<double, double> loglog_fit(const std::vector<std::pair<double, double>>& points) {
  const double m = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (std::log(x) - mx) * (std::log(x) - mx);
    sxy += (std::log(x) - mx) * (std::log(y) - my);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (const auto& [x, y] : points) {
    const double e = std::log(y) - (my + slope * (std::log(x) - mx));
    rss += e * e;
  }
  return {slope, std::sqrt(rss / m)};
}

DistortionProfile distortion_profile(const MatrixGroupPresentation& p, const std::string& element, const WordBall& ball) {
  DistortionProfile prof;
  prof.element = element;
  const Matrix g = p.evaluate(element);
  Matrix gn = g;
  for (std::int64_t n = 1;; ++n) {
    auto len = ball.length(gn);
    if (!len) break;
    prof.rows.push_back({n, *len});
    gn = gn * g;
  }
  Matrix g2k = g;
  for (std::int64_t n = 1; n > 0 && n <= (std::int64_t{1} << 40); n *= 2) {
    auto len = ball.length(g2k);
    if (!len) break;
    prof.dyadic.push_back({n, *len});
    g2k = g2k * g2k;
  }
  if (prof.rows.size() < 3) {
    throw Error(ErrorKind::InsufficientRange, p.name + ": only " + std::to_string(prof.rows.size()) + " powers of " +
                                                  element + " in the ball");
  }
  // Largest decade: [n_max / 10, n_max], or everything when shorter.
  const std::int64_t n_max = prof.rows.back().n;
  prof.fit_from = std::max<std::int64_t>(1, n_max / 10);
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : prof.rows) {
    if (r.n >= prof.fit_from) pts.emplace_back(static_cast<double>(r.n), static_cast<double>(r.length));
  }
  std::tie(prof.exponent, prof.residual) = loglog_fit(pts);
  return prof;
}

nlohmann::json to_json(const WordBall& b) {
  return {{"radius", b.radius}, {"size", b.size()}, {"spheres", b.spheres}};
}

nlohmann::json to_json(const DistortionProfile& p) {
  nlohmann::json j;
  j["element"] = p.element;
  j["exponent"] = p.exponent;
  j["residual"] = p.residual;
  j["fit_from"] = p.fit_from;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : p.rows) j["rows"].push_back({{"n", r.n}, {"length", r.length}});
  j["dyadic"] = nlohmann::json::array();
  std::int64_t k = 0;
  for (const auto& r : p.dyadic) j["dyadic"].push_back({{"k", k++}, {"n", r.n}, {"length", r.length}});
  return j;
}

std::string to_csv(const DistortionProfile& p) {
  std::ostringstream s;
  s << "n,length\n";
  for (const auto& r : p.rows) s << r.n << ',' << r.length << '\n';
  return s.str();
}

}  // namespace qtlab
