#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <random>

#include "qtlab/distortion.hpp"
#include "support.hpp"

using namespace qtlab;

namespace {

MatrixGroupPresentation lattice(const std::string& scenario) {
  const Scenario s = qtlab::testing::scenario(scenario);
  return MatrixGroupPresentation::from_config(s.config, scenario);
}

// Heisenberg group as integer triples, (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')
using H = std::array<std::int64_t, 3>;
H hmul(const H& u, const H& v) { return {u[0] + v[0], u[1] + v[1], u[2] + v[2] + u[0] * v[1]}; }

std::map<H, int> heisenberg_bfs(int radius) {
  const std::array<H, 4> gens{H{1, 0, 0}, H{-1, 0, 0}, H{0, 1, 0}, H{0, -1, 0}};
  std::map<H, int> len{{H{0, 0, 0}, 0}};
  std::deque<H> q{H{0, 0, 0}};
  while (!q.empty()) {
    const H u = q.front();
    q.pop_front();
    if (len[u] == radius) continue;
    for (const auto& g : gens) {
      const H v = hmul(u, g);
      if (len.emplace(v, len[u] + 1).second) q.push_back(v);
    }
  }
  return len;
}

}  // namespace

TEST(Matrix, InversePowerAndIdentity) {
  const auto m = Matrix::from_rows({{2, 1}, {1, 1}});
  EXPECT_EQ(m * m.inverse(), Matrix::identity(2));
  EXPECT_EQ(m.power(3), m * m * m);
  EXPECT_EQ(m.power(-2), m.inverse() * m.inverse());
  EXPECT_EQ(m.power(0), Matrix::identity(2));
  const auto half = Matrix::from_rows({{2, 0}, {0, 1}}).inverse();
  EXPECT_EQ(half.at(0, 0), Rational(1, 2));
}

TEST(Matrix, SingularIsConfigInvalid) {
  const auto m = Matrix::from_rows({{1, 2}, {2, 4}});
  EXPECT_EQ(qtlab::testing::kind_of([&] { m.inverse(); }), ErrorKind::ConfigInvalid);
}

TEST(Presentation, UpperCaseIsInverse) {
  const auto p = lattice("heisenberg");
  EXPECT_EQ(p.evaluate("xX"), Matrix::identity(3));
  EXPECT_EQ(p.evaluate("Yy"), Matrix::identity(3));
  EXPECT_EQ(p.evaluate("xy"), p.generators[0] * p.generators[1]);
  EXPECT_EQ(p.evaluate(""), Matrix::identity(3));
}

TEST(WordBall, RadiusZeroIsTheIdentity) {
  const auto p = lattice("z2");
  const auto b = word_ball(p, 0);
  EXPECT_EQ(b.size(), 1u);
  EXPECT_EQ(b.length(Matrix::identity(3)), 0);
  EXPECT_FALSE(b.length(p.generators[0]).has_value());
  EXPECT_EQ(qtlab::testing::kind_of([&] { distortion_profile(p, "a", b); }), ErrorKind::InsufficientRange);
}

TEST(WordBall, Z2IsL1) {
  const auto p = lattice("z2");
  const int R = 5;
  const auto b = word_ball(p, R);
  EXPECT_EQ(b.size(), static_cast<std::size_t>(2 * R * R + 2 * R + 1));
  ASSERT_EQ(b.spheres.size(), static_cast<std::size_t>(R + 1));
  EXPECT_EQ(b.spheres[0], 1u);
  for (int k = 1; k <= R; ++k) EXPECT_EQ(b.spheres[static_cast<std::size_t>(k)], static_cast<std::size_t>(4 * k));
  for (int i = -R; i <= R; ++i)
    for (int j = -R; j <= R; ++j) {
      const auto g = p.generators[0].power(i) * p.generators[1].power(j);
      const auto len = b.length(g);
      if (std::abs(i) + std::abs(j) <= R) {
        EXPECT_EQ(len, std::abs(i) + std::abs(j)) << i << "," << j;
      } else {
        EXPECT_FALSE(len.has_value());
      }
    }
}

TEST(WordBall, HeisenbergAgainstTripleBfs) {
  const auto p = lattice("heisenberg");
  const int R = 7;
  const auto b = word_ball(p, R);
  const auto oracle = heisenberg_bfs(R);
  EXPECT_EQ(b.size(), oracle.size());
  const auto& x = p.generators[0];
  const auto& y = p.generators[1];
  // (a, b, c) = x^a y^b z^(c - ab) with z = xyXY = (0, 0, 1)
  const auto z = p.evaluate("xyXY");
  for (const auto& [h, len] : oracle) {
    const auto g = x.power(h[0]) * y.power(h[1]) * z.power(h[2] - h[0] * h[1]);
    EXPECT_EQ(b.length(g), len) << h[0] << " " << h[1] << " " << h[2];
  }
}

TEST(WordBall, CommutatorLengths) {
  const auto p = lattice("heisenberg");
  const auto b = word_ball(p, 6);
  const auto z = p.evaluate("xyXY");
  EXPECT_EQ(b.length(z), 4);
  EXPECT_EQ(b.length(z * z), 6);
}

TEST(WordBall, Subadditive) {
  const auto p = lattice("bs12");
  const auto b = word_ball(p, 8);
  std::mt19937_64 rng(4);
  const std::string letters = "aAtT";
  for (int t = 0; t < 300; ++t) {
    std::string u, v;
    for (std::size_t k = rng() % 5; k > 0; --k) u += letters[rng() % 4];
    for (std::size_t k = rng() % 4; k > 0; --k) v += letters[rng() % 4];
    const auto lu = b.length(p.evaluate(u));
    const auto lv = b.length(p.evaluate(v));
    const auto luv = b.length(p.evaluate(u + v));
    ASSERT_TRUE(lu && lv && luv);
    EXPECT_LE(*lu, static_cast<int>(u.size()));
    EXPECT_LE(*luv, *lu + *lv);
  }
}

TEST(WordBall, CapExceeded) {
  const auto p = lattice("sol");
  EXPECT_EQ(qtlab::testing::kind_of([&] { word_ball(p, 10, 500); }), ErrorKind::BallCapExceeded);
}

TEST(LogLogFit, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pts;
  for (int n = 1; n <= 20; ++n) pts.emplace_back(n, 3.0 * n * n);
  const auto [slope, residual] = loglog_fit(pts);
  EXPECT_NEAR(slope, 2.0, 1e-12);
  EXPECT_NEAR(residual, 0.0, 1e-12);
}

TEST(Distortion, AbelianIsLinear) {
  const auto p = lattice("z2");
  const auto b = word_ball(p, 40);
  const auto prof = distortion_profile(p, "a", b);
  ASSERT_EQ(prof.rows.size(), 40u);
  for (const auto& r : prof.rows) EXPECT_EQ(r.length, r.n);
  EXPECT_NEAR(prof.exponent, 1.0, 1e-9);
  EXPECT_EQ(prof.fit_from, 4);
}

TEST(Distortion, PowersAreSubadditive) {
  const auto p = lattice("heisenberg");
  const auto b = word_ball(p, 10);
  const auto prof = distortion_profile(p, "xyXY", b);
  for (std::size_t i = 0; i < prof.rows.size(); ++i)
    for (std::size_t j = 0; i + j + 1 < prof.rows.size(); ++j)
      EXPECT_LE(prof.rows[i + j + 1].length, prof.rows[i].length + prof.rows[j].length);
}

TEST(Distortion, HeisenbergCentreIsSquareRoot) {
  const auto p = lattice("heisenberg");
  const auto b = word_ball(p, 12);
  const auto prof = distortion_profile(p, "xyXY", b);
  EXPECT_GE(prof.exponent, 0.4);
  EXPECT_LE(prof.exponent, 0.6);
}

TEST(Distortion, BaumslagSolitarDyadic) {
  const auto p = lattice("bs12");
  const auto b = word_ball(p, 14);
  const auto prof = distortion_profile(p, "a", b);
  ASSERT_GE(prof.dyadic.size(), 5u);
  for (std::size_t k = 0; k < prof.dyadic.size(); ++k) {
    EXPECT_EQ(prof.dyadic[k].n, std::int64_t{1} << k);
    // t^k a t^-k
    EXPECT_LE(prof.dyadic[k].length, static_cast<int>(2 * k + 1));
    EXPECT_LE(prof.dyadic[k].length, static_cast<int>(3 * k + 3));
  }
}

// Exponential distortion should show as a small fitted slope. At radius 12
// the fit is still dominated by short powers; this is expected to fail.
TEST(Distortion, SolFiberIsSublinear) {
  const auto p = lattice("sol");
  const auto b = word_ball(p, 12);
  const auto prof = distortion_profile(p, "a", b);
  EXPECT_LE(prof.exponent, 0.6);
}

TEST(Distortion, CsvAndJson) {
  const auto p = lattice("z2");
  const auto b = word_ball(p, 12);
  const auto prof = distortion_profile(p, "a", b);
  const std::string csv = to_csv(prof);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), prof.rows.size() + 1);
  const auto j = to_json(prof);
  EXPECT_EQ(j["rows"].size(), prof.rows.size());
  EXPECT_EQ(j["dyadic"].size(), prof.dyadic.size());
  EXPECT_EQ(to_json(b)["size"], b.size());
}
