#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtlab/cka.hpp"
#include "qtlab/config.hpp"
#include "qtlab/rational.hpp"

namespace qtlab {

enum class ScenarioKind { Cka, Relhyp, Lattice, Family };

const char* to_string(ScenarioKind k);

/// Distortion expectations read from `[lattice.<name>]`.
struct LatticeSpec {
  std::string name;
  std::string element;
  int radius = 8;
  std::optional<double> exponent_min;
  std::optional<double> exponent_max;
  std::optional<double> exponent_exact;
  std::optional<std::int64_t> dyadic_slope;  // |g^(2^k)| <= slope k + slope
};

/// A parsed scenario file: the `[scenario]` parameters plus the raw config
/// that the module readers consume.
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::Cka;
  Config config;
  std::uint64_t hash = 0;  // FNV-1a of the source text

  std::optional<Rational> K;  // default: 4 max(xi, 1)
  Rational r{1};
  WindowParams window;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  std::int64_t fiber_span = 4;
  std::map<std::string, std::vector<Word>> quasi_lines;  // vertex id -> words

  // relhyp
  int radius = 10;
  std::vector<Rational> K_grid{Rational(4), Rational(6), Rational(8)};

  // lattice
  std::vector<LatticeSpec> lattices;

  // family
  int rank = 2;
  std::vector<Word> words;
  int member_radius = 4;
  std::optional<Rational> xi;

  /// Throws ConfigInvalid for missing or inconsistent sections.
  static Scenario parse(const std::string& text, const std::string& fallback_name = "scenario");
  static Scenario load(const std::string& path);
};

struct Overrides {
  std::optional<Rational> K;
  std::optional<Rational> r;
  std::optional<int> window;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
};

void apply(Scenario& s, const Overrides& o);

std::uint64_t fnv1a(const std::string& text);

}  // namespace qtlab
