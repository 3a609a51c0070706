#include "qtlab/scenario.hpp"

#include <filesystem>

#include "qtlab/coned_off.hpp"
#include "qtlab/error.hpp"

namespace qtlab {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Cka: return "cka";
    case ScenarioKind::Relhyp: return "relhyp";
    case ScenarioKind::Lattice: return "lattice";
    case ScenarioKind::Family: return "family";
  }
  return "cka";
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

ScenarioKind parse_kind(const std::string& s) {
  if (s == "cka") return ScenarioKind::Cka;
  if (s == "relhyp") return ScenarioKind::Relhyp;
  if (s == "lattice") return ScenarioKind::Lattice;
  if (s == "family") return ScenarioKind::Family;
  throw Error(ErrorKind::ConfigInvalid, "[scenario] kind must be cka, relhyp, lattice or family, got '" + s + "'");
}

int positive_int(const Config& cfg, const std::string& sec, const std::string& key, std::int64_t fallback) {
  const std::int64_t v = cfg.get_int_or(sec, key, fallback);
  if (v < 0) throw Error(ErrorKind::ConfigInvalid, "[" + sec + "] " + key + " must be non-negative");
  return static_cast<int>(v);
}

std::vector<Word> words_of(const Config& cfg, const std::string& sec, const std::string& key) {
  std::vector<Word> out;
  for (const auto& w : cfg.get_strings(sec, key)) out.emplace_back(w);
  return out;
}

}  // namespace

Scenario Scenario::parse(const std::string& text, const std::string& fallback_name) {
  Scenario s;
  s.config = Config::parse(text);
  s.hash = fnv1a(text);
  const Config& cfg = s.config;
  if (!cfg.has("scenario")) throw Error(ErrorKind::ConfigInvalid, "missing [scenario] section");
  s.name = cfg.get_string_or("scenario", "name", fallback_name);
  s.kind = parse_kind(cfg.get_string("scenario", "kind"));
  if (cfg.has("scenario", "K")) s.K = cfg.get_rational("scenario", "K");
  s.r = cfg.get_rational_or("scenario", "r", Rational(1));
  if (s.r <= 0) throw Error(ErrorKind::ConfigInvalid, "[scenario] r must be positive");
  s.samples = static_cast<std::size_t>(positive_int(cfg, "scenario", "samples", 200));
  s.seed = static_cast<std::uint64_t>(cfg.get_int_or("scenario", "seed", 1));
  s.fiber_span = cfg.get_int_or("scenario", "fiber_span", 4);

  switch (s.kind) {
    case ScenarioKind::Cka: {
      s.window.center = cfg.get_string_or("scenario", "center", "");
      s.window.R_bs = positive_int(cfg, "scenario", "R_bs", 2);
      s.window.R_tree = positive_int(cfg, "scenario", "R_tree", 3);
      s.window.W = positive_int(cfg, "scenario", "W", 8);
      s.window.R_child = positive_int(cfg, "scenario", "R_child", 1);
      // Validates the graph of groups now so a broken file fails early.
      const auto gog = GraphOfGroupsConfig::from_config(cfg);
      if (!s.window.center.empty()) gog.vertex_index(s.window.center);
      for (const auto& id : cfg.subsections("quasi_lines")) {
        gog.vertex_index(id);
        s.quasi_lines[id] = words_of(cfg, "quasi_lines." + id, "words");
      }
      break;
    }
    case ScenarioKind::Relhyp: {
      s.radius = positive_int(cfg, "scenario", "radius", 10);
      if (cfg.has("scenario", "K_grid")) s.K_grid = cfg.get_rationals("scenario", "K_grid");
      RelativePresentation::from_config(cfg);
      break;
    }
    case ScenarioKind::Lattice: {
      for (const auto& name : cfg.subsections("lattice")) {
        const std::string sec = "lattice." + name;
        LatticeSpec l;
        l.name = name;
        l.element = cfg.get_string(sec, "element");
        l.radius = positive_int(cfg, sec, "radius", 8);
        auto dbl = [&](const char* key) -> std::optional<double> {
          if (!cfg.has(sec, key)) return std::nullopt;
          return to_double(cfg.get_rational(sec, key));
        };
        l.exponent_min = dbl("exponent_min");
        l.exponent_max = dbl("exponent_max");
        l.exponent_exact = dbl("exponent_exact");
        if (cfg.has(sec, "dyadic_slope")) l.dyadic_slope = cfg.get_int(sec, "dyadic_slope");
        s.lattices.push_back(std::move(l));
      }
      if (s.lattices.empty()) throw Error(ErrorKind::ConfigInvalid, "lattice scenario without [lattice.<name>]");
      break;
    }
    case ScenarioKind::Family: {
      if (!cfg.has("family")) throw Error(ErrorKind::ConfigInvalid, "missing [family] section");
      s.rank = positive_int(cfg, "family", "rank", 2);
      s.words = words_of(cfg, "family", "words");
      if (s.words.empty()) throw Error(ErrorKind::ConfigInvalid, "[family] words is empty");
      s.member_radius = positive_int(cfg, "family", "member_radius", 4);
      s.radius = positive_int(cfg, "family", "radius", 8);
      if (cfg.has("family", "xi")) s.xi = cfg.get_rational("family", "xi");
      break;
    }
  }
  return s;
}

Scenario Scenario::load(const std::string& path) {
  Config probe = Config::load(path);
  return parse(probe.source(), std::filesystem::path(path).stem().string());
}

void apply(Scenario& s, const Overrides& o) {
  if (o.K) s.K = *o.K;
  if (o.r) {
    if (*o.r <= 0) throw Error(ErrorKind::ConfigInvalid, "--r must be positive");
    s.r = *o.r;
  }
  if (o.window) s.window.W = *o.window;
  if (o.samples) s.samples = *o.samples;
  if (o.seed) s.seed = *o.seed;
}

}  // namespace qtlab
