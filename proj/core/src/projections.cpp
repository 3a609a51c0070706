#include "qtlab/projections.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "qtlab/error.hpp"

namespace qtlab {

ProjectionFamily::ProjectionFamily(std::vector<Member> members,
                                   std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> projections)
    : members_(std::move(members)), projections_(std::move(projections)) {
  const std::size_t n = members_.size();
  if (projections_.size() != n) throw std::invalid_argument("projection table size mismatch");
  slot_.resize(n);
  table_.resize(n);
  for (std::size_t y = 0; y < n; ++y) {
    if (!members_[y].graph) throw std::invalid_argument("member without graph");
    const WeightedGraph& g = *members_[y].graph;
    if (projections_[y].size() != n) throw std::invalid_argument("projection row size mismatch");
    for (std::size_t x = 0; x < n; ++x) {
      auto& set = projections_[y][x];
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      if (x == y) continue;
      if (set.empty()) {
        throw std::invalid_argument("empty projection pi_" + members_[y].name + "(" + members_[x].name + ")");
      }
      for (auto v : set) {
        if (!g.contains(v)) throw std::invalid_argument("projection vertex outside member " + members_[y].name);
        slot_[y].emplace(v, slot_[y].size());
      }
    }
    const std::size_t m = slot_[y].size();
    table_[y].assign(m * m, kUnreachable);
    for (const auto& [v, i] : slot_[y]) {
      auto dist = distances_from(g, v);
      for (const auto& [w, j] : slot_[y]) table_[y][i * m + j] = dist[w];
    }
  }
}

Rational ProjectionFamily::cached_distance(std::size_t y, WeightedGraph::Vertex a,
                                           WeightedGraph::Vertex b) const {
  const std::size_t m = slot_[y].size();
  Rational d = table_[y][slot_[y].at(a) * m + slot_[y].at(b)];
  if (!reachable(d)) {
    throw Error(ErrorKind::DisconnectedPair, "projection sets in different components of " + members_[y].name);
  }
  return d;
}

Rational ProjectionFamily::diameter_with(std::size_t y, const std::vector<WeightedGraph::Vertex>& a,
                                         const std::vector<WeightedGraph::Vertex>& b) const {
  Rational best = 0;
  auto scan = [&](const std::vector<WeightedGraph::Vertex>& s, const std::vector<WeightedGraph::Vertex>& t) {
    for (auto u : s)
      for (auto v : t)
        if (u < v) best = std::max(best, cached_distance(y, u, v));
  };
  scan(a, a);
  if (&a != &b) {
    scan(b, b);
    for (auto u : a)
      for (auto v : b)
        if (u != v) best = std::max(best, cached_distance(y, u, v));
  }
  return best;
}

Rational ProjectionFamily::projection_distance(std::size_t y, std::size_t x, std::size_t z) const {
  if (y == x || y == z) {
    throw Error(ErrorKind::IndexClash, "d_Y(X,Z) needs Y distinct from X and Z (" + members_[y].name + ")");
  }
  return diameter_with(y, projections_[y][x], projections_[y][z]);
}

Rational ProjectionFamily::member_distance(std::size_t y, WeightedGraph::Vertex a,
                                           WeightedGraph::Vertex b) const {
  return shortest_distance(*members_[y].graph, a, b);
}

Rational ProjectionFamily::extended_distance(std::size_t y, const PointOrMember& x,
                                             const PointOrMember& z) const {
  auto owner = [](const PointOrMember& p) {
    return std::holds_alternative<MemberIndex>(p) ? std::get<MemberIndex>(p).value
                                                  : std::get<MemberPoint>(p).member;
  };
  const std::size_t ox = owner(x);
  const std::size_t oz = owner(z);
  auto is_point_of_y = [&](const PointOrMember& p) {
    return std::holds_alternative<MemberPoint>(p) && std::get<MemberPoint>(p).member == y;
  };
  if ((std::holds_alternative<MemberIndex>(x) && ox == y) ||
      (std::holds_alternative<MemberIndex>(z) && oz == y)) {
    throw Error(ErrorKind::IndexClash, "member " + members_[y].name + " used as its own source");
  }
  const bool x_in = is_point_of_y(x);
  const bool z_in = is_point_of_y(z);
  if (x_in && z_in) {
    return member_distance(y, std::get<MemberPoint>(x).vertex, std::get<MemberPoint>(z).vertex);
  }
  if (!x_in && !z_in) return projection_distance(y, ox, oz);
  // One point inside Y, the other side a different member.
  const WeightedGraph::Vertex inside = x_in ? std::get<MemberPoint>(x).vertex : std::get<MemberPoint>(z).vertex;
  const std::size_t other = x_in ? oz : ox;
  auto dist = distances_from(*members_[y].graph, inside);
  Rational best = 0;
  for (auto v : projections_[y][other]) best = std::max(best, dist[v]);
  return std::max(best, diameter_with(y, projections_[y][other], projections_[y][other]));
}

namespace {

class AxiomChecker {
 public:
  AxiomChecker(const ProjectionFamily& f, std::size_t pair_budget, bool strong)
      : f_(f), n_(f.size()), strong_(strong) {
    for (std::size_t x = 0; x < n_ && pairs_.size() < pair_budget; ++x)
      for (std::size_t z = x + 1; z < n_; ++z) {
        if (pairs_.size() == pair_budget) {
          complete_ = false;
          break;
        }
        pairs_.emplace_back(x, z);
      }
    if (n_ * n_ * n_ <= 8'000'000) {
      cache_.assign(n_ * n_ * n_, kUnreachable);
    }
  }

  bool complete() const { return complete_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }

  Rational d(std::size_t y, std::size_t x, std::size_t z) {
    if (cache_.empty()) return f_.projection_distance(y, x, z);
    if (x > z) std::swap(x, z);
    Rational& slot = cache_[(y * n_ + x) * n_ + z];
    if (!reachable(slot)) slot = f_.projection_distance(y, x, z);
    return slot;
  }

  // Visits every violation at xi; returns false on the first one when
  // `collect` is null.
  bool check(const Rational& xi, std::vector<AxiomViolation>* collect) {
    for (std::size_t y = 0; y < n_; ++y)
      for (std::size_t x = 0; x < n_; ++x) {
        if (x == y) continue;
        Rational diam = d(y, x, x);
        if (diam > xi) {
          if (!collect) return false;
          collect->push_back({"1", y, x, x, diam});
        }
      }
    for (auto [x, z] : pairs_) {
      for (std::size_t y = 0; y < n_; ++y) {
        if (y == x || y == z) continue;
        Rational dy = d(y, x, z);
        if (dy <= xi) continue;
        // The axiom quantifies over ordered triples; test both ends.
        for (auto [a, c] : {std::pair{x, z}, std::pair{z, x}}) {
          Rational da = d(a, y, c);
          if (da > xi) {
            if (!collect) return false;
            collect->push_back({"2", y, a, c, da});
          }
          if (strong_ && f_.projection(a, y) != f_.projection(a, c)) {
            if (!collect) return false;
            collect->push_back({"strong", y, a, c, dy});
          }
        }
      }
    }
    return true;
  }

  std::vector<Rational> candidates() {
    std::set<Rational> values{Rational(0)};
    for (std::size_t y = 0; y < n_; ++y)
      for (std::size_t x = 0; x < n_; ++x)
        if (x != y) values.insert(d(y, x, x));
    for (auto [x, z] : pairs_)
      for (std::size_t y = 0; y < n_; ++y)
        if (y != x && y != z) values.insert(d(y, x, z));
    return {values.begin(), values.end()};
  }

 private:
  const ProjectionFamily& f_;
  std::size_t n_;
  bool strong_;
  bool complete_ = true;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<Rational> cache_;
};

AxiomReport run_checks(const ProjectionFamily& f, const Rational& xi, std::size_t pair_budget, bool strong) {
  AxiomChecker checker(f, pair_budget, strong);
  AxiomReport report;
  report.strong = strong;
  report.xi = xi;
  report.members = f.size();
  report.complete = checker.complete();
  report.pairs_checked = checker.pairs().size();
  report.triples_checked = checker.pairs().size() * (f.size() >= 2 ? f.size() - 2 : 0);

  checker.check(xi, &report.violations);
  std::sort(report.violations.begin(), report.violations.end());
  report.pass = report.violations.empty();

  // Least passing candidate; validity is monotone in xi.
  auto values = checker.candidates();
  std::size_t lo = 0;
  std::size_t hi = values.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (checker.check(values[mid], nullptr)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  report.xi_witnessed = values[lo];

  for (auto [x, z] : checker.pairs()) {
    std::size_t count = 0;
    for (std::size_t y = 0; y < f.size(); ++y) {
      if (y != x && y != z && checker.d(y, x, z) > xi) ++count;
    }
    report.axiom3_max = std::max(report.axiom3_max, count);
    ++report.axiom3_histogram[count];
  }
  return report;
}

}  // namespace

AxiomReport verify_axioms(const ProjectionFamily& f, const Rational& xi, std::size_t pair_budget) {
  return run_checks(f, xi, pair_budget, false);
}

AxiomReport check_strong_axioms(const ProjectionFamily& f, const Rational& xi, std::size_t pair_budget) {
  return run_checks(f, xi, pair_budget, true);
}

ProjectionFamily pushforward_family(const ProjectionFamily& base,
                                    std::vector<std::shared_ptr<const WeightedGraph>> targets,
                                    const std::vector<std::vector<WeightedGraph::Vertex>>& maps,
                                    const Rational& lipschitz) {
  const std::size_t n = base.size();
  if (targets.size() != n || maps.size() != n) throw std::invalid_argument("pushforward: size mismatch");
  std::vector<ProjectionFamily::Member> members;
  for (std::size_t y = 0; y < n; ++y) {
    const WeightedGraph& source = *base.member(y).graph;
    const WeightedGraph& target = *targets[y];
    if (maps[y].size() != source.vertex_count()) throw std::invalid_argument("pushforward: map size");
    for (WeightedGraph::Vertex u = 0; u < source.vertex_count(); ++u) {
      if (source.neighbors(u).empty()) continue;
      auto dist = distances_from(target, maps[y][u]);
      for (const auto& arc : source.neighbors(u)) {
        const Rational& image = dist[maps[y][arc.to]];
        if (!reachable(image) || image > lipschitz * arc.length) {
          throw Error(ErrorKind::LipschitzViolation,
                      "member " + base.member(y).name + " edge " + source.label(u) + "-" +
                          source.label(arc.to) + " maps to length " +
                          (reachable(image) ? to_string(image) : std::string("inf")));
        }
      }
    }
    members.push_back({base.member(y).name, targets[y]});
  }
  std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> projections(
      n, std::vector<std::vector<WeightedGraph::Vertex>>(n));
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      if (x == y) continue;
      for (auto v : base.projection(y, x)) projections[y][x].push_back(maps[y][v]);
    }
  return ProjectionFamily(std::move(members), std::move(projections));
}

nlohmann::json to_json(const ProjectionFamily& f) {
  nlohmann::json j;
  j["members"] = nlohmann::json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    j["members"].push_back({{"name", f.member(i).name}, {"graph", to_text(*f.member(i).graph)}});
  }
  j["projections"] = nlohmann::json::array();
  for (std::size_t y = 0; y < f.size(); ++y)
    for (std::size_t x = 0; x < f.size(); ++x) {
      if (x == y) continue;
      nlohmann::json ids = nlohmann::json::array();
      for (auto v : f.projection(y, x)) ids.push_back(f.member(y).graph->label(v));
      j["projections"].push_back({{"target", y}, {"source", x}, {"vertices", ids}});
    }
  return j;
}

ProjectionFamily family_from_json(const nlohmann::json& j) {
  std::vector<ProjectionFamily::Member> members;
  for (const auto& m : j.at("members")) {
    members.push_back({m.at("name").get<std::string>(),
                       std::make_shared<const WeightedGraph>(from_text(m.at("graph").get<std::string>()))});
  }
  const std::size_t n = members.size();
  std::vector<std::vector<std::vector<WeightedGraph::Vertex>>> projections(
      n, std::vector<std::vector<WeightedGraph::Vertex>>(n));
  for (const auto& row : j.at("projections")) {
    auto y = row.at("target").get<std::size_t>();
    auto x = row.at("source").get<std::size_t>();
    if (y >= n || x >= n) throw Error(ErrorKind::ParseError, "projection index out of range");
    for (const auto& id : row.at("vertices")) {
      auto v = members[y].graph->find(id.get<std::string>());
      if (!v) throw Error(ErrorKind::ParseError, "unknown vertex " + id.get<std::string>());
      projections[y][x].push_back(*v);
    }
  }
  return ProjectionFamily(std::move(members), std::move(projections));
}

nlohmann::json to_json(const AxiomReport& r) {
  nlohmann::json j;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["strong"] = r.strong;
  j["complete"] = r.complete;
  j["xi"] = to_string(r.xi);
  j["xi_witnessed"] = to_string(r.xi_witnessed);
  j["members"] = r.members;
  j["pairs_checked"] = r.pairs_checked;
  j["triples_checked"] = r.triples_checked;
  j["axiom3_max"] = r.axiom3_max;
  nlohmann::json hist = nlohmann::json::array();
  for (auto [count, pairs] : r.axiom3_histogram) hist.push_back({{"count", count}, {"pairs", pairs}});
  j["axiom3_profile"] = hist;
  nlohmann::json v = nlohmann::json::array();
  for (const auto& w : r.violations) {
    v.push_back({{"axiom", w.axiom}, {"y", w.y}, {"x", w.x}, {"z", w.z}, {"value", to_string(w.value)}});
  }
  j["violations"] = v;
  return j;
}

}  // namespace qtlab
