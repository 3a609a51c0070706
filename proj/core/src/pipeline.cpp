#include "qtlab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "qtlab/coned_off.hpp"
#include "qtlab/distortion.hpp"
#include "qtlab/embedding.hpp"
#include "qtlab/error.hpp"
#include "qtlab/families.hpp"
#include "qtlab/quasi_tree.hpp"

namespace qtlab {

const std::vector<std::string>& commands() {
  static const std::vector<std::string> all{"check-axioms",   "build-quasitree",  "special-path", "verify-fibers",
                                            "verify-coneoff", "verify-embedding", "distortion",   "all"};
  return all;
}

std::vector<std::string> applicable_commands(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Family: return {"check-axioms", "build-quasitree"};
    case ScenarioKind::Cka:
      return {"check-axioms", "build-quasitree", "special-path", "verify-fibers", "verify-coneoff", "verify-embedding"};
    case ScenarioKind::Relhyp: return {"verify-coneoff"};
    case ScenarioKind::Lattice: return {"distortion"};
  }
  return {};
}

namespace {

using Pairs = std::vector<std::pair<PiecePoint, PiecePoint>>;

void check(StepOutput& out, bool ok, const std::string& what) {
  out.checks.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
  out.pass = out.pass && ok;
}

std::string q(const Rational& x) { return to_string(x); }

double rel_drift(const Rational& a, const Rational& b) {
  return std::abs(to_double(b) - to_double(a)) / to_double(a);
}

nlohmann::json provenance(const Scenario& s) {
  nlohmann::json j{{"scenario", s.name}, {"kind", to_string(s.kind)}, {"seed", s.seed}, {"samples", s.samples}};
  if (s.kind == ScenarioKind::Cka) {
    j["window"] = {{"R_bs", s.window.R_bs}, {"R_tree", s.window.R_tree}, {"W", s.window.W}, {"r", q(s.r)}};
  }
  return j;
}

WindowParams doubled(const WindowParams& p) {
  WindowParams d = p;
  d.W = 2 * p.W;
  return d;
}

/// Fitted mu: least mu >= 1 with length <= mu (oracle + 1) on every pair.
struct MuFit {
  Rational mu{1};
  std::size_t shorter_than_oracle = 0;  // special path shorter than a geodesic
  std::size_t violations = 0;           // length > mu oracle + mu
  std::vector<std::pair<Rational, Rational>> rows;  // (length, oracle)
};

MuFit fit_mu(const CKAWindow& win, const Pairs& pairs) {
  MuFit f;
  for (const auto& [x, y] : pairs) {
    const Rational len = path_components(special_path(win, x, y)).l1;
    const Rational d = win.oracle().distance(x, y);
    f.rows.emplace_back(len, d);
    f.mu = std::max(f.mu, len / (d + 1));
    if (len < d) ++f.shorter_than_oracle;
  }
  for (const auto& [len, d] : f.rows) {
    if (len > f.mu * d + f.mu) ++f.violations;
  }
  return f;
}

nlohmann::json to_json(const MuFit& f) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [len, d] : f.rows) rows.push_back({{"length", q(len)}, {"oracle", q(d)}});
  return {{"mu", q(f.mu)},
          {"mu_value", to_double(f.mu)},
          {"violations", f.violations},
          {"shorter_than_oracle", f.shorter_than_oracle},
          {"pairs", f.rows.size()},
          {"rows", rows}};
}

std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>> carrier_pairs(const QuasiTreeOfSpaces& qt,
                                                                                   std::size_t count,
                                                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = qt.carrier.vertex_count();
  std::vector<std::pair<WeightedGraph::Vertex, WeightedGraph::Vertex>> out;
  if (n < 2) return out;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (out.size() < count) {
    const auto a = static_cast<WeightedGraph::Vertex>(pick(rng));
    const auto b = static_cast<WeightedGraph::Vertex>(pick(rng));
    if (a != b) out.emplace_back(a, b);
  }
  return out;
}

/// The formula check of one family at K = 4 xi (or the scenario K), run only
/// when the strong axioms hold at xi.
void quasitree_step(StepOutput& out, const Scenario& s, const std::string& label,
                    std::shared_ptr<const ProjectionFamily> fam, const Rational& xi) {
  const Rational K = s.K ? *s.K : 4 * std::max(xi, Rational(1));
  const AxiomReport strong = check_strong_axioms(*fam, xi);
  const QuasiTreeOfSpaces qt = build_quasi_tree(fam, K);
  Report rep;
  rep.name = "quasitree_" + label;
  rep.json = provenance(s);
  rep.json["xi"] = q(xi);
  rep.json["K"] = q(K);
  rep.json["members"] = fam->size();
  rep.json["carrier_vertices"] = qt.carrier.vertex_count();
  rep.json["bridged_pairs"] = qt.bridged_pairs.size();
  rep.json["bridge_edges"] = qt.bridge_edges;
  rep.json["warnings"] = qt.warnings;
  rep.json["strong_axioms"] = strong.pass;
  rep.dot = qt.to_dot();
  if (strong.pass) {
    const std::size_t n = std::max<std::size_t>(s.samples, 200);
    const FormulaReport fr = validate_distance_formula(qt, carrier_pairs(qt, n, s.seed));
    rep.json["formula"] = {{"pairs", fr.rows.size()},
                           {"lower_failures", fr.lower_failures},
                           {"upper_failures", fr.upper_failures},
                           {"worst_margin", q(fr.worst_margin())}};
    rep.csv = fr.to_csv(qt.carrier);
    check(out, fr.pass(), label + ": distance formula holds on " + std::to_string(fr.rows.size()) + " pairs at K=" +
                              q(K) + " (" + std::to_string(fr.lower_failures + fr.upper_failures) + " failures)");
  } else {
    rep.json["formula"] = "skipped: strong axioms fail at xi";
    out.checks.push_back("SKIP " + label + ": strong axioms fail at xi=" + q(xi) + ", formula not applicable");
  }
  out.reports.push_back(std::move(rep));
}

// ---------------------------------------------------------------------------

StepOutput check_axioms(const Scenario& s) {
  StepOutput out;
  if (s.kind == ScenarioKind::Family) {
    const AxisFamily af = build_axis_family(s.rank, s.words, s.member_radius, s.radius);
    Rational xi = s.xi ? *s.xi : verify_axioms(*af.family, Rational(0)).xi_witnessed;
    const AxiomReport ar = verify_axioms(*af.family, xi);
    Report rep{"axioms", to_json(ar), std::nullopt, std::nullopt};
    rep.json["provenance"] = provenance(s);
    out.reports.push_back(std::move(rep));
    check(out, ar.pass, "projection axioms at xi=" + q(xi) + " on " + std::to_string(ar.members) +
                            " members (xi_witnessed=" + q(ar.xi_witnessed) + ")");
    return out;
  }
  const auto gog = GraphOfGroupsConfig::from_config(s.config);
  const CKAWindow win(gog, s.window);
  const FiberFamily fam = build_fiber_family(win, s.r);
  const Rational xi = verify_fiber_axioms(fam, Rational(1000)).xi_witnessed();
  for (int c = 1; c <= 2; ++c) {
    const AxiomReport ar = verify_axioms(fam.of_class(c), xi);
    Report rep{"axioms_class" + std::to_string(c), to_json(ar), std::nullopt, std::nullopt};
    rep.json["provenance"] = provenance(s);
    out.reports.push_back(std::move(rep));
    check(out, ar.pass, "class " + std::to_string(c) + " fiber-line axioms at xi=" + q(xi));
  }
  return out;
}

StepOutput build_quasitree_cmd(const Scenario& s) {
  StepOutput out;
  if (s.kind == ScenarioKind::Family) {
    const AxisFamily af = build_axis_family(s.rank, s.words, s.member_radius, s.radius);
    const Rational xi = s.xi ? *s.xi : verify_axioms(*af.family, Rational(0)).xi_witnessed;
    quasitree_step(out, s, "family", af.family, xi);
    return out;
  }
  const auto gog = GraphOfGroupsConfig::from_config(s.config);
  const CKAWindow win(gog, s.window);
  const FiberFamily fam = build_fiber_family(win, s.r);
  const Rational xi = verify_fiber_axioms(fam, Rational(1000)).xi_witnessed();
  for (int c = 1; c <= 2; ++c) quasitree_step(out, s, "class" + std::to_string(c), fam.family[c - 1], xi);
  return out;
}

StepOutput special_path_cmd(const Scenario& s) {
  StepOutput out;
  const auto gog = GraphOfGroupsConfig::from_config(s.config);
  const CKAWindow base(gog, s.window);
  const CKAWindow big(gog, doubled(s.window));
  const Pairs pairs = clean_pairs(base, std::max<std::size_t>(s.samples, 100), s.seed, s.fiber_span);
  const MuFit f0 = fit_mu(base, pairs);
  const MuFit f1 = fit_mu(big, pairs);
  const double drift = rel_drift(f0.mu, f1.mu);
  Report rep;
  rep.name = "special_path";
  rep.json = provenance(s);
  rep.json["base"] = to_json(f0);
  rep.json["doubled"] = to_json(f1);
  rep.json["drift"] = drift;
  std::ostringstream csv;
  csv << "pair,length,oracle_W,oracle_2W\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    csv << i << ',' << q(f0.rows[i].first) << ',' << q(f0.rows[i].second) << ',' << q(f1.rows[i].second) << '\n';
  }
  rep.csv = csv.str();
  out.reports.push_back(std::move(rep));
  check(out, f0.violations == 0 && f1.violations == 0,
        "length <= mu oracle + mu on " + std::to_string(pairs.size()) + " pairs (mu=" + q(f0.mu) + ", " + q(f1.mu) + ")");
  check(out, f0.shorter_than_oracle == 0 && f1.shorter_than_oracle == 0, "no special path shorter than the oracle");
  std::ostringstream d;
  d << std::setprecision(4) << drift;
  check(out, drift < 0.15, "mu drift under window doubling " + d.str() + " < 0.15");
  return out;
}

StepOutput verify_fibers_cmd(const Scenario& s) {
  StepOutput out;
  const auto gog = GraphOfGroupsConfig::from_config(s.config);
  const CKAWindow base(gog, s.window);
  const CKAWindow big(gog, doubled(s.window));
  const FiberFamily fam = build_fiber_family(base, s.r);
  const FiberAxiomReport ax = verify_fiber_axioms(fam, verify_fiber_axioms(fam, Rational(1000)).xi_witnessed());
  {
    Report rep{"fiber_axioms", to_json(ax), std::nullopt, std::nullopt};
    rep.json["provenance"] = provenance(s);
    out.reports.push_back(std::move(rep));
  }
  check(out, ax.pass(), "fiber axioms at xi_witnessed=" + q(ax.xi_witnessed()));
  check(out, ax.common_failures == 0,
        "common projections equal on " + std::to_string(ax.common_triples) + " triples");
  check(out, ax.max_projection_diameter <= ax.diameter_bound,
        "projection diameter " + q(ax.max_projection_diameter) + " <= " + q(ax.diameter_bound));

  const Pairs pairs = clean_pairs(base, s.samples, s.seed, s.fiber_span, 1);
  const EstimateReport lr = check_fiber_estimates(base, fam, pairs);
  {
    Report rep{"fiber_estimates", to_json(lr), std::nullopt, std::nullopt};
    rep.json["provenance"] = provenance(s);
    out.reports.push_back(std::move(rep));
  }
  check(out, lr.pass(), "horizontal/vertical estimates within the envelope on " + std::to_string(lr.rows.size()) +
                            " rows");

  const FiberFamily fam2 = build_fiber_family(big, s.r);
  const VerticalReport v0 = vertical_formula_report(base, fam, pairs);
  const VerticalReport v1 = vertical_formula_report(big, fam2, pairs);
  const double drift = rel_drift(v0.C, v1.C);
  Report rep;
  rep.name = "vertical_formula";
  rep.json = provenance(s);
  rep.json["base"] = to_json(v0);
  rep.json["doubled"] = to_json(v1);
  rep.json["drift"] = drift;
  std::ostringstream csv;
  csv << "pair,dv,rhs,dv_2W,rhs_2W\n";
  for (std::size_t i = 0; i < v0.rows.size() && i < v1.rows.size(); ++i) {
    csv << i << ',' << q(v0.rows[i].dv) << ',' << q(v0.rows[i].rhs) << ',' << q(v1.rows[i].dv) << ','
        << q(v1.rows[i].rhs) << '\n';
  }
  rep.csv = csv.str();
  out.reports.push_back(std::move(rep));
  check(out, v0.violations == 0 && v1.violations == 0 && v0.rows.size() >= 200,
        "vertical formula C=" + q(v0.C) + " with zero violations on " + std::to_string(v0.rows.size()) + " pairs");
  std::ostringstream d;
  d << std::setprecision(4) << drift;
  check(out, drift < 0.15, "vertical C drift under window doubling " + d.str() + " < 0.15");
  return out;
}

StepOutput verify_coneoff_cmd(const Scenario& s) {
  StepOutput out;
  if (s.kind == ScenarioKind::Relhyp) {
    const RelativePresentation pres = RelativePresentation::from_config(s.config);
    const RelativeSweep sw = sweep_relative_formula(pres, s.radius, s.K_grid, s.samples, s.seed);
    Report rep{"relative_formula", to_json(sw), std::nullopt, std::nullopt};
    rep.json["provenance"] = provenance(s);
    std::ostringstream csv;
    csv << "K,radius,x,y,word_distance,thick,peripheral\n";
    for (const auto* side : {&sw.base, &sw.doubled}) {
      for (const auto& r : *side) {
        for (const auto& row : r.rows) {
          csv << q(r.K) << ',' << r.radius << ',' << row.x.to_string() << ',' << row.y.to_string() << ','
              << q(row.word_distance) << ',' << q(row.thick) << ',' << q(row.peripheral) << '\n';
        }
      }
    }
    rep.csv = csv.str();
    out.reports.push_back(std::move(rep));
    std::size_t violations = 0;
    for (const auto* side : {&sw.base, &sw.doubled})
      for (const auto& r : *side) violations += r.fit.violations;
    check(out, violations == 0, "relative formula: zero violations across the K grid");
    check(out, sw.threshold.has_value(),
          "empirical K threshold " + (sw.threshold ? q(*sw.threshold) : std::string("none")));
    return out;
  }
  const auto gog = GraphOfGroupsConfig::from_config(s.config);
  const CKAWindow win(gog, s.window);
  Rational K;
  if (s.K) {
    K = *s.K;
  } else {
    const FiberFamily fam = build_fiber_family(win, s.r);
    K = 4 * std::max(verify_fiber_axioms(fam, Rational(1000)).xi_witnessed(), Rational(1));
  }
  const ConedPieces cp(win, s.r);
  const auto fams = build_quasi_line_families(cp, s.quasi_lines);
  nlohmann::json members = nlohmann::json::object();
  for (const auto& [type, f] : fams) {
    members[gog.vertices[type].id] = {{"members", f.size()}, {"theta", q(f.theta)}};
  }
  for (int c = 1; c <= 2; ++c) {
    const Pairs pairs = sample_pairs(win, s.samples, s.seed + static_cast<std::uint64_t>(c), s.fiber_span);
    const ConeoffReport cr = validate_coneoff_formula(cp, fams, c, pairs, K);
    Report rep{"coneoff_class" + std::to_string(c), to_json(cr), std::nullopt, std::nullopt};
    rep.json["provenance"] = provenance(s);
    rep.json["quasi_lines"] = members;
    out.reports.push_back(std::move(rep));
    check(out, cr.fit.violations == 0,
          "class " + std::to_string(c) + " thick distance formula lambda=" + q(cr.fit.lambda) + " at K=" + q(K));
  }
  return out;
}

StepOutput verify_embedding_cmd(const Scenario& s) {
  StepOutput out;
  const auto gog = GraphOfGroupsConfig::from_config(s.config);
  const CKAWindow base(gog, s.window);
  const CKAWindow big(gog, doubled(s.window));
  const EmbeddingContext c0 = build_embedding_context(base, s.r, s.K);
  const EmbeddingContext c1 = build_embedding_context(big, s.r, s.K);
  const Pairs pairs = clean_pairs(base, s.samples, s.seed, s.fiber_span, 1);
  const QIStability st = fit_qi_stability(c0, c1, pairs, s.seed);
  Report rep{"embedding", to_json(st), to_csv(st.base), std::nullopt};
  rep.json["provenance"] = provenance(s);
  out.reports.push_back(std::move(rep));
  out.checks.push_back("INFO " + st.base.headline());
  check(out, st.base.violations == 0 && st.doubled.violations == 0 && st.base.rows.size() >= 200,
        "QI inequalities hold on " + std::to_string(st.base.rows.size()) + " pairs");
  std::ostringstream d;
  d << std::setprecision(4) << st.drift;
  check(out, st.stable(), "lambda drift under window doubling " + d.str() + " < 0.15");
  check(out, st.base.lipschitz_failures == 0 && st.doubled.lipschitz_failures == 0,
        "Lipschitz direction with L=" + q(st.base.lambda) + " on every pair");
  return out;
}

StepOutput distortion_cmd(const Scenario& s) {
  StepOutput out;
  for (const auto& l : s.lattices) {
    const auto p = MatrixGroupPresentation::from_config(s.config, l.name);
    const WordBall ball = word_ball(p, l.radius);
    const DistortionProfile prof = distortion_profile(p, l.element, ball);
    Report rep{"distortion_" + l.name, to_json(prof), to_csv(prof), std::nullopt};
    rep.json["ball"] = to_json(ball);
    rep.json["provenance"] = provenance(s);
    out.reports.push_back(std::move(rep));
    std::ostringstream e;
    e << std::setprecision(6) << prof.exponent;
    const std::string tag = l.name + " " + l.element + ": exponent " + e.str();
    if (l.exponent_min) check(out, prof.exponent >= *l.exponent_min, tag + " >= " + std::to_string(*l.exponent_min));
    if (l.exponent_max) check(out, prof.exponent <= *l.exponent_max, tag + " <= " + std::to_string(*l.exponent_max));
    if (l.exponent_exact) {
      bool linear = true;
      for (const auto& r : prof.rows) linear = linear && r.length == r.n;
      check(out, linear && std::abs(prof.exponent - *l.exponent_exact) < 1e-9,
            tag + " == " + std::to_string(*l.exponent_exact) + " (|g^n| = n on every row)");
    }
    if (l.dyadic_slope) {
      bool ok = true;
      for (std::size_t k = 0; k < prof.dyadic.size(); ++k) {
        ok = ok && prof.dyadic[k].length <= *l.dyadic_slope * static_cast<std::int64_t>(k) + *l.dyadic_slope;
      }
      check(out, ok, l.name + " " + l.element + ": |g^(2^k)| <= " + std::to_string(*l.dyadic_slope) + "k + " +
                         std::to_string(*l.dyadic_slope) + " for k < " + std::to_string(prof.dyadic.size()));
    }
  }
  return out;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string hex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

}  // namespace

StepOutput run_step(const std::string& command, const Scenario& s) {
  const auto ok = applicable_commands(s.kind);
  if (std::find(ok.begin(), ok.end(), command) == ok.end()) {
    throw Error(ErrorKind::ConfigInvalid,
                "command '" + command + "' does not apply to a " + to_string(s.kind) + " scenario");
  }
  StepOutput out;
  if (command == "check-axioms") out = check_axioms(s);
  else if (command == "build-quasitree") out = build_quasitree_cmd(s);
  else if (command == "special-path") out = special_path_cmd(s);
  else if (command == "verify-fibers") out = verify_fibers_cmd(s);
  else if (command == "verify-coneoff") out = verify_coneoff_cmd(s);
  else if (command == "verify-embedding") out = verify_embedding_cmd(s);
  else if (command == "distortion") out = distortion_cmd(s);
  out.command = command;
  return out;
}

int run(const std::string& command, const Scenario& s, const RunOptions& opts, std::ostream& log) {
  const auto& known = commands();
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    log << "error: unknown command '" << command << "'\n";
    return 3;
  }
  const std::vector<std::string> steps = command == "all" ? applicable_commands(s.kind)
                                                           : std::vector<std::string>{command};
  nlohmann::json manifest;
  manifest["scenario"] = s.name;
  manifest["kind"] = to_string(s.kind);
  manifest["scenario_hash"] = hex(s.hash);
  manifest["tool_version"] = kToolVersion;
  manifest["command"] = command;
  manifest["seed"] = s.seed;
  if (opts.timestamps) manifest["started"] = timestamp();
  manifest["steps"] = nlohmann::json::array();
  std::vector<std::string> files;
  int status = 0;
  for (const auto& step : steps) {
    nlohmann::json entry{{"command", step}};
    try {
      StepOutput r = run_step(step, s);
      std::vector<std::string> written;
      for (const auto& rep : r.reports) {
        for (auto& f : emit(rep, opts.format, opts.out)) written.push_back(std::move(f));
      }
      for (const auto& line : r.checks) log << s.name << " " << step << ": " << line << "\n";
      entry["pass"] = r.pass;
      entry["checks"] = r.checks;
      entry["files"] = written;
      files.insert(files.end(), written.begin(), written.end());
      if (!r.pass) status = std::max(status, 1);
    } catch (const Error& e) {
      log << s.name << " " << step << ": error: " << e.what() << "\n";
      entry["pass"] = false;
      entry["error"] = e.what();
      status = std::max(status, e.kind() == ErrorKind::ConfigInvalid ? 2 : 3);
    } catch (const std::exception& e) {
      log << s.name << " " << step << ": error: " << e.what() << "\n";
      entry["pass"] = false;
      entry["error"] = e.what();
      status = std::max(status, 3);
    }
    manifest["steps"].push_back(entry);
  }
  if (opts.timestamps) manifest["finished"] = timestamp();
  manifest["files"] = files;
  manifest["exit"] = status;
  std::filesystem::create_directories(opts.out);
  write_file(opts.out / "manifest.json", canonical_json(manifest));
  return status;
}

int run(const std::string& command, const std::string& scenario_path, const Overrides& overrides,
        const RunOptions& opts, std::ostream& log) {
  Scenario s;
  try {
    s = Scenario::load(scenario_path);
    apply(s, overrides);
  } catch (const Error& e) {
    log << scenario_path << ": error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigInvalid || e.kind() == ErrorKind::ParseError ? 2 : 3;
  } catch (const std::exception& e) {
    log << scenario_path << ": error: " << e.what() << "\n";
    return 3;
  }
  return run(command, s, opts, log);
}

}  // namespace qtlab
