#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtlab/graph.hpp"
#include "qtlab/pipeline.hpp"
#include "qtlab/report.hpp"
#include "support.hpp"

using namespace qtlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / ("qtlab_" + std::string(info->name()) + "_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

int run_in(const std::string& cmd, const std::string& scen, const fs::path& out, Format f = Format::Json,
           bool stamps = false, Overrides o = {}) {
  RunOptions opts;
  opts.format = f;
  opts.out = out;
  opts.timestamps = stamps;
  std::ostringstream log;
  return run(cmd, qtlab::testing::scenario_path(scen), o, opts, log);
}

const char* kMissingMatrix = R"(
[scenario]
name = "broken"
kind = "cka"
center = "w"

[vertex.v]
rank = 2
word.e = "a"

[vertex.w]
rank = 2
word.e = "a"

[edge.e]
ends = ["v", "w"]
)";

int shell(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Format, ParseAndExtension) {
  EXPECT_EQ(parse_format("json"), Format::Json);
  EXPECT_EQ(parse_format("csv"), Format::Csv);
  EXPECT_EQ(parse_format("dot"), Format::Dot);
  EXPECT_STREQ(extension(Format::Csv), "csv");
  EXPECT_EQ(qtlab::testing::kind_of([] { parse_format("xml"); }), ErrorKind::UnsupportedFormat);
  EXPECT_EQ(qtlab::testing::kind_of([] { parse_format("JSON"); }), ErrorKind::UnsupportedFormat);
}

TEST(Render, JsonIsCanonicalAndTagged) {
  Report r{"t", {{"zeta", 1}, {"alpha", {{"y", 2}, {"x", "3/2"}}}}, std::nullopt, std::nullopt};
  const std::string text = render(r, Format::Json);
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text.back(), '\n');
  EXPECT_LT(text.find("\"alpha\""), text.find("\"zeta\""));
  EXPECT_LT(text.find("\"x\""), text.find("\"y\""));
  const auto back = nlohmann::json::parse(text);
  EXPECT_EQ(back["model"], model_tags());
  EXPECT_EQ(back["alpha"]["x"], "3/2");
  EXPECT_EQ(canonical_json(back), text);
}

TEST(Render, MissingFormIsUnsupported) {
  Report r{"t", nlohmann::json::object(), std::nullopt, std::nullopt};
  EXPECT_EQ(qtlab::testing::kind_of([&] { render(r, Format::Csv); }), ErrorKind::UnsupportedFormat);
  EXPECT_EQ(qtlab::testing::kind_of([&] { render(r, Format::Dot); }), ErrorKind::UnsupportedFormat);
}

TEST(Emit, WritesJsonAlwaysAndOtherFormOnlyWhenPresent) {
  const auto dir = scratch("emit");
  Report r{"rep", {{"k", 1}}, std::string("a,b\n1,2\n"), std::nullopt};
  EXPECT_EQ(emit(r, Format::Csv, dir), (std::vector<std::string>{"rep.json", "rep.csv"}));
  EXPECT_EQ(slurp(dir / "rep.csv"), "a,b\n1,2\n");
  EXPECT_EQ(emit(r, Format::Dot, dir), (std::vector<std::string>{"rep.json"}));
  EXPECT_FALSE(fs::exists(dir / "rep.dot"));
}

TEST(Run, CheckAxiomsOnFamilyPasses) {
  const auto dir = scratch("out");
  EXPECT_EQ(run_in("check-axioms", "f2_axes", dir), 0);
  const auto m = manifest(dir);
  EXPECT_EQ(m["exit"], 0);
  EXPECT_EQ(m["command"], "check-axioms");
  EXPECT_EQ(m["tool_version"], kToolVersion);
  EXPECT_FALSE(m.contains("started"));
  for (const auto& f : m["files"]) EXPECT_TRUE(fs::exists(dir / f.get<std::string>())) << f;
}

TEST(Run, ManifestRecordsSeedAndHash) {
  const auto dir = scratch("out");
  Overrides o;
  o.seed = 1234;
  ASSERT_EQ(run_in("check-axioms", "f2_axes", dir, Format::Json, true, o), 0);
  const auto m = manifest(dir);
  EXPECT_EQ(m["seed"], 1234u);
  EXPECT_TRUE(m.contains("started"));
  EXPECT_TRUE(m.contains("finished"));
  std::ostringstream h;
  h << std::hex << fnv1a(slurp(qtlab::testing::scenario_path("f2_axes")));
  EXPECT_NE(m["scenario_hash"].get<std::string>().find(h.str()), std::string::npos);
}

TEST(Run, MissingGluingMatrixIsConfigError) {
  const auto dir = scratch("out");
  const auto path = dir / "broken.toml";
  write_file(path, kMissingMatrix);
  RunOptions opts;
  opts.out = dir / "o";
  std::ostringstream log;
  EXPECT_EQ(run("special-path", path.string(), {}, opts, log), 2);
  EXPECT_NE(log.str().find("error"), std::string::npos);
}

TEST(Run, ExitCodes) {
  const auto dir = scratch("out");
  // distortion does not apply to a family scenario
  EXPECT_EQ(run_in("distortion", "f2_axes", dir), 2);
  EXPECT_EQ(manifest(dir)["exit"], 2);
  EXPECT_EQ(run_in("no-such-command", "f2_axes", dir), 3);
  EXPECT_EQ(run_in("check-axioms", "does_not_exist", dir), 2);
}

TEST(Run, CsvRowsMatchJsonRows) {
  const auto dir = scratch("out");
  ASSERT_EQ(run_in("distortion", "z2", dir, Format::Csv), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "distortion_z2.json"));
  const std::string csv = slurp(dir / "distortion_z2.csv");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), j["rows"].size() + 1);
  EXPECT_EQ(j["provenance"]["scenario"], "z2");
}

TEST(Run, DotParsesBack) {
  const auto dir = scratch("out");
  ASSERT_EQ(run_in("build-quasitree", "f2_axes", dir, Format::Dot), 0);
  std::vector<fs::path> dots;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".dot") dots.push_back(e.path());
  ASSERT_FALSE(dots.empty());
  for (const auto& p : dots) {
    const WeightedGraph g = from_dot(slurp(p));
    auto js = p;
    js.replace_extension(".json");
    const auto j = nlohmann::json::parse(slurp(js));
    EXPECT_EQ(g.vertex_count(), j["carrier_vertices"].get<std::size_t>()) << p;
  }
}

TEST(Run, AllIsByteDeterministic) {
  const auto a = scratch("a");
  const auto b = scratch("b");
  ASSERT_EQ(run_in("all", "f2_axes", a, Format::Csv), 0);
  ASSERT_EQ(run_in("all", "f2_axes", b, Format::Csv), 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GE(files, 3u);
}

TEST(Scenario, OverridesApply) {
  Scenario s = qtlab::testing::scenario("flip3");
  Overrides o;
  o.window = 12;
  o.r = Rational(1, 2);
  o.samples = 17;
  o.K = Rational(9);
  apply(s, o);
  EXPECT_EQ(s.window.W, 12);
  EXPECT_EQ(s.r, Rational(1, 2));
  EXPECT_EQ(s.samples, 17u);
  EXPECT_EQ(s.K, Rational(9));
  EXPECT_EQ(s.seed, 42u);
}

TEST(Scenario, MissingSectionIsConfigInvalid) {
  EXPECT_EQ(qtlab::testing::kind_of([] { Scenario::parse("[family]\nrank = 2\n"); }), ErrorKind::ConfigInvalid);
}

TEST(Scenario, HashIsFnv1a) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Cli, ExitStatusFromBinary) {
  const auto dir = scratch("cli");
  const std::string bin = QTLAB_CLI_PATH;
  const std::string quiet = " > " + (dir / "log.txt").string() + " 2>&1";
  EXPECT_EQ(shell(bin + " distortion --scenario " + qtlab::testing::scenario_path("z2") + " --out " +
                  (dir / "ok").string() + " --no-timestamps" + quiet),
            0);
  write_file(dir / "broken.toml", kMissingMatrix);
  EXPECT_EQ(shell(bin + " verify-fibers --scenario " + (dir / "broken.toml").string() + " --out " +
                  (dir / "bad").string() + quiet),
            2);
  EXPECT_NE(shell(bin + " distortion --scenario " + qtlab::testing::scenario_path("z2") + " --format xml --out " +
                  (dir / "x").string() + quiet),
            0);
  EXPECT_NE(shell(bin + " frobnicate --scenario x" + quiet), 0);
}
