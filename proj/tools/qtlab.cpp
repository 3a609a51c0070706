#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qtlab/error.hpp"
#include "qtlab/pipeline.hpp"

namespace {

qtlab::Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return qtlab::Rational(std::stoll(s));
    return qtlab::Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw qtlab::Error(qtlab::ErrorKind::ConfigInvalid, "not a rational: '" + s + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtlab: quasi-trees of spaces and CKA windows"};
  std::string command;
  std::string scenario;
  std::optional<std::string> K, r;
  std::optional<int> window;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  std::string out = "out";
  bool no_timestamps = false;

  app.add_option("command", command, "check-axioms | build-quasitree | special-path | verify-fibers | "
                                     "verify-coneoff | verify-embedding | distortion | all")
      ->required()
      ->check(CLI::IsMember(qtlab::commands()));
  app.add_option("--scenario", scenario, "scenario file")->required();
  app.add_option("--K", K, "cutoff constant (p or p/q)");
  app.add_option("--r", r, "cone radius (p or p/q)");
  app.add_option("--window", window, "fiber window W");
  app.add_option("--samples", samples, "sample count");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--format", format, "json | csv | dot");
  app.add_option("--out", out, "output directory");
  app.add_flag("--no-timestamps", no_timestamps, "omit timestamps from manifest.json");
  CLI11_PARSE(app, argc, argv);

  try {
    qtlab::Overrides o;
    if (K) o.K = parse_rational(*K);
    if (r) o.r = parse_rational(*r);
    o.window = window;
    o.samples = samples;
    o.seed = seed;
    qtlab::RunOptions opts;
    opts.format = qtlab::parse_format(format);
    opts.out = out;
    opts.timestamps = !no_timestamps;
    return qtlab::run(command, scenario, o, opts, std::cout);
  } catch (const qtlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == qtlab::ErrorKind::ConfigInvalid ? 2 : 3;
  }
}
