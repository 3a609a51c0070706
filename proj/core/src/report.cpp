#include "qtlab/report.hpp"

#include <fstream>

#include "qtlab/error.hpp"

namespace qtlab {

Format parse_format(std::string_view s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "dot") return Format::Dot;
  throw Error(ErrorKind::UnsupportedFormat, "unknown format '" + std::string(s) + "'");
}

const char* extension(Format f) {
  switch (f) {
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Dot: return "dot";
  }
  return "json";
}

nlohmann::json model_tags() {
  return {{"tree_model", "free-group Cayley tree ball"},
          {"cones", "apex cones"},
          {"piece_metric", "l1"}};
}

std::string canonical_json(const nlohmann::json& j) {
  // nlohmann::json keeps object keys in a std::map, so dump() is sorted.
  return j.dump(2) + "\n";
}

std::string render(const Report& r, Format f) {
  switch (f) {
    case Format::Json: {
      nlohmann::json j = r.json;
      j["model"] = model_tags();
      return canonical_json(j);
    }
    case Format::Csv:
      if (!r.csv) throw Error(ErrorKind::UnsupportedFormat, r.name + " has no csv form");
      return *r.csv;
    case Format::Dot:
      if (!r.dot) throw Error(ErrorKind::UnsupportedFormat, r.name + " has no dot form");
      return *r.dot;
  }
  throw Error(ErrorKind::UnsupportedFormat, "bad format");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> emit(const Report& r, Format f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const std::string json_name = r.name + ".json";
  write_file(dir / json_name, render(r, Format::Json));
  written.push_back(json_name);
  const bool has = (f == Format::Csv && r.csv) || (f == Format::Dot && r.dot);
  if (f != Format::Json && has) {
    const std::string name = r.name + "." + extension(f);
    write_file(dir / name, render(r, f));
    written.push_back(name);
  }
  return written;
}

}  // namespace qtlab
