#include <cctype>
#include <sstream>

#include "qtlab/error.hpp"
#include "qtlab/graph.hpp"

namespace qtlab {

namespace {

WeightedGraph::Vertex intern(WeightedGraph& g, const std::string& id) {
  if (auto v = g.find(id)) return *v;
  return g.add_vertex(id);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Minimal tokenizer for the DOT subset we emit: identifiers, quoted
// strings, and the punctuation { } [ ] = ; , and the edge operator --.
class DotLexer {
 public:
  explicit DotLexer(std::string_view text) : text_(text) {}

  std::string next() {
    skip();
    if (pos_ >= text_.size()) return {};
    char c = text_[pos_];
    if (c == '"') {
      std::string out;
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        out.push_back(text_[pos_++]);
      }
      ++pos_;
      return "\"" + out;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
      pos_ += 2;
      return "--";
    }
    if (std::string_view("{}[]=;,").find(c) != std::string_view::npos) {
      ++pos_;
      return std::string(1, c);
    }
    std::string out;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) ||
          std::string_view("{}[]=;,\"").find(d) != std::string_view::npos ||
          (d == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-')) {
        break;
      }
      out.push_back(d);
      ++pos_;
    }
    return out;
  }

  std::string peek() {
    auto saved = pos_;
    auto token = next();
    pos_ = saved;
    return token;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string unquote(const std::string& token) {
  return (!token.empty() && token.front() == '"') ? token.substr(1) : token;
}

}  // namespace

std::string to_text(const WeightedGraph& g) {
  std::ostringstream out;
  for (WeightedGraph::Vertex v = 0; v < g.vertex_count(); ++v) out << "v " << g.label(v) << '\n';
  for (const auto& e : g.edges()) {
    out << "e " << g.label(e.u) << ' ' << g.label(e.v) << ' ' << to_string(e.length) << '\n';
  }
  return out.str();
}

WeightedGraph from_text(std::string_view text) {
  WeightedGraph g;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind) || kind.front() == '#') continue;
    if (kind == "v") {
      std::string id;
      if (!(fields >> id)) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no));
      intern(g, id);
    } else if (kind == "e") {
      std::string a, b, len = "1";
      if (!(fields >> a >> b)) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no));
      fields >> len;
      Rational length = parse_rational(len);
      if (length <= 0) {
        throw Error(ErrorKind::ParseError, "non-positive length on line " + std::to_string(line_no));
      }
      auto u = intern(g, a);
      auto v = intern(g, b);
      g.add_edge(u, v, length);
    } else {
      throw Error(ErrorKind::ParseError, "unknown record '" + kind + "' on line " +
                                             std::to_string(line_no));
    }
  }
  return g;
}

std::string to_dot(const WeightedGraph& g, std::string_view name, std::string_view tag_attribute) {
  std::ostringstream out;
  out << "graph " << name << " {\n";
  for (WeightedGraph::Vertex v = 0; v < g.vertex_count(); ++v) out << "  " << quoted(g.label(v)) << ";\n";
  for (const auto& e : g.edges()) {
    out << "  " << quoted(g.label(e.u)) << " -- " << quoted(g.label(e.v)) << " [len=\""
        << to_string(e.length) << "\"";
    if (!tag_attribute.empty() && e.tag != 0) out << ", " << tag_attribute << "=" << e.tag;
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

WeightedGraph from_dot(std::string_view text) {
  WeightedGraph g;
  DotLexer lex(text);
  std::string token = lex.next();
  if (token == "strict") token = lex.next();
  if (token != "graph") throw Error(ErrorKind::ParseError, "expected 'graph'");
  token = lex.next();
  if (token != "{") token = lex.next();
  if (token != "{") throw Error(ErrorKind::ParseError, "expected '{'");
  for (token = lex.next(); !token.empty() && token != "}"; token = lex.next()) {
    if (token == ";" || token == ",") continue;
    std::string first = unquote(token);
    if (lex.peek() == "=") {  // graph attribute statement
      lex.next();
      lex.next();
      continue;
    }
    auto u = intern(g, first);
    if (lex.peek() != "--") {
      if (lex.peek() == "[") {
        while (!lex.next().empty() && lex.peek() != "]") {}
        lex.next();
      }
      continue;
    }
    lex.next();
    auto v = intern(g, unquote(lex.next()));
    Rational length = 1;
    std::uint32_t tag = 0;
    if (lex.peek() == "[") {
      lex.next();
      for (std::string key = lex.next(); !key.empty() && key != "]"; key = lex.next()) {
        if (key == ",") continue;
        if (lex.next() != "=") throw Error(ErrorKind::ParseError, "expected '=' in attribute list");
        std::string value = unquote(lex.next());
        if (key == "len") {
          length = parse_rational(value);
        } else if (key == "bridge") {
          tag = static_cast<std::uint32_t>(std::stoul(value));
        }
      }
    }
    if (length <= 0) throw Error(ErrorKind::ParseError, "non-positive len attribute");
    g.add_edge(u, v, length, tag);
  }
  return g;
}

}  // namespace qtlab
