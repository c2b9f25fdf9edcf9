#pragma once

// Scenario files: a small TOML subset.
//
//   key = value         numbers, "strings", [arrays] (nested, may span lines)
//   [section]           objective, seeds, stop, output
//   [methods.<name>]    one per compared method, in file order
//   # comment
//
// See docs/scenario_format.md for the key reference.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "afgd/error.hpp"
#include "afgd/harness.hpp"
#include "afgd/optimizers.hpp"
#include "afgd/smallmat.hpp"

namespace afgd {

namespace toml {

struct Value {
  enum class Kind { Number, String, Array } kind = Kind::Number;
  double number = 0.0;
  std::string text;  // number token as written, or string contents
  std::vector<Value> items;
};

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

struct Table {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

struct Document {
  std::string source;
  std::vector<Table> tables;  // tables[0] is the unnamed root
};

class Parser {
 public:
  Parser(std::string source, std::string_view text) : source_(std::move(source)), text_(text) {}

  Document parse() {
    Document doc{source_, {Table{"", 0, {}}}};
    std::set<std::string> seen;
    while (skip_blank_lines()) {
      if (peek() == '[') {
        const int at = line_;
        ++pos_;
        const std::string name = trim(read_until(']', "table header"));
        ++pos_;
        if (name.empty()) fail(at, "", "empty table name");
        if (!seen.insert(name).second) fail(at, name, "duplicate table");
        doc.tables.push_back(Table{name, at, {}});
        end_of_line();
        continue;
      }
      const int at = line_;
      const std::string key = trim(read_until('=', "key"));
      ++pos_;
      if (key.empty()) fail(at, "", "missing key");
      for (const auto& e : doc.tables.back().entries)
        if (e.key == key) fail(at, key, "duplicate key");
      key_ = key;
      skip_space();
      Value v = value();
      end_of_line();
      doc.tables.back().entries.push_back({key, std::move(v), at});
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(int line, const std::string& key, const std::string& what) const {
    throw ParseError(source_, line, key, what);
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  void skip_space() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#')
      while (!done() && peek() != '\n') ++pos_;
  }

  /// Skips whitespace, comments and newlines; false at end of input.
  bool skip_blank_lines() {
    while (true) {
      skip_space();
      skip_comment();
      if (done()) return false;
      if (peek() != '\n') return true;
      ++pos_;
      ++line_;
    }
  }

  /// Inside arrays newlines and comments are insignificant.
  void skip_array_space() {
    while (true) {
      skip_space();
      skip_comment();
      if (peek() != '\n') return;
      ++pos_;
      ++line_;
    }
  }

  std::string read_until(char stop, const char* what) {
    const std::size_t start = pos_;
    while (!done() && peek() != stop && peek() != '\n') ++pos_;
    if (peek() != stop)
      fail(line_, "", std::string("unterminated ") + what + ", expected '" + stop + "'");
    return std::string(text_.substr(start, pos_ - start));
  }

  void end_of_line() {
    skip_space();
    skip_comment();
    if (!done() && peek() != '\n') fail(line_, key_, "unexpected trailing characters");
  }

  Value value() {
    const char c = peek();
    if (c == '"') return string_value();
    if (c == '[') return array_value();
    return number_value();
  }

  Value string_value() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::String;
    while (true) {
      if (done() || peek() == '\n') fail(line_, key_, "unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (done()) fail(line_, key_, "unterminated string");
        const char e = text_[pos_++];
        switch (e) {
          case '"': v.text += '"'; break;
          case '\\': v.text += '\\'; break;
          case 'n': v.text += '\n'; break;
          case 't': v.text += '\t'; break;
          default: fail(line_, key_, std::string("unsupported escape \\") + e);
        }
        continue;
      }
      v.text += c;
    }
    return v;
  }

  Value array_value() {
    ++pos_;
    Value v;
    v.kind = Value::Kind::Array;
    skip_array_space();
    if (peek() == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      skip_array_space();
      if (done()) fail(line_, key_, "unterminated array");
      v.items.push_back(value());
      skip_array_space();
      if (peek() == ',') {
        ++pos_;
        skip_array_space();
        if (peek() == ']') {
          ++pos_;
          return v;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      fail(line_, key_, "expected ',' or ']' in array");
    }
  }

  Value number_value() {
    const std::size_t start = pos_;
    while (!done() && std::string_view(" \t\r\n,]#").find(peek()) == std::string_view::npos)
      ++pos_;
    Value v;
    v.text = std::string(text_.substr(start, pos_ - start));
    if (v.text.empty()) fail(line_, key_, "missing value");
    const char* first = v.text.data();
    if (*first == '+') ++first;
    const char* last = v.text.data() + v.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v.number);
    if (ec != std::errc() || ptr != last || !std::isfinite(v.number))
      fail(line_, key_, "malformed number '" + v.text + "'");
    return v;
  }

  std::string source_;
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::string key_;
};

inline Document parse(std::string source, std::string_view text) {
  return Parser(std::move(source), text).parse();
}

}  // namespace toml

namespace detail {

/// Typed accessors over one table; every key must be consumed.
class TableReader {
 public:
  TableReader(const std::string& source, const toml::Table& t) : source_(source), table_(t) {}

  const toml::Entry* find(std::string_view key) {
    for (const auto& e : table_.entries)
      if (e.key == key) {
        used_.insert(e.key);
        return &e;
      }
    return nullptr;
  }

  const toml::Entry& require(std::string_view key) {
    const auto* e = find(key);
    if (!e) throw ParseError(source_, table_.line, std::string(key),
                             "missing in [" + table_.name + "]");
    return *e;
  }

  double number(const toml::Entry& e) const {
    if (e.value.kind != toml::Value::Kind::Number) fail(e, "expected a number");
    return e.value.number;
  }

  std::optional<double> number(std::string_view key) {
    const auto* e = find(key);
    return e ? std::optional<double>(number(*e)) : std::nullopt;
  }

  std::int64_t integer(const toml::Entry& e) const {
    if (e.value.kind != toml::Value::Kind::Number) fail(e, "expected an integer");
    std::int64_t v = 0;
    const auto& s = e.value.text;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(e, "expected an integer");
    return v;
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const auto* e = find(key);
    return e ? std::optional<std::int64_t>(integer(*e)) : std::nullopt;
  }

  std::string string(const toml::Entry& e) const {
    if (e.value.kind != toml::Value::Kind::String) fail(e, "expected a string");
    return e.value.text;
  }

  std::optional<std::string> string(std::string_view key) {
    const auto* e = find(key);
    return e ? std::optional<std::string>(string(*e)) : std::nullopt;
  }

  std::vector<double> numbers(const toml::Entry& e) const {
    if (e.value.kind != toml::Value::Kind::Array) fail(e, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& item : e.value.items) {
      if (item.kind != toml::Value::Kind::Number) fail(e, "expected an array of numbers");
      v.push_back(item.number);
    }
    return v;
  }

  Vector vector(const toml::Entry& e) const {
    auto v = numbers(e);
    if (v.empty()) fail(e, "empty vector");
    return Vector(std::move(v));
  }

  std::vector<std::vector<double>> matrix(const toml::Entry& e) const {
    if (e.value.kind != toml::Value::Kind::Array || e.value.items.empty())
      fail(e, "expected an array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : e.value.items) {
      toml::Entry tmp{e.key, row, e.line};
      rows.push_back(numbers(tmp));
    }
    return rows;
  }

  void reject_unknown() const {
    for (const auto& e : table_.entries)
      if (!used_.count(e.key)) fail(e, "unknown key in [" + table_.name + "]");
  }

  [[noreturn]] void fail(const toml::Entry& e, const std::string& what) const {
    throw ParseError(source_, e.line, e.key, what);
  }

 private:
  const std::string& source_;
  const toml::Table& table_;
  std::set<std::string> used_;
};

inline SymMatrix read_square(TableReader& r, const toml::Entry& e) {
  const auto rows = r.matrix(e);
  const std::size_t n = rows.size();
  if (n > SymMatrix::kMaxDim) r.fail(e, "matrix dimension exceeds 6");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) r.fail(e, "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (m(i, j) != m(j, i)) r.fail(e, "matrix must be symmetric");
  return SymMatrix(m);
}

}  // namespace detail

/// Parses scenario text. Relative dataset paths resolve against base_dir.
inline Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>",
                               const std::filesystem::path& base_dir = {}) {
  const toml::Document doc = toml::parse(source, text);
  Scenario s;
  bool have_objective = false, have_seeds = false;
  std::optional<StopSpec> stop;
  struct PendingMethod {
    MethodSpec spec;
    bool has_epsilon = false;
    bool has_k_max = false;
  };
  std::vector<PendingMethod> methods;

  for (const auto& t : doc.tables) {
    detail::TableReader r(source, t);
    if (t.name.empty()) {
      if (auto n = r.string("name")) s.name = *n;
    } else if (t.name == "objective") {
      have_objective = true;
      const auto& kind_e = r.require("kind");
      const std::string kind = r.string(kind_e);
      if (kind == "quadratic") {
        QuadraticSpec q;
        q.q = detail::read_square(r, r.require("q"));
        if (const auto* b = r.find("b")) {
          q.b = r.vector(*b);
          if (q.b.size() != q.q.dim()) r.fail(*b, "length does not match q");
        } else {
          q.b = Vector(q.q.dim());
        }
        q.c = r.number("c").value_or(0.0);
        const auto m = r.number("m");
        const auto L = r.number("L");
        if (m.has_value() != L.has_value())
          throw ParseError(source, t.line, m ? "L" : "m", "m and L must be given together");
        if (m) q.bounds_override = SmoothnessBounds{*m, *L};
        s.objective = std::move(q);
      } else if (kind == "regression") {
        RegressionSpec g;
        if (auto csv = r.string("csv")) {
          const std::filesystem::path p(*csv);
          g.csv = (p.is_relative() && !base_dir.empty()) ? (base_dir / p).string() : *csv;
        }
        if (const auto* e = r.find("seed")) {
          const auto v = r.integer(*e);
          if (v < 0) r.fail(*e, "seed must be >= 0");
          g.seed = static_cast<std::uint64_t>(v);
        }
        if (const auto* e = r.find("count")) {
          const auto v = r.integer(*e);
          if (v < 2 || v > 10'000'000) r.fail(*e, "count must be >= 2");
          g.count = static_cast<int>(v);
        }
        if (const auto* e = r.find("theta")) {
          const auto v = r.numbers(*e);
          if (v.size() != 2) r.fail(*e, "theta needs two entries");
          g.theta0 = v[0];
          g.theta1 = v[1];
        }
        if (const auto* e = r.find("noise")) {
          g.noise = r.number(*e);
          if (g.noise < 0.0) r.fail(*e, "noise must be >= 0");
        }
        s.objective = std::move(g);
      } else {
        r.fail(kind_e, "kind must be \"quadratic\" or \"regression\"");
      }
    } else if (t.name.rfind("methods.", 0) == 0) {
      PendingMethod pm;
      pm.spec.name = t.name.substr(8);
      if (pm.spec.name.empty()) throw ParseError(source, t.line, "", "empty method name");
      auto& c = pm.spec.config;
      const auto& me = r.require("method");
      try {
        c.method = parse_method(r.string(me));
      } catch (const InvalidConfig& ex) {
        r.fail(me, ex.what());
      }
      for (const char* key : {"alpha", "eta", "gamma", "mu", "delta", "c1", "c2"})
        if (const auto* e = r.find(key)) set_parameter(c, key, r.number(*e));
      if (const auto* e = r.find("epsilon")) {
        c.epsilon = r.number(*e);
        pm.has_epsilon = true;
      }
      if (const auto* e = r.find("k_max")) {
        const auto v = r.integer(*e);
        if (v < 1 || v > 1'000'000'000) r.fail(*e, "k_max must be >= 1");
        c.k_max = static_cast<int>(v);
        pm.has_k_max = true;
      }
      methods.push_back(std::move(pm));
    } else if (t.name == "seeds") {
      have_seeds = true;
      s.seeds.x0 = r.vector(r.require("x0"));
      s.seeds.x1 = r.vector(r.require("x1"));
      if (const auto* e = r.find("y0")) s.seeds.y0 = r.vector(*e);
    } else if (t.name == "stop") {
      StopSpec st;
      if (auto v = r.number("epsilon")) st.epsilon = *v;
      if (const auto* e = r.find("k_max")) {
        const auto v = r.integer(*e);
        if (v < 1 || v > 1'000'000'000) r.fail(*e, "k_max must be >= 1");
        st.k_max = static_cast<int>(v);
      }
      stop = st;
    } else if (t.name == "output") {
      if (auto v = r.string("dir")) s.output.dir = *v;
      if (auto v = r.string("prefix")) s.output.prefix = *v;
    } else {
      throw ParseError(source, t.line, t.name, "unknown table");
    }
    r.reject_unknown();
  }

  if (!have_objective) throw ParseError(source, 0, "objective", "missing [objective] table");
  if (!have_seeds) throw ParseError(source, 0, "seeds", "missing [seeds] table");
  if (methods.empty()) throw ParseError(source, 0, "methods", "no [methods.<name>] tables");
  if (stop) s.stop = *stop;
  for (auto& pm : methods) {
    if (!pm.has_epsilon) pm.spec.config.epsilon = s.stop.epsilon;
    if (!pm.has_k_max) pm.spec.config.k_max = s.stop.k_max;
    s.methods.push_back(std::move(pm.spec));
  }
  if (s.name.empty()) s.name = "scenario";
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string(), path.parent_path());
}

}  // namespace afgd
