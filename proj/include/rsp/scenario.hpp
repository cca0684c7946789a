#pragma once

// Declarative scenario configs. Two input syntaxes share one schema:
//
//   experiment = phase_fringe      # top-level keys
//   gamma = pi/8
//   [grid]
//   start = 0
//   stop = 2*pi
//   points = 24
//   [output]
//   format = csv
//
// or the same keys as a JSON object with nested "grid" and "output".
// Everything is validated before any physics runs.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsp/analysis.hpp"

namespace rsp::cli {

/// Config does not satisfy the schema; maps to exit code 2.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written; maps to exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment {
  chsh,
  phase_fringe,
  amplitude_fringe,
  mixed_state,
  populations,
  general_n,
  distinguishability_demo,
};

inline const std::vector<std::pair<std::string, Experiment>>& experiment_names() {
  static const std::vector<std::pair<std::string, Experiment>> names{
      {"chsh", Experiment::chsh},
      {"phase_fringe", Experiment::phase_fringe},
      {"amplitude_fringe", Experiment::amplitude_fringe},
      {"mixed_state", Experiment::mixed_state},
      {"populations", Experiment::populations},
      {"general_n", Experiment::general_n},
      {"distinguishability_demo", Experiment::distinguishability_demo},
  };
  return names;
}

inline std::string to_string(Experiment e) {
  for (const auto& [name, value] : experiment_names()) {
    if (value == e) return name;
  }
  return "unknown";
}

enum class OutputFormat { csv, json };

inline std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw SchemaError("format must be csv or json, got \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// Angle expressions: numbers, pi, + - * /, parentheses, unary sign.

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  double parse() {
    const double v = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    if (!std::isfinite(v)) fail("value is not finite");
    return v;
  }

 private:
  double sum() {
    double v = product();
    for (;;) {
      skip_space();
      if (accept('+')) {
        v += product();
      } else if (accept('-')) {
        v -= product();
      } else {
        return v;
      }
    }
  }

  double product() {
    double v = unary();
    for (;;) {
      skip_space();
      if (accept('*')) {
        v *= unary();
      } else if (accept('/')) {
        const double d = unary();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double unary() {
    skip_space();
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return primary();
  }

  double primary() {
    skip_space();
    if (accept('(')) {
      const double v = sum();
      skip_space();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    if (text_.substr(pos_, 2) == "pi") {
      pos_ += 2;
      return std::numbers::pi;
    }
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
    if (ec != std::errc{} || ptr == first) {
      fail(pos_ < text_.size() ? "expected a number or pi" : "unexpected end of expression");
    }
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("bad expression \"" + std::string(text_) + "\": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline double parse_expression(std::string_view text) {
  if (detail::trim(text).empty()) throw SchemaError("empty expression");
  return detail::ExprParser(text).parse();
}

inline long long parse_integer(const std::string& key, std::string_view text) {
  const std::string t = detail::trim(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw SchemaError(key + " must be an integer, got \"" + t + "\"");
  }
  return v;
}

inline bool parse_bool(const std::string& key, std::string_view text) {
  const std::string t = detail::trim(text);
  if (t == "true") return true;
  if (t == "false") return false;
  throw SchemaError(key + " must be true or false, got \"" + t + "\"");
}

// ---------------------------------------------------------------------------

struct Grid {
  double start = 0.0;
  double stop = 0.0;
  long long points = 0;
  bool endpoint = false;

  std::vector<double> values() const {
    std::vector<double> out;
    const double div = static_cast<double>(endpoint ? points - 1 : points);
    for (long long k = 0; k < points; ++k) {
      out.push_back(endpoint && k == points - 1
                        ? stop
                        : start + (stop - start) * static_cast<double>(k) / div);
    }
    return out;
  }
};

struct ScenarioConfig {
  Experiment experiment = Experiment::chsh;
  int n_pairs = 2;
  double gamma = std::numbers::pi / 8;
  double theta = 0.0;
  double p_strength = 1.0;
  double distinguishability = 1.0;
  std::optional<Grid> grid;
  std::optional<long long> shots;
  std::optional<long long> seed;
  std::optional<std::string> output_path;
  OutputFormat format = OutputFormat::csv;
};

inline constexpr int kMaxPairs = 6;
inline constexpr long long kMaxPoints = 100000;
inline constexpr long long kMaxShots = 1000000000;

inline bool is_scan(Experiment e) {
  return e == Experiment::phase_fringe || e == Experiment::amplitude_fringe;
}

inline bool supports_shots(Experiment e) {
  return e == Experiment::chsh || is_scan(e) || e == Experiment::populations ||
         e == Experiment::distinguishability_demo;
}

/// Default scan grid: one full period of the fringe, endpoint excluded.
inline Grid default_grid(Experiment e) {
  if (e == Experiment::phase_fringe) return {0.0, 2 * std::numbers::pi, 24, false};
  if (e == Experiment::amplitude_fringe) return {0.0, std::numbers::pi / 2, 24, false};
  return {0.0, 1.0, 5, true};
}

inline void validate(const ScenarioConfig& c) {
  if (c.n_pairs < 1 || c.n_pairs > kMaxPairs) {
    throw SchemaError("n_pairs must lie in [1, " + std::to_string(kMaxPairs) + "]");
  }
  if (!std::isfinite(c.gamma) || !std::isfinite(c.theta)) throw SchemaError("angles must be finite");
  if (!(c.p_strength >= 0.0 && c.p_strength <= 1.0)) throw SchemaError("p_strength must lie in [0, 1]");
  if (!(c.distinguishability >= 0.0 && c.distinguishability <= 1.0)) {
    throw SchemaError("distinguishability must lie in [0, 1]");
  }
  if (c.grid) {
    const auto& g = *c.grid;
    if (!is_scan(c.experiment) && c.experiment != Experiment::mixed_state) {
      throw SchemaError("experiment " + to_string(c.experiment) + " takes no grid");
    }
    if (g.points < 2 || g.points > kMaxPoints) {
      throw SchemaError("grid.points must lie in [2, " + std::to_string(kMaxPoints) + "]");
    }
    if (is_scan(c.experiment) && g.points < 3) {
      throw SchemaError("a fringe fit needs grid.points >= 3");
    }
    if (!std::isfinite(g.start) || !std::isfinite(g.stop)) throw SchemaError("grid bounds must be finite");
    if (c.experiment == Experiment::mixed_state) {
      if (!(g.start >= 0.0 && g.start <= 1.0 && g.stop >= 0.0 && g.stop <= 1.0)) {
        throw SchemaError("mixed_state grid scans p_strength and must stay in [0, 1]");
      }
    } else if (g.start == g.stop) {
      throw SchemaError("grid.start equals grid.stop");
    }
  }
  if (is_scan(c.experiment)) {
    const Grid g = c.grid.value_or(default_grid(c.experiment));
    const double w = c.experiment == Experiment::phase_fringe ? 1.0 : 4.0;
    if (!resolves_sinusoid(g.values(), w)) {
      throw SchemaError("grid does not resolve the fringe (fewer than 3 distinct phases)");
    }
  }
  if (c.shots) {
    if (!supports_shots(c.experiment)) {
      throw SchemaError("experiment " + to_string(c.experiment) + " has no sampled quantity");
    }
    if (*c.shots < 1 || *c.shots > kMaxShots) {
      throw SchemaError("shots must lie in [1, " + std::to_string(kMaxShots) + "]");
    }
  }
  if (c.seed && *c.seed < 0) throw SchemaError("seed must be >= 0");
  if (c.seed && !c.shots) throw SchemaError("seed given without shots");
  if (c.output_path && c.output_path->empty()) throw SchemaError("output.path is empty");
}

// ---------------------------------------------------------------------------
// Parsing. Both syntaxes funnel into flat "section.key" -> text.

namespace detail {

using FlatConfig = std::map<std::string, std::string>;

inline FlatConfig flatten_ini(const std::string& text) {
  FlatConfig out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw SchemaError(where + "unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section != "grid" && section != "output" && section != "scenario") {
        throw SchemaError(where + "unknown section [" + section + "]");
      }
      if (section == "scenario") section.clear();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw SchemaError(where + "expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw SchemaError(where + "missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!out.emplace(full, value).second) throw SchemaError(where + "duplicate key " + full);
  }
  return out;
}

inline std::string json_scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw SchemaError(key + " must be a number, string or boolean");
}

inline FlatConfig flatten_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("JSON config must be an object");
  FlatConfig out;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) {
      if (key != "grid" && key != "output") throw SchemaError("unknown section " + key);
      for (const auto& [sub, v] : value.items()) {
        out[key + "." + sub] = json_scalar(key + "." + sub, v);
      }
    } else if (!value.is_null()) {
      out[key] = json_scalar(key, value);
    }
  }
  return out;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text) {
  const std::string t = detail::trim(text);
  const auto flat = !t.empty() && t.front() == '{' ? detail::flatten_json(t) : detail::flatten_ini(t);

  static const std::set<std::string> known{
      "experiment", "n_pairs", "gamma", "theta", "p_strength", "distinguishability", "shots",
      "seed", "grid.start", "grid.stop", "grid.points", "grid.endpoint", "output.path",
      "output.format"};
  for (const auto& [key, value] : flat) {
    if (!known.count(key)) throw SchemaError("unknown key " + key);
  }

  auto get = [&flat](const std::string& key) -> std::optional<std::string> {
    auto it = flat.find(key);
    if (it == flat.end()) return std::nullopt;
    return it->second;
  };
  auto angle = [](const std::string& key, const std::string& v) {
    try {
      return parse_expression(v);
    } catch (const SchemaError& e) {
      throw SchemaError(key + ": " + e.what());
    }
  };

  ScenarioConfig c;
  const auto experiment = get("experiment");
  if (!experiment) throw SchemaError("missing key experiment");
  bool found = false;
  for (const auto& [name, value] : experiment_names()) {
    if (name == *experiment) {
      c.experiment = value;
      found = true;
    }
  }
  if (!found) throw SchemaError("unknown experiment \"" + *experiment + "\"");

  if (auto v = get("n_pairs")) {
    const long long n = parse_integer("n_pairs", *v);
    if (n < 1 || n > kMaxPairs) {
      throw SchemaError("n_pairs must lie in [1, " + std::to_string(kMaxPairs) + "]");
    }
    c.n_pairs = static_cast<int>(n);
  }
  if (auto v = get("gamma")) c.gamma = angle("gamma", *v);
  if (auto v = get("theta")) c.theta = angle("theta", *v);
  if (auto v = get("p_strength")) c.p_strength = angle("p_strength", *v);
  if (auto v = get("distinguishability")) c.distinguishability = angle("distinguishability", *v);
  if (auto v = get("shots")) c.shots = parse_integer("shots", *v);
  if (auto v = get("seed")) c.seed = parse_integer("seed", *v);

  const bool any_grid = get("grid.start") || get("grid.stop") || get("grid.points") ||
                        get("grid.endpoint");
  if (any_grid) {
    Grid g = default_grid(c.experiment);
    if (auto v = get("grid.start")) g.start = angle("grid.start", *v);
    if (auto v = get("grid.stop")) g.stop = angle("grid.stop", *v);
    if (auto v = get("grid.points")) g.points = parse_integer("grid.points", *v);
    if (auto v = get("grid.endpoint")) g.endpoint = parse_bool("grid.endpoint", *v);
    c.grid = g;
  }
  if (auto v = get("output.path")) c.output_path = *v;
  if (auto v = get("output.format")) c.format = parse_format(*v);

  validate(c);
  return c;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return os.str();
}

}  // namespace rsp::cli
