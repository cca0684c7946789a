#pragma once

// Runs one scenario into a ResultRecord and serializes it. Column names and
// JSON keys are part of the interface; see schema/result.schema.json.

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rsp/analysis.hpp"
#include "rsp/errors.hpp"
#include "rsp/protocol.hpp"
#include "rsp/sampling.hpp"
#include "rsp/scenario.hpp"

namespace rsp::cli {

inline constexpr const char* kToolName = "rsp-sim";
inline constexpr const char* kToolVersion = "0.1.0";

using Cell = std::variant<long long, double, bool, std::string>;

struct ResultRecord {
  ScenarioConfig scenario;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> summary;
  std::optional<std::string> timestamp;  // UTC, only when requested
};

namespace detail {

inline std::string bob_label(const Occupation& occ) {
  return "|" + std::to_string(occ[0]) + "H," + std::to_string(occ[1]) + "V>";
}

inline std::uint64_t seed_of(const ScenarioConfig& c) {
  return static_cast<std::uint64_t>(c.seed.value_or(0));
}

inline RspSettings settings_of(const ScenarioConfig& c) {
  return {c.n_pairs, c.gamma, c.theta, c.p_strength, c.distinguishability};
}

inline void run_chsh(const ScenarioConfig& c, ResultRecord& r) {
  // White noise of strength p on the heralded 2x2 block.
  const auto shared = shared_state(c.n_pairs);
  const int n = c.n_pairs;
  const std::vector<Occupation> block{{1, 0, n, n - 1}, {1, 0, n - 1, n},
                                      {0, 1, n, n - 1}, {0, 1, n - 1, n}};
  const auto rho = white_noise(to_density(shared.conditional).in_basis(block), c.p_strength);

  r.columns = {"term", "alice_observable", "bob_observable", "alice_plus_angle",
               "alice_minus_angle", "bob_plus_angle", "bob_minus_angle", "p_pp", "p_pm",
               "p_mp", "p_mm", "correlation", "correlation_counts"};
  if (c.shots) {
    for (const char* k : {"n_pp", "n_pm", "n_mp", "n_mm", "correlation_sampled"}) {
      r.columns.emplace_back(k);
    }
  }
  const auto table = chsh_angle_settings();
  const std::array<std::pair<int, int>, 4> terms{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
  std::array<double, 4> op{}, counts{}, sampled{};
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& a = table[static_cast<std::size_t>(terms[t].first)];
    const auto& b = table[static_cast<std::size_t>(terms[t].second)];
    const auto p = expected_counts(rho, a, b);
    op[t] = correlation(rho, observable(a.kind), observable(b.kind));
    counts[t] = p.correlation();
    std::vector<Cell> row{static_cast<long long>(t + 1), to_string(a.kind), to_string(b.kind),
                          a.plus_angle, a.minus_angle, b.plus_angle, b.minus_angle,
                          p.pp, p.pm, p.mp, p.mm, op[t], counts[t]};
    if (c.shots) {
      const auto s = sample_counts(p, static_cast<std::uint64_t>(*c.shots), seed_of(c) + t);
      sampled[t] = s.correlation();
      for (double v : {s.pp, s.pm, s.mp, s.mm}) row.emplace_back(static_cast<long long>(v));
      row.emplace_back(sampled[t]);
    }
    r.rows.push_back(std::move(row));
  }
  r.summary = {{"s_chsh", chsh_combination(op)},
               {"s_chsh_counts", chsh_combination(counts)},
               {"herald_probability", shared.probability}};
  if (c.shots) r.summary.emplace_back("s_chsh_sampled", chsh_combination(sampled));
}

inline void run_fringe(const ScenarioConfig& c, ResultRecord& r) {
  const FringeAxis axis =
      c.experiment == Experiment::phase_fringe ? FringeAxis::phase_phi : FringeAxis::angle_delta;
  const auto out = rsp_mixed(settings_of(c));
  const auto grid = c.grid.value_or(default_grid(c.experiment)).values();
  std::vector<double> prob;
  for (double g : grid) {
    const Projector k = axis == FringeAxis::phase_phi
                            ? bob_analyzer(c.n_pairs, std::numbers::pi / 8, g)
                            : bob_analyzer(c.n_pairs, g, 0.0);
    prob.push_back(out.bob_state.expectation(k.target()));
  }
  double peak = 0.0;
  for (double p : prob) peak = std::max(peak, p);
  if (peak < kZeroProbability) {
    throw ZeroProbability("fringe probability vanishes on the whole grid", peak);
  }
  const auto scan = fit_fringe(axis, grid, prob);

  r.columns = {axis == FringeAxis::phase_phi ? "phi" : "delta", "probability"};
  std::optional<SampledFringe> sampled;
  if (c.shots) {
    r.columns.emplace_back("counts");
    sampled = sample_fringe(scan, static_cast<std::uint64_t>(*c.shots), seed_of(c));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Cell> row{grid[i], prob[i]};
    if (sampled) row.emplace_back(static_cast<long long>(sampled->counts[i]));
    r.rows.push_back(std::move(row));
  }
  r.summary = {{"visibility", scan.fitted_visibility},
               {"offset", scan.fitted_offset},
               {"flat", scan.flat},
               {"herald_probability", out.herald_probability},
               {"alice_probability", out.alice_probability}};
  if (sampled) {
    r.summary.emplace_back("sampled_visibility", sampled->scan.fitted_visibility);
    r.summary.emplace_back("sampled_offset", sampled->scan.fitted_offset);
  }
}

inline double max_entry_error(const DensityOperator& a, const DensityOperator& b) {
  return (a.matrix() - b.in_basis(a.basis()).matrix()).cwiseAbs().maxCoeff();
}

inline void run_mixed(const ScenarioConfig& c, ResultRecord& r) {
  const int n = c.n_pairs;
  const double alpha = std::sin(2 * c.gamma), beta = std::cos(2 * c.gamma);
  const FockState psi = ideal_remote_state(n, alpha, beta, c.theta);
  std::vector<double> ps{c.p_strength};
  if (c.grid) ps = c.grid->values();

  r.columns = {"p", "rho_00", "rho_01_re", "rho_01_im", "rho_11", "purity", "fidelity",
               "max_entry_error"};
  double worst = 0.0;
  for (double p : ps) {
    RspSettings s = settings_of(c);
    s.p_strength = p;
    const auto out = rsp_mixed(s);
    const auto& m = out.bob_state.matrix();
    const auto pf = purity_and_fidelity(out.bob_state, psi);
    const double err = max_entry_error(out.bob_state, ideal_mixed_state(n, alpha, beta, c.theta, p));
    worst = std::max(worst, err);
    r.rows.push_back({p, m(0, 0).real(), m(0, 1).real(), m(0, 1).imag(), m(1, 1).real(),
                      pf.purity, pf.fidelity, err});
  }
  const auto at = purity_and_fidelity(rsp_mixed(settings_of(c)).bob_state, psi);
  r.summary = {{"purity", at.purity},
               {"fidelity", at.fidelity},
               {"purity_closed_form", (1 + c.p_strength * c.p_strength) / 2},
               {"fidelity_closed_form", (1 + c.p_strength) / 2},
               {"max_entry_error", worst}};
}

inline void append_sampled_populations(const ScenarioConfig& c, ResultRecord& r,
                                       const std::vector<double>& pops) {
  if (!c.shots) return;
  r.columns.emplace_back("counts");
  const auto k = sample_multinomial(pops, static_cast<std::uint64_t>(*c.shots), seed_of(c));
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    r.rows[i].emplace_back(static_cast<long long>(k[i]));
  }
}

inline void run_populations(const ScenarioConfig& c, ResultRecord& r) {
  const auto out = rsp_mixed(settings_of(c));
  const auto pops = component_populations(out.bob_state);
  const auto basis = bob_basis(c.n_pairs);
  r.columns = {"component", "n_h", "n_v", "population"};
  double total = 0.0, outside = 0.0;
  std::vector<double> values;
  // Descending H count: |2n-1,0>, ..., |0,2n-1>.
  for (auto it = pops.rbegin(); it != pops.rend(); ++it) {
    const auto& [occ, p] = *it;
    r.rows.push_back({bob_label(occ), static_cast<long long>(occ[0]),
                      static_cast<long long>(occ[1]), p});
    values.push_back(std::max(p, 0.0));
    total += p;
    if (occ != basis[0] && occ != basis[1]) outside += p;
  }
  append_sampled_populations(c, r, values);
  r.summary = {{"population_sum", total}, {"outside_basis", outside}};
}

inline void run_general_n(const ScenarioConfig& c, ResultRecord& r) {
  r.columns = {"n", "photons_at_bob", "herald_probability", "alice_probability",
               "pure_overlap", "max_entry_error", "purity", "fidelity"};
  const double alpha = std::sin(2 * c.gamma), beta = std::cos(2 * c.gamma);
  double min_overlap = 1.0, worst = 0.0;
  for (int n = 1; n <= c.n_pairs; ++n) {
    RspSettings s = settings_of(c);
    s.n_pairs = n;
    s.p_strength = 1.0;
    const double overlap = std::abs(inner_product(ideal_remote_state(n, alpha, beta, c.theta),
                                                  remote_ket(s)));
    s.p_strength = c.p_strength;
    const auto out = rsp_mixed(s);
    const double err = max_entry_error(out.bob_state,
                                       ideal_mixed_state(n, alpha, beta, c.theta, c.p_strength));
    const auto pf = purity_and_fidelity(out.bob_state, ideal_remote_state(n, alpha, beta, c.theta));
    min_overlap = std::min(min_overlap, overlap);
    worst = std::max(worst, err);
    r.rows.push_back({static_cast<long long>(n), static_cast<long long>(2 * n - 1),
                      out.herald_probability, out.alice_probability, overlap, err, pf.purity,
                      pf.fidelity});
  }
  r.summary = {{"min_pure_overlap", min_overlap}, {"max_entry_error", worst}};
}

inline void run_distinguishability(const ScenarioConfig& c, ResultRecord& r) {
  const auto rep = distinguishability_demo(settings_of(c));
  r.columns = {"component", "population"};
  std::vector<double> values;
  for (auto it = rep.populations.rbegin(); it != rep.populations.rend(); ++it) {
    r.rows.push_back({format_occupation(rep.modes, it->first), it->second});
    values.push_back(std::max(it->second, 0.0));
  }
  append_sampled_populations(c, r, values);
  r.summary = {{"tilde_population", rep.tilde_population},
               {"principal_population", rep.principal_population},
               {"mixed_outside_support", rep.mixed_outside_support}};
}

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Throws SchemaError, ZeroProbability or std::exception on failure.
inline ResultRecord run_scenario(const ScenarioConfig& c, bool stamp = false) {
  validate(c);
  ResultRecord r{c, {}, {}, {}, std::nullopt};
  switch (c.experiment) {
    case Experiment::chsh: detail::run_chsh(c, r); break;
    case Experiment::phase_fringe:
    case Experiment::amplitude_fringe: detail::run_fringe(c, r); break;
    case Experiment::mixed_state: detail::run_mixed(c, r); break;
    case Experiment::populations: detail::run_populations(c, r); break;
    case Experiment::general_n: detail::run_general_n(c, r); break;
    case Experiment::distinguishability_demo: detail::run_distinguishability(c, r); break;
  }
  if (stamp) r.timestamp = detail::utc_now();
  return r;
}

// ---------------------------------------------------------------------------
// Serialization.

/// 12 significant digits, no negative zero.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  if (std::string(buf) == "-0") return "0";
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          // Same 12 significant digits as the CSV.
          return std::stod(format_number(v));
        } else {
          return v;
        }
      },
      c);
}

/// Ordered key/value echo of the resolved scenario.
inline std::vector<std::pair<std::string, Cell>> scenario_echo(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, Cell>> e{
      {"experiment", to_string(c.experiment)},
      {"n_pairs", static_cast<long long>(c.n_pairs)},
      {"gamma", c.gamma},
      {"theta", c.theta},
      {"p_strength", c.p_strength},
      {"distinguishability", c.distinguishability}};
  if (c.grid) {
    e.emplace_back("grid.start", c.grid->start);
    e.emplace_back("grid.stop", c.grid->stop);
    e.emplace_back("grid.points", c.grid->points);
    e.emplace_back("grid.endpoint", c.grid->endpoint);
  }
  if (c.shots) {
    e.emplace_back("shots", *c.shots);
    e.emplace_back("seed", c.seed.value_or(0));
  }
  return e;
}

}  // namespace detail

/// Comment lines (scenario echo, then summary), header row, one row per point.
inline std::string to_csv(const ResultRecord& r) {
  std::ostringstream os;
  os << "# tool=" << kToolName << " " << kToolVersion << "\n";
  if (r.timestamp) os << "# timestamp=" << *r.timestamp << "\n";
  for (const auto& [k, v] : detail::scenario_echo(r.scenario)) {
    os << "# scenario." << k << "=" << detail::cell_text(v) << "\n";
  }
  for (const auto& [k, v] : r.summary) {
    os << "# summary." << k << "=" << detail::cell_text(v) << "\n";
  }
  for (std::size_t i = 0; i < r.columns.size(); ++i) {
    os << (i ? "," : "") << detail::csv_field(r.columns[i]);
  }
  os << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << detail::csv_field(detail::cell_text(row[i]));
    }
    os << "\n";
  }
  return os.str();
}

inline std::string to_json(const ResultRecord& r) {
  nlohmann::ordered_json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["timestamp"] = r.timestamp ? nlohmann::ordered_json(*r.timestamp) : nullptr;
  nlohmann::ordered_json scenario = nlohmann::ordered_json::object();
  for (const auto& [k, v] : detail::scenario_echo(r.scenario)) {
    if (k.rfind("grid.", 0) == 0) {
      scenario["grid"][k.substr(5)] = detail::cell_json(v);
    } else {
      scenario[k] = detail::cell_json(v);
    }
  }
  doc["scenario"] = scenario;
  doc["columns"] = r.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[r.columns[i]] = detail::cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.summary) summary[k] = detail::cell_json(v);
  doc["summary"] = std::move(summary);
  return doc.dump(2) + "\n";
}

inline std::string serialize(const ResultRecord& r, OutputFormat f) {
  return f == OutputFormat::csv ? to_csv(r) : to_json(r);
}

}  // namespace rsp::cli
