#pragma once

// rsp-sim command dispatch, callable in-process. Exit codes:
//   0 success, 1 internal error, 2 schema or usage, 3 zero probability, 4 I/O.
// Failures print one JSON error object on the error stream and leave no
// output file behind.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsp/errors.hpp"
#include "rsp/presets.hpp"
#include "rsp/report.hpp"
#include "rsp/scenario.hpp"

namespace rsp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitSchema = 2,
  kExitZeroProbability = 3,
  kExitIo = 4,
};

inline std::string error_json(int code, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json e;
  e["error"]["exit_code"] = code;
  e["error"]["kind"] = kind;
  e["error"]["message"] = message;
  return e.dump();
}

/// Writes via a sibling temporary so a failed write leaves nothing at `path`.
inline void write_output(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("error while writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into " + target.string());
  }
}

inline void emit(const ScenarioConfig& c, bool stamp, std::ostream& out) {
  const auto record = run_scenario(c, stamp);
  const std::string text = serialize(record, c.format);
  if (c.output_path) {
    write_output(*c.output_path, text);
  } else {
    out << text;
  }
}

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator of heralded remote preparation of 2n-1 photon states", "rsp-sim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  std::string config_path;
  bool run_stamp = false;
  auto* run = app.add_subcommand("run", "Run a scenario config (key = value or JSON)");
  run->add_option("config", config_path, "Scenario file")->required();
  run->add_flag("--timestamp", run_stamp, "Record the UTC run time (breaks byte identity)");

  std::string preset_name, out_path, format;
  std::optional<long long> shots, seed;
  bool preset_stamp = false;
  auto* preset = app.add_subcommand("preset", "Run a shipped preset");
  preset->add_option("name", preset_name, "Preset name (see list-presets)")->required();
  preset->add_option("--out", out_path, "Output file (default: stdout)");
  preset->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  preset->add_option("--shots", shots, "Sampled events per setting");
  preset->add_option("--seed", seed, "Seed for the sampler");
  preset->add_flag("--timestamp", preset_stamp, "Record the UTC run time (breaks byte identity)");

  app.add_subcommand("list-presets", "Print the preset names");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolName << " " << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_json(kExitSchema, "usage", e.what()) << "\n";
    return kExitSchema;
  }

  try {
    if (app.got_subcommand("list-presets")) {
      for (const auto& name : preset_names()) out << name << "\n";
      return kExitOk;
    }
    if (run->parsed()) {
      emit(parse_scenario(read_file(config_path)), run_stamp, out);
      return kExitOk;
    }
    ScenarioConfig c = load_preset(preset_name);
    if (!out_path.empty()) c.output_path = out_path;
    if (!format.empty()) c.format = parse_format(format);
    if (shots) c.shots = *shots;
    if (seed) c.seed = *seed;
    validate(c);
    emit(c, preset_stamp, out);
    return kExitOk;
  } catch (const SchemaError& e) {
    err << error_json(kExitSchema, "schema", e.what()) << "\n";
    return kExitSchema;
  } catch (const ZeroProbability& e) {
    err << error_json(kExitZeroProbability, "zero_probability", e.what()) << "\n";
    return kExitZeroProbability;
  } catch (const IoError& e) {
    err << error_json(kExitIo, "io", e.what()) << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << error_json(kExitInternal, "internal", e.what()) << "\n";
    return kExitInternal;
  }
}

}  // namespace rsp::cli
