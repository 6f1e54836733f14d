// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// thcf run --config <path> [--preset desk|paper] [--scheme S ...] [--sweep p=v1,v2]
//          [--seeds a,b,c] [--frames n] [--out path] [--format csv|jsonl] [--timing]
// Exit status: 0 success, 1 configuration error, 2 some rows failed.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thcf/harness.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw thcf::ConfigError(what + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-timescale hybrid compression-and-forward simulator"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run a Monte Carlo sweep");

  std::string config_path, preset, sweep, seeds, out, format;
  std::vector<std::string> schemes;
  std::optional<int> frames;
  bool timing = false;
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--preset", preset, "desk | paper");
  run->add_option("--scheme", schemes, "THCF, SCF, ASCF, SSCF, SCF_NO_DELAY (repeatable or comma separated)")
      ->delimiter(',');
  run->add_option("--sweep", sweep, "parameter=v1,v2,...");
  run->add_option("--seeds", seeds, "comma-separated seeds");
  run->add_option("--frames", frames, "override the frame count");
  run->add_option("--out", out, "output path, '-' for stdout");
  run->add_option("--format", format, "csv | jsonl");
  run->add_flag("--timing", timing, "add a wall_time_s column (output no longer reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  thcf::ExperimentConfig config;
  try {
    thcf::apply_thread_config();
    config = thcf::load_config(config_path, preset.empty() ? std::nullopt : std::optional<std::string>(preset));
    if (!schemes.empty()) {
      config.schemes.clear();
      for (const auto& s : schemes) config.schemes.push_back(thcf::parse_scheme(s));
    }
    if (!sweep.empty()) {
      const auto eq = sweep.find('=');
      if (eq == std::string::npos) throw thcf::ConfigError("--sweep: expected parameter=v1,v2,...");
      config.sweep.parameter = sweep.substr(0, eq);
      config.sweep.values.clear();
      for (const auto& v : split(sweep.substr(eq + 1), ',')) config.sweep.values.push_back(parse_number(v, "--sweep"));
    }
    if (!seeds.empty()) {
      config.seeds.clear();
      for (const auto& s : split(seeds, ',')) {
        const double v = parse_number(s, "--seeds");
        if (v < 0 || v != static_cast<double>(static_cast<unsigned long long>(v)))
          throw thcf::ConfigError("--seeds: '" + s + "' is not a nonnegative integer");
        config.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    }
    if (frames) config.scenario.frames = *frames;
    if (!out.empty()) config.output_path = out;
    if (!format.empty()) config.format = format;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    thcf::SweepOptions options;
    options.timing = timing;
    const thcf::ResultTable table = thcf::run_sweep(config, options);
    thcf::emit_results(table, config.output_path, config.format);
    for (const auto& row : table.rows)
      if (!row.error.empty())
        std::cerr << "row failed: " << row.scheme << " " << row.sweep_parameter << "=" << thcf::format_double(row.sweep_value)
                  << " seed " << row.seed << ": " << row.error << "\n";
    return table.has_failures() ? 2 : 0;
  } catch (const thcf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
