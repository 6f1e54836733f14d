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

#include "thcf/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace thcf {

using nlohmann::json;

namespace {

const std::set<std::string> kSweepParameters{"none", "fronthaul_capacity", "antennas_per_rrh", "csi_delay_ms"};

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + (path.empty() ? item.key() : path + "." + item.key()) + "'");
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void read_number(const json& obj, const std::string& path, const std::string& key, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  out = v.get<double>();
}

void read_int(const json& obj, const std::string& path, const std::string& key, int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
  out = v.get<int>();
}

void read_string(const json& obj, const std::string& path, const std::string& key, std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
  out = v.get<std::string>();
}

void parse_scenario(const json& s, ScenarioConfig& sc) {
  const std::string p = "scenario";
  reject_unknown(s, p,
                 {"N", "K", "M", "S", "paths", "cell_radius_m", "angle_spread_deg", "bandwidth_hz", "noise_psd_dbm_hz",
                  "user_power_dbm", "carrier_hz", "speed_kmh", "slot_ms", "slots_per_frame", "frames", "csi_delay_ms",
                  "fronthaul_mbps"});
  read_int(s, p, "N", sc.dims.N);
  read_int(s, p, "K", sc.dims.K);
  read_int(s, p, "M", sc.dims.M);
  read_int(s, p, "S", sc.dims.S);
  read_int(s, p, "paths", sc.paths);
  read_number(s, p, "cell_radius_m", sc.cell_radius_m);
  read_number(s, p, "angle_spread_deg", sc.angle_spread_deg);
  read_number(s, p, "bandwidth_hz", sc.bandwidth_hz);
  read_number(s, p, "noise_psd_dbm_hz", sc.noise_psd_dbm_hz);
  read_number(s, p, "user_power_dbm", sc.user_power_dbm);
  read_number(s, p, "carrier_hz", sc.carrier_hz);
  read_number(s, p, "speed_kmh", sc.speed_kmh);
  double slot_ms = sc.slot_s * 1e3, delay_ms = sc.csi_delay_s * 1e3, mbps = sc.fronthaul_bps / 1e6;
  read_number(s, p, "slot_ms", slot_ms);
  read_number(s, p, "csi_delay_ms", delay_ms);
  read_number(s, p, "fronthaul_mbps", mbps);
  sc.slot_s = slot_ms * 1e-3;
  sc.csi_delay_s = delay_ms * 1e-3;
  sc.fronthaul_bps = mbps * 1e6;
  read_int(s, p, "slots_per_frame", sc.slots_per_frame);
  read_int(s, p, "frames", sc.frames);
}

void parse_utility(const json& u, UtilitySpec& spec) {
  reject_unknown(u, "utility", {"kind", "pfs_epsilon"});
  std::string kind = spec.kind == UtilitySpec::Kind::kSumRate ? "sum_rate" : "pfs";
  read_string(u, "utility", "kind", kind);
  if (kind == "sum_rate") spec.kind = UtilitySpec::Kind::kSumRate;
  else if (kind == "pfs") spec.kind = UtilitySpec::Kind::kProportionalFair;
  else throw ConfigError("utility.kind: expected 'pfs' or 'sum_rate'");
  read_number(u, "utility", "pfs_epsilon", spec.pfs_epsilon);
}

void parse_schedules(const json& s, ScheduleSpec& sp) {
  const std::string p = "schedules";
  reject_unknown(s, p, {"rho_scale", "rho_exponent", "gamma_scale", "gamma_exponent", "J0", "J_period", "J_cap", "tau"});
  read_number(s, p, "rho_scale", sp.rho_scale);
  read_number(s, p, "rho_exponent", sp.rho_exponent);
  read_number(s, p, "gamma_scale", sp.gamma_scale);
  read_number(s, p, "gamma_exponent", sp.gamma_exponent);
  read_int(s, p, "J0", sp.J0);
  read_int(s, p, "J_period", sp.J_period);
  read_int(s, p, "J_cap", sp.J_cap);
  read_number(s, p, "tau", sp.tau);
}

void validate(const ExperimentConfig& c) {
  const auto& sc = c.scenario;
  const auto& d = sc.dims;
  if (d.N < 1 || d.K < 1 || d.M < 1 || d.S < 1) throw ConfigError("scenario: N, K, M, S must be >= 1");
  if (d.S > d.M) throw ConfigError("scenario.S: RF chains cannot exceed antennas");
  if (sc.paths < 1) throw ConfigError("scenario.paths: must be >= 1");
  if (!(sc.cell_radius_m > 0) || !(sc.bandwidth_hz > 0) || !(sc.slot_s > 0))
    throw ConfigError("scenario: cell_radius_m, bandwidth_hz and slot_ms must be positive");
  if (sc.carrier_hz < 0 || sc.speed_kmh < 0 || sc.csi_delay_s < 0 || sc.fronthaul_bps < 0)
    throw ConfigError("scenario: carrier, speed, delay and fronthaul must be nonnegative");
  if (sc.slots_per_frame < 1 || sc.frames < 1) throw ConfigError("scenario: slots_per_frame and frames must be >= 1");
  if (c.utility.kind == UtilitySpec::Kind::kProportionalFair && !(c.utility.pfs_epsilon > 0))
    throw ConfigError("utility.pfs_epsilon: must be positive");
  try {
    c.schedules.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(c.epsilon > 0)) throw ConfigError("solver.epsilon: must be positive");
  if (c.burn_in_frames < 0) throw ConfigError("solver.burn_in_frames: must be >= 0");
  if (c.schemes.empty()) throw ConfigError("schemes: must be non-empty");
  if (c.seeds.empty()) throw ConfigError("seeds: must be non-empty");
  if (!kSweepParameters.count(c.sweep.parameter)) throw ConfigError("sweep.parameter: unknown '" + c.sweep.parameter + "'");
  if (c.sweep.values.empty()) throw ConfigError("sweep.values: must be non-empty");
  if (c.format != "csv" && c.format != "jsonl") throw ConfigError("output.format: expected 'csv' or 'jsonl'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(std::stod(format_double(v))) : json(nullptr); }

double number_from(const json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); }

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.schemes = all_schemes();
  c.sweep.values = {0.0};
  c.seeds = {1, 2, 3, 4, 5};
  return c;
}

void apply_preset(ExperimentConfig& c, const std::string& preset) {
  if (preset == "paper") {
    const ExperimentConfig d = default_config();
    c.scenario = d.scenario;
    c.schedules = d.schedules;
    return;
  }
  if (preset != "desk") throw ConfigError("preset: expected 'desk' or 'paper', got '" + preset + "'");
  c.scenario.dims = Dimensions{2, 16, 4, 4};
  c.scenario.frames = 200;
  // Half the streams of the full network, so half the fronthaul keeps the
  // per-stream bit budget of the full-scale 64 Mbps operating point.
  c.scenario.fronthaul_bps = 32.0e6;
  // 200 frames is too short for the slow default decay; these settle r-hat
  // and mu within the horizon.
  c.schedules.tau = 0.02;
  c.schedules.rho_exponent = 0.9;
  c.schedules.gamma_scale = 15.0;
  c.schedules.gamma_exponent = 1.0;
}

ExperimentConfig parse_config(const std::string& json_text, const std::optional<std::string>& preset) {
  ExperimentConfig c = default_config();
  json root = json::object();
  const bool blank = json_text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    try {
      root = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
  }
  reject_unknown(root, "", {"comment", "preset", "scenario", "utility", "schedules", "solver", "schemes", "sweep", "seeds", "output"});
  std::string file_preset, comment;
  read_string(root, "", "comment", comment);  // free text, e.g. a license line
  read_string(root, "", "preset", file_preset);
  if (preset) apply_preset(c, *preset);
  else if (!file_preset.empty()) apply_preset(c, file_preset);

  if (root.contains("scenario")) parse_scenario(root.at("scenario"), c.scenario);
  if (root.contains("utility")) parse_utility(root.at("utility"), c.utility);
  if (root.contains("schedules")) parse_schedules(root.at("schedules"), c.schedules);
  if (root.contains("solver")) {
    const json& s = root.at("solver");
    reject_unknown(s, "solver", {"epsilon", "burn_in_frames"});
    read_number(s, "solver", "epsilon", c.epsilon);
    read_int(s, "solver", "burn_in_frames", c.burn_in_frames);
  }
  if (root.contains("schemes")) {
    const json& s = root.at("schemes");
    if (!s.is_array()) throw ConfigError("schemes: expected an array of names");
    c.schemes.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "schemes[" + std::to_string(i) + "]";
      if (!s[i].is_string()) throw ConfigError(path + ": expected a string");
      try {
        c.schemes.push_back(parse_scheme(s[i].get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError(path + ": " + e.what());
      }
    }
  }
  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    reject_unknown(s, "sweep", {"parameter", "values"});
    read_string(s, "sweep", "parameter", c.sweep.parameter);
    if (s.contains("values")) {
      const json& v = s.at("values");
      if (!v.is_array()) throw ConfigError("sweep.values: expected an array of numbers");
      c.sweep.values.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError("sweep.values[" + std::to_string(i) + "]: expected a number");
        c.sweep.values.push_back(v[i].get<double>());
      }
    }
  }
  if (root.contains("seeds")) {
    const json& s = root.at("seeds");
    if (!s.is_array()) throw ConfigError("seeds: expected an array of integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number_unsigned() && !(s[i].is_number_integer() && s[i].get<long long>() >= 0))
        throw ConfigError("seeds[" + std::to_string(i) + "]: expected a nonnegative integer");
      c.seeds.push_back(s[i].get<std::uint64_t>());
    }
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    reject_unknown(o, "output", {"path", "format"});
    read_string(o, "output", "path", c.output_path);
    read_string(o, "output", "format", c.format);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::optional<std::string>& preset) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), preset);
}

void normalize_budget(ScenarioConfig& sc, std::vector<std::string>& warnings) {
  const double bits = sc.bit_budget();
  const double whole = std::floor(bits + 1e-9);
  if (std::abs(bits - whole) > 1e-9 * std::max(1.0, bits)) {
    const double floored = whole * 2.0 * sc.bandwidth_hz;
    warnings.push_back("fronthaul capacity " + format_double(sc.fronthaul_bps) + " bit/s floored to " +
                       format_double(floored) + " bit/s (whole bits per channel use)");
    sc.fronthaul_bps = floored;
  }
}

ScenarioConfig scenario_for(const ExperimentConfig& config, double value) {
  ScenarioConfig sc = config.scenario;
  const std::string& p = config.sweep.parameter;
  if (p == "fronthaul_capacity") {
    sc.fronthaul_bps = value * 1e6;
  } else if (p == "antennas_per_rrh") {
    if (value < 1 || value != std::floor(value)) throw Error("antennas_per_rrh must be a positive integer");
    sc.dims.M = static_cast<int>(value);
    if (sc.dims.S > sc.dims.M) throw Error("antennas_per_rrh below the RF chain count");
  } else if (p == "csi_delay_ms") {
    if (value < 0) throw Error("csi_delay_ms must be nonnegative");
    sc.csi_delay_s = value * 1e-3;
  }
  return sc;
}

bool ResultTable::has_failures() const {
  for (const auto& r : rows)
    if (!r.error.empty()) return true;
  return false;
}

RateSummary summarize_rates(const std::vector<RVec>& rates, int burn_in_slots, double pfs_epsilon) {
  const int total = static_cast<int>(rates.size());
  const int start = std::min(std::max(0, burn_in_slots), total - 1);
  if (total == 0) throw Error("summarize_rates: empty rate log");
  RVec mean = RVec::Zero(rates.front().size());
  for (int i = start; i < total; ++i) mean += rates[static_cast<std::size_t>(i)];
  mean /= static_cast<double>(total - start);
  RateSummary s;
  s.sum_rate = mean.sum();
  s.worst_user_rate = mean.minCoeff();
  s.pfs_utility = (mean.array() + pfs_epsilon).log().sum();
  return s;
}

ResultTable run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  validate(config);
  struct Job {
    SchemeId scheme;
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (SchemeId s : config.schemes)
    for (double v : config.sweep.values)
      for (std::uint64_t seed : config.seeds) jobs.push_back({s, v, seed});

  ResultTable table;
  table.rows.resize(jobs.size());
  std::vector<std::vector<std::string>> warnings(jobs.size());
  for_each_index(static_cast<int>(jobs.size()), options.exec, [&](int j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    ResultRow& row = table.rows[static_cast<std::size_t>(j)];
    row.scheme = scheme_name(job.scheme);
    row.sweep_parameter = config.sweep.parameter;
    row.sweep_value = job.value;
    row.seed = job.seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      ScenarioConfig sc = scenario_for(config, job.value);
      normalize_budget(sc, warnings[static_cast<std::size_t>(j)]);
      const Scenario scenario = make_scenario(sc, job.seed);
      EngineOptions opt = scheme_options(job.scheme, sc);
      opt.epsilon = config.epsilon;
      opt.burn_in_frames = config.burn_in_frames;
      opt.exec = options.exec;
      const RunResult res = run_two_timescale(scenario, config.utility, config.schedules, opt, job.seed);
      const double eps = config.utility.pfs_epsilon;
      const RateSummary integer = summarize_rates(res.integer_rates, res.burn_in_slots, eps);
      const RateSummary relaxed = summarize_rates(res.relaxed_rates, res.burn_in_slots, eps);
      row.sum_rate = integer.sum_rate;
      row.worst_user_rate = integer.worst_user_rate;
      row.pfs_utility = integer.pfs_utility;
      row.relaxed_sum_rate = relaxed.sum_rate;
      row.relaxed_worst_user_rate = relaxed.worst_user_rate;
      row.relaxed_pfs_utility = relaxed.pfs_utility;
      row.frames = static_cast<int>(res.frames.size());
      row.burn_in_slots = res.burn_in_slots;
      row.channel_hash = hex64(res.channel_hash);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.sum_rate = row.worst_user_rate = row.pfs_utility = nan;
      row.relaxed_sum_rate = row.relaxed_worst_user_rate = row.relaxed_pfs_utility = nan;
      row.error = e.what();
    }
    if (options.timing)
      row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  std::set<std::string> seen;
  for (const auto& w : warnings)
    for (const auto& msg : w)
      if (seen.insert(msg).second) std::cerr << "warning: " << msg << "\n";
  return table;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_results(const ResultTable& table, const std::string& format) {
  const bool timing = !table.rows.empty() && table.rows.front().wall_time_s.has_value();
  std::ostringstream out;
  if (format == "csv") {
    out << "scheme,sweep_parameter,sweep_value,seed,sum_rate,worst_user_rate,pfs_utility,relaxed_sum_rate,"
           "relaxed_worst_user_rate,relaxed_pfs_utility,frames,burn_in_slots,channel_hash,error";
    if (timing) out << ",wall_time_s";
    out << "\r\n";
    for (const auto& r : table.rows) {
      out << csv_field(r.scheme) << ',' << csv_field(r.sweep_parameter) << ',' << format_double(r.sweep_value) << ','
          << r.seed << ',' << format_double(r.sum_rate) << ',' << format_double(r.worst_user_rate) << ','
          << format_double(r.pfs_utility) << ',' << format_double(r.relaxed_sum_rate) << ','
          << format_double(r.relaxed_worst_user_rate) << ',' << format_double(r.relaxed_pfs_utility) << ','
          << r.frames << ',' << r.burn_in_slots << ',' << csv_field(r.channel_hash) << ',' << csv_field(r.error);
      if (timing) out << ',' << format_double(r.wall_time_s.value_or(0.0));
      out << "\r\n";
    }
    return out.str();
  }
  if (format == "jsonl") {
    for (const auto& r : table.rows) {
      json j = json::object();
      j["scheme"] = r.scheme;
      j["sweep_parameter"] = r.sweep_parameter;
      j["sweep_value"] = number_or_null(r.sweep_value);
      j["seed"] = r.seed;
      j["sum_rate"] = number_or_null(r.sum_rate);
      j["worst_user_rate"] = number_or_null(r.worst_user_rate);
      j["pfs_utility"] = number_or_null(r.pfs_utility);
      j["relaxed_sum_rate"] = number_or_null(r.relaxed_sum_rate);
      j["relaxed_worst_user_rate"] = number_or_null(r.relaxed_worst_user_rate);
      j["relaxed_pfs_utility"] = number_or_null(r.relaxed_pfs_utility);
      j["frames"] = r.frames;
      j["burn_in_slots"] = r.burn_in_slots;
      j["channel_hash"] = r.channel_hash;
      j["error"] = r.error;
      if (r.wall_time_s) j["wall_time_s"] = number_or_null(*r.wall_time_s);
      out << j.dump() << "\n";
    }
    return out.str();
  }
  throw Error("format_results: unknown format '" + format + "'");
}

void emit_results(const ResultTable& table, const std::string& path, const std::string& format) {
  if (table.rows.empty()) throw Error("emit_results: empty table");
  const std::string text = format_results(table, format);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error("emit_results: write to stdout failed");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit_results: cannot open '" + path + "'");
  out << text;
  out.close();
  if (!out) throw Error("emit_results: write to '" + path + "' failed");
}

ResultTable parse_jsonl(const std::string& text) {
  ResultTable table;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    ResultRow r;
    r.scheme = j.at("scheme").get<std::string>();
    r.sweep_parameter = j.at("sweep_parameter").get<std::string>();
    r.sweep_value = number_from(j.at("sweep_value"));
    r.seed = j.at("seed").get<std::uint64_t>();
    r.sum_rate = number_from(j.at("sum_rate"));
    r.worst_user_rate = number_from(j.at("worst_user_rate"));
    r.pfs_utility = number_from(j.at("pfs_utility"));
    r.relaxed_sum_rate = number_from(j.at("relaxed_sum_rate"));
    r.relaxed_worst_user_rate = number_from(j.at("relaxed_worst_user_rate"));
    r.relaxed_pfs_utility = number_from(j.at("relaxed_pfs_utility"));
    r.frames = j.at("frames").get<int>();
    r.burn_in_slots = j.at("burn_in_slots").get<int>();
    r.channel_hash = j.at("channel_hash").get<std::string>();
    r.error = j.at("error").get<std::string>();
    if (j.contains("wall_time_s")) r.wall_time_s = number_from(j.at("wall_time_s"));
    table.rows.push_back(std::move(r));
  }
  return table;
}

}  // namespace thcf
