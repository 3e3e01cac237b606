#pragma once

#include <map>
#include <sstream>
#include <string>

#include "mptrack/poly.hpp"
#include "mptrack/tracker.hpp"

namespace mptrack {

/// A full batch-run configuration: tracker parameters plus the error-model
/// choices the tracker itself does not own.
struct RunConfig {
  TrackerConfig tracker;
  int sigma1 = 0;
  int sigma2 = 0;
  double eps_E = 0;  // 0 = default n^2
  CoeffBounds::Source bounds = CoeffBounds::Source::coeff_formula;
  double psi_user = 0;
  double phi_user = 0;
  int jobs = 1;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Flat `key = value` configuration text, `#` comments, every key optional.
/// Unknown keys are rejected.
inline RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool tau_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    auto bad = [&](const std::string& why) {
      return std::runtime_error("config line " + std::to_string(lineno) + ": " + why);
    };
    try {
      if (key == "mode") {
        if (val == "adaptive") cfg.tracker.mode = TrackMode::adaptive;
        else if (val == "fixed") cfg.tracker.mode = TrackMode::fixed;
        else if (val == "rerun") cfg.tracker.mode = TrackMode::rerun;
        else throw bad("mode must be adaptive, fixed, or rerun");
      } else if (key == "bits") {
        cfg.tracker.fixed_bits = std::stoi(val);
      } else if (key == "ladder") {
        cfg.tracker.ladder.clear();
        for (const std::string& p : detail::split(val, ',')) {
          cfg.tracker.ladder.push_back(std::stoi(detail::trim(p)));
        }
      } else if (key == "tau") {
        cfg.tracker.tau.entries = {{1.0, std::stod(val)}};
        tau_seen = true;
      } else if (key == "tau_schedule") {
        cfg.tracker.tau.entries.clear();
        for (const std::string& p : detail::split(val, ',')) {
          auto kv = detail::split(detail::trim(p), ':');
          if (kv.size() != 2) throw bad("tau_schedule entries are t:tau");
          cfg.tracker.tau.entries.emplace_back(std::stod(detail::trim(kv[0])),
                                               std::stod(detail::trim(kv[1])));
        }
        tau_seen = true;
      } else if (key == "sigma1") {
        cfg.sigma1 = std::stoi(val);
      } else if (key == "sigma2") {
        cfg.sigma2 = std::stoi(val);
      } else if (key == "N") {
        cfg.tracker.N = std::stoi(val);
      } else if (key == "a") {
        cfg.tracker.a = std::stod(val);
      } else if (key == "M") {
        cfg.tracker.M = std::stoi(val);
      } else if (key == "s_init") {
        cfg.tracker.s_init = std::stod(val);
      } else if (key == "s_min") {
        cfg.tracker.s_min = std::stod(val);
      } else if (key == "max_steps") {
        cfg.tracker.max_steps = std::stol(val);
      } else if (key == "t_end") {
        cfg.tracker.t_end = std::stod(val);
      } else if (key == "stop_mode") {
        if (val == "prediction_agreement") cfg.tracker.stop_mode = StopMode::prediction_agreement;
        else if (val == "reach_t_end") cfg.tracker.stop_mode = StopMode::reach_t_end;
        else throw bad("stop_mode must be prediction_agreement or reach_t_end");
      } else if (key == "eps_E") {
        cfg.eps_E = std::stod(val);
      } else if (key == "error_model") {
        if (val == "coeff_formula") cfg.bounds = CoeffBounds::Source::coeff_formula;
        else if (val == "slp_accumulate") cfg.bounds = CoeffBounds::Source::slp_accumulated;
        else if (val == "user") cfg.bounds = CoeffBounds::Source::user_supplied;
        else throw bad("error_model must be coeff_formula, slp_accumulate, or user");
      } else if (key == "psi") {
        cfg.psi_user = std::stod(val);
      } else if (key == "phi") {
        cfg.phi_user = std::stod(val);
      } else if (key == "seed") {
        cfg.tracker.seed = std::stoull(val);
      } else if (key == "precision_cap") {
        cfg.tracker.precision_cap = std::stoi(val);
      } else if (key == "jobs") {
        cfg.jobs = std::stoi(val);
      } else {
        throw bad("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw bad("invalid value '" + val + "' for key '" + key + "'");
    }
  }
  (void)tau_seen;
  cfg.tracker.validate();
  return cfg;
}

}  // namespace mptrack
