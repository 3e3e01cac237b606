#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mptrack/config.hpp"
#include "mptrack/tracker.hpp"

namespace mptrack {

/// Start-point file: one path per block, one coordinate per line as `re im`
/// decimal pairs, blocks separated by blank lines. `#` comments allowed.
inline std::string format_start_points(const std::vector<MpVector>& points) {
  std::string out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (p > 0) out += "\n";
    for (std::size_t i = 0; i < points[p].size(); ++i) {
      out += points[p][i].re().to_string() + " " + points[p][i].im().to_string() + "\n";
    }
  }
  return out;
}

inline std::vector<MpVector> parse_start_points(const std::string& text, std::size_t dim) {
  const PrecisionLevel level = PrecisionLevel::from_bits(128);
  std::vector<MpVector> out;
  std::vector<MpComplex> cur;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto flush = [&]() {
    if (cur.empty()) return;
    if (cur.size() != dim) {
      throw std::runtime_error("start-point block has " + std::to_string(cur.size()) +
                               " coordinates, expected " + std::to_string(dim));
    }
    MpVector v(dim, level);
    for (std::size_t i = 0; i < dim; ++i) v.set(i, cur[i]);
    out.push_back(std::move(v));
    cur.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) {
      flush();
      continue;
    }
    std::istringstream ls(line);
    std::string re, im;
    if (!(ls >> re >> im)) {
      throw std::runtime_error("start-point line " + std::to_string(lineno) +
                               ": expected `re im`");
    }
    std::string extra;
    if (ls >> extra) {
      throw std::runtime_error("start-point line " + std::to_string(lineno) + ": trailing junk");
    }
    cur.emplace_back(MpReal::from_string(re, level), MpReal::from_string(im, level));
  }
  flush();
  return out;
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace detail

/// Telemetry CSV, one row per attempted step. Columns are fixed:
/// step,t,s,bits,digits,J_norm,Jinv_est,cond_est,ruleA,ruleB,ruleC,corr_iters,d_norm,accepted
inline std::string telemetry_csv(const PathResult& r) {
  std::string out =
      "step,t,s,bits,digits,J_norm,Jinv_est,cond_est,ruleA,ruleB,ruleC,corr_iters,d_norm,"
      "accepted\n";
  for (const TelemetryRecord& rec : r.telemetry) {
    out += std::to_string(rec.step);
    out += "," + detail::fmt(rec.t);
    out += "," + detail::fmt(rec.s);
    out += "," + std::to_string(rec.bits);
    out += "," + std::to_string(PrecisionLevel::from_bits(rec.bits).decimal_digits());
    out += "," + detail::fmt(rec.J_norm, "%.10g");
    out += "," + detail::fmt(rec.Jinv_norm_est, "%.10g");
    out += "," + detail::fmt(rec.cond_est, "%.10g");
    out += "," + detail::fmt(rec.ruleA, "%.10g");
    out += ",";
    if (rec.ruleB.has_value()) out += detail::fmt(*rec.ruleB, "%.10g");
    out += "," + detail::fmt(rec.ruleC, "%.10g");
    out += "," + std::to_string(rec.corrector_iterations);
    out += "," + detail::fmt(rec.d_norm_final, "%.10g");
    out += rec.accepted ? ",1\n" : ",0\n";
  }
  return out;
}

/// endpoints.csv: one row per path, coordinates printed with the digit count
/// of the path's final precision.
inline std::string endpoints_csv(const std::vector<PathResult>& paths,
                                 const std::vector<std::string>& variables) {
  std::string out = "path,status,t_final,bits_max,steps";
  for (const std::string& v : variables) out += "," + v + "_re," + v + "_im";
  out += "\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const PathResult& r = paths[p];
    out += std::to_string(p);
    out += ",";
    out += to_string(r.status);
    out += "," + detail::fmt(r.t_reached);
    out += "," + std::to_string(r.max_bits_used);
    out += "," + std::to_string(r.accepted_steps);
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (i < r.endpoint.size()) {
        out += "," + r.endpoint[i].re().to_string() + "," + r.endpoint[i].im().to_string();
      } else {
        out += ",,";
      }
    }
    out += "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace mptrack
