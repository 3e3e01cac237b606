// mptrack command-line runner: generate example problems, track paths, and
// verify endpoints. See README.md for the file formats.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mptrack/runner.hpp"

namespace fs = std::filesystem;
using namespace mptrack;

namespace {

std::string path_csv_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "path_%03zu.csv", i);
  return buf;
}

int run_track(const std::string& config_path, const std::string& system_path,
              const std::string& start_path, const std::string& out_dir,
              const std::string& mode_override, int bits_override, long seed_override,
              int jobs_override) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = parse_run_config(read_file(config_path));
  if (!mode_override.empty()) {
    if (mode_override == "adaptive") cfg.tracker.mode = TrackMode::adaptive;
    else if (mode_override == "fixed") cfg.tracker.mode = TrackMode::fixed;
    else if (mode_override == "rerun") cfg.tracker.mode = TrackMode::rerun;
    else throw std::runtime_error("unknown mode " + mode_override);
  }
  if (bits_override > 0) cfg.tracker.fixed_bits = bits_override;
  if (seed_override >= 0) cfg.tracker.seed = static_cast<std::uint64_t>(seed_override);
  if (jobs_override > 0) cfg.jobs = jobs_override;

  SystemFile sf = parse_system_file(read_file(system_path));
  std::optional<std::vector<MpVector>> points;
  if (!start_path.empty()) {
    std::size_t dim = sf.base_variables.size() + sf.groups.size();
    points = parse_start_points(read_file(start_path), dim);
  }
  Problem prob = assemble_problem(sf, std::move(points), cfg.tracker.seed);
  RunOutput run = run_all(prob, cfg);

  fs::create_directories(out_dir);
  write_file(out_dir + "/endpoints.csv", endpoints_csv(run.paths, prob.tracked_variables));
  write_file(out_dir + "/summary.txt", summary_text(prob, cfg, run));
  for (std::size_t i = 0; i < run.paths.size(); ++i) {
    write_file(out_dir + "/" + path_csv_name(i), telemetry_csv(run.paths[i]));
  }

  std::size_t ok = 0;
  for (const PathResult& r : run.paths) ok += r.status == PathStatus::Success ? 1 : 0;
  std::printf("%zu/%zu paths succeeded; outputs in %s\n", ok, run.paths.size(), out_dir.c_str());
  return ok == run.paths.size() ? 0 : 2;
}

int run_gen(const GeneratedProblem& gen, const std::string& name, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::string sys_path = out_dir + "/" + name + "_system.txt";
  std::string start_path = out_dir + "/" + name + "_start.txt";
  write_file(sys_path, gen.system_text);
  write_file(start_path, format_start_points(gen.start_points));
  std::printf("wrote %s and %s (%zu start points)\n", sys_path.c_str(), start_path.c_str(),
              gen.start_points.size());
  return 0;
}

int run_verify(const std::string& system_path, const std::string& endpoints_path,
               long seed_override) {
  SystemFile sf = parse_system_file(read_file(system_path));
  std::uint64_t seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : 1;

  // endpoints.csv: path,status,t_final,bits_max,steps,<re,im per variable>
  std::string text = read_file(endpoints_path);
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(detail::split(line, ','));
  }
  if (rows.size() < 2) throw std::runtime_error("endpoints file has no rows");

  const std::size_t dim = sf.base_variables.size() + sf.groups.size();
  const PrecisionLevel level = PrecisionLevel::from_bits(128);

  // a dummy problem for the tracked target (start points are irrelevant here)
  Problem prob;
  {
    SystemFile copy = sf;
    std::vector<MpVector> dummy;
    if (copy.start.has_value()) {
      dummy.emplace_back(dim, level);
      prob = assemble_problem(copy, dummy, seed);
    } else {
      prob = assemble_problem(copy, std::nullopt, seed);
    }
  }

  double worst = 0;
  std::printf("path  status                 residual\n");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < 5 + 2 * dim) throw std::runtime_error("endpoints row too short");
    MpVector z(dim, level);
    bool have = true;
    for (std::size_t v = 0; v < dim; ++v) {
      const std::string& re = row[5 + 2 * v];
      const std::string& im = row[6 + 2 * v];
      if (re.empty() || im.empty()) {
        have = false;
        break;
      }
      z.set(v, MpComplex(MpReal::from_string(re, level), MpReal::from_string(im, level)));
    }
    if (!have) {
      std::printf("%-5s %-22s (no endpoint)\n", row[0].c_str(), row[1].c_str());
      continue;
    }
    MpVector res = evaluate(prob.tracked_target, z, MpComplex(level), level);
    double r = max_norm(res);
    worst = std::max(worst, r);
    std::printf("%-5s %-22s %.6e\n", row[0].c_str(), row[1].c_str(), r);
  }
  std::printf("max residual: %.6e\n", worst);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiprecision homotopy path tracker"};
  app.require_subcommand(1);

  // track
  auto* track = app.add_subcommand("track", "track all paths of a homotopy");
  std::string config_path, system_path, start_path, out_dir = ".", mode_override;
  int bits_override = 0, jobs_override = 0;
  long seed_override = -1;
  track->add_option("--config", config_path, "run configuration (key = value lines)");
  track->add_option("--system", system_path, "system file")->required();
  track->add_option("--start", start_path, "start-point file");
  track->add_option("--mode", mode_override, "adaptive | fixed | rerun");
  track->add_option("--bits", bits_override, "mantissa bits for fixed mode");
  track->add_option("--seed", seed_override, "random seed override");
  track->add_option("--out", out_dir, "output directory");
  track->add_option("--jobs", jobs_override, "worker threads");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a built-in example problem");
  gen->require_subcommand(1);
  std::string gen_out = ".";
  long gen_seed = 1;
  int cheb_degree = 10;
  std::string td_vars = "z1,z2";
  std::string td_degrees = "2,2";

  auto* gc = gen->add_subcommand("chebyshev", "recursion polynomial of a given degree");
  gc->add_option("--degree", cheb_degree, "polynomial degree")->required();
  gc->add_option("--seed", gen_seed, "random seed");
  gc->add_option("--out", gen_out, "output directory");

  auto* gg = gen->add_subcommand("griewank", "Griewank-Osborne system, homogenized");
  gg->add_option("--out", gen_out, "output directory");

  auto* gm = gen->add_subcommand("chemical", "chemical equilibrium system, homogenized");
  gm->add_option("--seed", gen_seed, "random seed");
  gm->add_option("--out", gen_out, "output directory");

  auto* gt = gen->add_subcommand("totaldegree", "total-degree start system");
  gt->add_option("--vars", td_vars, "comma-separated variable names");
  gt->add_option("--degrees", td_degrees, "comma-separated degrees")->required();
  gt->add_option("--seed", gen_seed, "random seed");
  gt->add_option("--out", gen_out, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "evaluate target residuals at endpoints");
  std::string v_system, v_endpoints;
  long v_seed = -1;
  verify->add_option("--system", v_system, "system file")->required();
  verify->add_option("--endpoints", v_endpoints, "endpoints.csv from a track run")->required();
  verify->add_option("--seed", v_seed, "seed used by the track run (for generated patches)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (track->parsed()) {
      return run_track(config_path, system_path, start_path, out_dir, mode_override,
                       bits_override, seed_override, jobs_override);
    }
    if (gen->parsed()) {
      std::uint64_t seed = static_cast<std::uint64_t>(gen_seed);
      if (gc->parsed()) return run_gen(gen_chebyshev(cheb_degree, seed), "chebyshev", gen_out);
      if (gg->parsed()) return run_gen(gen_griewank(), "griewank", gen_out);
      if (gm->parsed()) return run_gen(gen_chemical(seed), "chemical", gen_out);
      if (gt->parsed()) {
        std::vector<std::string> vars;
        for (auto& v : detail::split(td_vars, ',')) vars.push_back(detail::trim(v));
        std::vector<int> degrees;
        for (auto& d : detail::split(td_degrees, ',')) degrees.push_back(std::stoi(detail::trim(d)));
        return run_gen(gen_total_degree(vars, degrees, seed), "totaldegree", gen_out);
      }
    }
    if (verify->parsed()) return run_verify(v_system, v_endpoints, v_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
