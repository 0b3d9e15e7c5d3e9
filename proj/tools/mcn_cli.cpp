#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mcn/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

fs::path output_root() {
  if (const char* env = std::getenv("MCN_OUTPUT_ROOT"); env && *env) return env;
  return "mcn-out";
}

int run(const std::string& scenario_ref, const std::vector<std::string>& experiments,
        std::optional<std::uint64_t> seed, std::optional<fs::path> out) {
  auto s = mcn::load_scenario(mcn::resolve_scenario(scenario_ref));
  if (seed) {
    s.seed = *seed;
    s.dynamics.seed = *seed;
  }
  std::vector<mcn::Experiment> list;
  for (const auto& e : experiments) {
    if (e == "all") {
      list = mcn::all_experiments();
      break;
    }
    list.push_back(mcn::parse_experiment(e));
  }
  const fs::path base = out ? *out : output_root() / s.name;
  for (auto e : list) {
    // A single experiment writes straight into --out; several get one subdirectory each.
    const fs::path dir = list.size() == 1 && out ? *out : base / mcn::to_string(e);
    const auto man = mcn::run_experiment(s, e, dir);
    std::cout << fmt::format("{} -> {} (scenario {}, seed {})\n", man.experiment, dir.string(),
                             man.scenario_hash, man.seed);
    for (const auto& o : man.outputs) std::cout << fmt::format("  {} ({} rows)\n", o.name, o.rows);
    for (const auto& w : man.warnings) std::cerr << "warning: " << w << '\n';
  }
  return 0;
}

int calibrate(const std::string& scenario_ref, double target, const std::vector<std::string>& features,
              double tolerance) {
  const auto s = mcn::load_scenario(mcn::resolve_scenario(scenario_ref));
  std::vector<mcn::ConnectionFeature> feats;
  for (const auto& f : features) feats.push_back(mcn::parse_feature(f));
  const auto r = mcn::calibrate_availability(s, feats, target, tolerance);
  std::cout << fmt::format("fail_coefficient={:.6f} mean_R_a={:.6f} target={:.6f} converged={}\n",
                           r.fail_coefficient, r.achieved, target, r.converged ? "yes" : "no");
  return r.converged ? 0 : kExitInfeasible;
}

int validate(const std::string& scenario_ref) {
  const auto s = mcn::load_scenario(mcn::resolve_scenario(scenario_ref));
  std::cout << mcn::scenario_json(s) << '\n';
  std::cout << fmt::format("scenario {} ok, hash {}\n", s.name, mcn::scenario_hash(s));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite constellation network structure experiments"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run experiments on a scenario");
  std::string run_scenario;
  std::vector<std::string> experiments;
  std::uint64_t seed_value = 0;
  std::string out_dir;
  run_cmd->add_option("scenario", run_scenario, "Scenario file or bundled fixture name")->required();
  run_cmd->add_option("-e,--experiment", experiments, "Experiment name, repeatable, or 'all'")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed_value, "Top-level seed (overrides the scenario)");
  auto* out_opt = run_cmd->add_option("-o,--out", out_dir, "Output directory (default $MCN_OUTPUT_ROOT/<name>)");

  auto* cal_cmd = app.add_subcommand("calibrate-availability",
                                     "Fit the fail coefficient to a target mean availability");
  std::string cal_scenario = "reference-24x36";
  double target = 0.0;
  double tolerance = 1e-3;
  std::vector<std::string> features;
  cal_cmd->add_option("--target-ra", target, "Target mean R_a over the features")->required();
  cal_cmd->add_option("--feature", features, "Connection feature such as (1,-1), repeatable")->required();
  cal_cmd->add_option("--scenario", cal_scenario, "Scenario file or fixture")->capture_default_str();
  cal_cmd->add_option("--tolerance", tolerance, "Absolute tolerance on R_a")->capture_default_str();

  auto* val_cmd = app.add_subcommand("validate", "Validate a scenario and print it with defaults");
  std::string val_scenario;
  val_cmd->add_option("scenario", val_scenario, "Scenario file or bundled fixture name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run_cmd) {
      std::optional<std::uint64_t> seed;
      if (*seed_opt) seed = seed_value;
      std::optional<fs::path> out;
      if (*out_opt) out = out_dir;
      return run(run_scenario, experiments, seed, out);
    }
    if (*cal_cmd) return calibrate(cal_scenario, target, features, tolerance);
    if (*val_cmd) return validate(val_scenario);
  } catch (const mcn::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const mcn::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const mcn::Unreachable& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
