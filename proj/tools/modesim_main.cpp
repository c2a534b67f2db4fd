#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "modesim/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdictFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalRefusal = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw modesim::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::int64_t seed = -1;
  double dt = 0.0;
  double horizon = 0.0;
};

modesim::ScenarioConfig load(const CommonArgs& args) {
  modesim::ScenarioConfig cfg = modesim::parse_config(read_file(args.config_path));
  if (!args.preset.empty()) {
    modesim::gain_preset_from_string(args.preset);
    cfg.gains.preset = args.preset;
    cfg.gains.defaulted = false;
  }
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.dt > 0) cfg.integrator.dt = args.dt;
  if (args.horizon > 0) cfg.integrator.horizon = args.horizon;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  return cfg;
}

int cmd_run(const CommonArgs& args) {
  const modesim::ScenarioConfig cfg = load(args);
  const modesim::RunSummary summary = modesim::run_scenario(cfg, cfg.output_dir);
  std::cout << modesim::summary_to_json(summary).dump(2) << '\n';
  return summary.all_pass ? kExitPass : kExitVerdictFailure;
}

int cmd_bounds(const CommonArgs& args) {
  const modesim::ScenarioConfig cfg = load(args);
  const modesim::NetworkTimeline timeline = modesim::build_timeline(cfg);
  const modesim::GainSet gains = modesim::resolve_gains(cfg);
  const modesim::BoundReport report = modesim::make_bound_report(
      gains, timeline.n_bar(), timeline.attrs().size(), timeline.segment(0), cfg.gains.known_n);
  std::cout << modesim::bounds_to_json(report).dump(2) << '\n';
  return kExitPass;
}

int cmd_validate(const CommonArgs& args, double dwell) {
  const modesim::ScenarioConfig cfg = load(args);
  const modesim::NetworkTimeline timeline = modesim::build_timeline(cfg);
  const modesim::GainSet gains = modesim::resolve_gains(cfg);
  double required = dwell;
  if (required <= 0) {
    // default: the dwell that guarantees recovery of the configured algorithm
    const modesim::BoundReport report = modesim::make_bound_report(
        gains, timeline.n_bar(), timeline.attrs().size(), timeline.segment(0), cfg.gains.known_n);
    required = cfg.algorithm.which == "direct" ? report.t_y
                                               : modesim::algorithm2_time_bound(report);
  }
  const modesim::DwellReport report = modesim::check_dwell(timeline, required);
  nlohmann::json out;
  out["config_valid"] = true;
  out["required_dwell_s"] = required;
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& gap : report.gaps) {
    gaps.push_back(nlohmann::json{{"t_prev", gap.t_prev},
                                  {"t_next", gap.t_next},
                                  {"gap_s", gap.gap},
                                  {"pass", gap.pass}});
  }
  out["event_gaps"] = gaps;
  out["all_pass"] = report.all_pass;
  std::cout << out.dump(2) << '\n';
  return report.all_pass ? kExitPass : kExitVerdictFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mode-consensus protocol simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  double dwell = 0.0;

  auto add_common = [&](CLI::App* cmd, bool with_run_flags) {
    cmd->add_option("--config", args.config_path, "scenario config (JSON)")->required();
    if (with_run_flags) {
      cmd->add_option("--out-dir", args.out_dir, "artifact output directory");
      cmd->add_option("--preset", args.preset, "gain preset override");
      cmd->add_option("--seed", args.seed, "RNG seed override");
      cmd->add_option("--dt", args.dt, "fixed integration step override");
      cmd->add_option("--horizon", args.horizon, "simulation horizon override");
    }
  };

  CLI::App* run = app.add_subcommand("run", "run the scenario and write artifacts");
  add_common(run, true);
  CLI::App* bounds = app.add_subcommand("bounds", "print the bound report only");
  add_common(bounds, true);
  CLI::App* validate = app.add_subcommand("validate", "validate the config and check dwell times");
  add_common(validate, true);
  validate->add_option("--dwell", dwell, "required dwell time between events (s)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(args);
    if (bounds->parsed()) return cmd_bounds(args);
    return cmd_validate(args, dwell);
  } catch (const modesim::NumericalRefusal& e) {
    std::cerr << "numerical refusal: " << e.what() << '\n';
    return kExitNumericalRefusal;
  } catch (const modesim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumericalRefusal;
  }
}
