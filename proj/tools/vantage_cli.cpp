#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vantage/vantage.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kBelowThreshold = 2;

struct PlanArgs {
  std::string scene;
  std::string operation;
  int target = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config;
  std::string out;
  std::string export_dir;
  bool timing = false;
};

int run_plan(const PlanArgs& args) {
  const vantage::Scene scene = vantage::load_scene(args.scene);
  vantage::PipelineConfig config;
  if (!args.config.empty()) config = vantage::PipelineConfig::from_json(vantage::io::read_json(args.config));
  if (args.seed_given) config.seed = args.seed;

  const auto run = vantage::run_selection(scene, config, vantage::parse_operation(args.operation), args.target);
  const std::string text = run.report.to_json(args.timing).dump(2) + "\n";
  if (args.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(args.out);
    if (!out) throw vantage::Error("cannot write " + args.out);
    out << text;
  }
  if (!args.export_dir.empty()) vantage::export_geometry(run, args.export_dir, args.timing);

  const auto& r = run.report;
  std::cerr << vantage::to_string(r.operation) << " target " << r.target << ": " << r.viewpoints.size()
            << " viewpoint(s), C(V) = " << r.coverage;
  if (r.avg_visibility) std::cerr << ", AvgVis = " << *r.avg_visibility;
  std::cerr << (r.below_threshold ? " (below threshold)" : "") << '\n';
  return r.below_threshold ? kBelowThreshold : kOk;
}

int run_validate(const std::string& path) {
  const vantage::Scene scene = vantage::load_scene(path);
  std::size_t installed = 0;
  for (const auto& t : scene.targets) installed += t.installed ? 1 : 0;
  std::cout << path << ": ok (" << scene.as_built.size() << " as-built, " << scene.materials.size() << " materials, "
            << scene.targets.size() << " targets, " << installed << " installed, " << scene.supervisors.size()
            << " supervisors, " << scene.trajectories.size() << " trajectories)\n";
  return kOk;
}

int run_install(const std::string& path, int target, const std::string& out) {
  const vantage::Scene updated = vantage::update_after_install(vantage::load_scene(path), target);
  vantage::save_scene(updated, out);
  std::cout << "installed target " << target << " -> " << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Viewpoint selection for supervising camera robots"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Select viewpoints for one pick or place operation");
  plan_cmd->add_option("--scene", plan.scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--operation", plan.operation, "pick or place")
      ->required()
      ->check(CLI::IsMember({"pick", "place"}));
  plan_cmd->add_option("--target", plan.target, "Target order")->required();
  auto* seed_opt = plan_cmd->add_option("--seed", plan.seed, "Random seed (overrides the config file)");
  plan_cmd->add_option("--config", plan.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  plan_cmd->add_option("--out", plan.out, "Write the report here instead of stdout");
  plan_cmd->add_option("--export-dir", plan.export_dir, "Write PLY geometry and the report into this directory");
  plan_cmd->add_flag("--timing", plan.timing, "Include per-stage timing in the report");

  std::string validate_scene;
  auto* validate_cmd = app.add_subcommand("validate", "Load and check a scene");
  validate_cmd->add_option("--scene", validate_scene, "Scene JSON")->required()->check(CLI::ExistingFile);

  std::string install_scene, install_out;
  int install_target = 1;
  auto* install_cmd = app.add_subcommand("install", "Move a target's material into the as-built layer");
  install_cmd->add_option("--scene", install_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  install_cmd->add_option("--target", install_target, "Target order")->required();
  install_cmd->add_option("--out", install_out, "Output scene JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (*plan_cmd) {
      plan.seed_given = seed_opt->count() > 0;
      return run_plan(plan);
    }
    if (*validate_cmd) return run_validate(validate_scene);
    if (*install_cmd) return run_install(install_scene, install_target, install_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
