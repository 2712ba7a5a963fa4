#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "accessopt/errors.hpp"
#include "accessopt/kernels.hpp"
#include "accessopt/pipeline.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct Overrides {
  std::string output_dir;
  int total_k = -1;
  long long seed = -1;
  long long m = -1;
  double epsilon = -1.0;
  std::string provider;
  double noise = -1.0;
};

void apply(const Overrides& o, accessopt::pipeline::PipelineConfig& cfg) {
  if (!o.output_dir.empty()) cfg.paths.output_dir = o.output_dir;
  if (o.total_k > 0) cfg.clustering.total_k = o.total_k;
  if (o.seed >= 0) {
    cfg.clustering.seed = static_cast<std::uint64_t>(o.seed);
    cfg.solver.seed = static_cast<std::uint64_t>(o.seed);
    cfg.synth.seed = static_cast<std::uint64_t>(o.seed);
  }
  if (o.m > 0) cfg.facility_count = static_cast<std::size_t>(o.m);
  if (o.epsilon > 0.0) cfg.solver.epsilon = o.epsilon;
  if (!o.provider.empty()) cfg.costs.provider = o.provider;
  if (o.noise >= 0.0) cfg.synth.noise = o.noise;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accessopt: facility placement from call-detail-record residence inference"};
  app.set_version_flag("--version",
                       std::string(kVersion) + " (kernels: " + accessopt::kernels::active_isa() +
                           ")");
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  app.add_option("--config", config_path, "pipeline configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--output-dir", overrides.output_dir, "override paths.output_dir");

  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic scenario data files");
  synth_cmd->add_option("--seed", overrides.seed, "override synth.seed");
  synth_cmd->add_option("--noise", overrides.noise, "override synth.noise");

  auto* ingest_cmd =
      app.add_subcommand("ingest", "parse, merge and filter towers; join call records");

  auto* residence_cmd =
      app.add_subcommand("residence", "infer night-time residence distributions");

  auto* cluster_cmd = app.add_subcommand("cluster", "build weighted residential regions");
  cluster_cmd->add_option("--total-k", overrides.total_k, "override clustering.total_k");
  cluster_cmd->add_option("--seed", overrides.seed, "override clustering.seed");

  auto* costs_cmd = app.add_subcommand("costs", "build travel cost matrices between regions");
  costs_cmd->add_option("--provider", overrides.provider, "override costs.provider");

  auto* solve_cmd = app.add_subcommand("solve", "optimize facility placement");
  solve_cmd->add_option("--m", overrides.m, "override solver.m (facility count)");
  solve_cmd->add_option("--epsilon", overrides.epsilon, "override solver.epsilon");

  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "report access costs for current and optimized placements");

  auto* all_cmd = app.add_subcommand("all", "run ingest through evaluate");
  all_cmd->add_option("--m", overrides.m, "override solver.m (facility count)");
  all_cmd->add_option("--seed", overrides.seed, "override clustering/solver seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = accessopt::pipeline::load_config(config_path);
    apply(overrides, cfg);
    if (synth_cmd->parsed()) accessopt::pipeline::run_synth(cfg);
    if (ingest_cmd->parsed()) accessopt::pipeline::run_ingest(cfg);
    if (residence_cmd->parsed()) accessopt::pipeline::run_residence(cfg);
    if (cluster_cmd->parsed()) accessopt::pipeline::run_cluster(cfg);
    if (costs_cmd->parsed()) accessopt::pipeline::run_costs(cfg);
    if (solve_cmd->parsed()) accessopt::pipeline::run_solve(cfg);
    if (evaluate_cmd->parsed()) accessopt::pipeline::run_evaluate(cfg);
    if (all_cmd->parsed()) accessopt::pipeline::run_all(cfg);
  } catch (const accessopt::PredecessorError& e) {
    std::cerr << "error (missing prerequisite): " << e.what() << "\n";
    return 3;
  } catch (const accessopt::ValidationError& e) {
    std::cerr << "error (invalid input): " << e.what() << "\n";
    return 2;
  } catch (const accessopt::IoError& e) {
    std::cerr << "error (I/O): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
