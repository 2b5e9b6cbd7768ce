// tragraph: trajectory-partitioned Gaussian splatting pipeline.
//
//   tragraph synth <config> <workspace>
//   tragraph partition <workspace> --k 3
//   tragraph train <workspace> (--region i | --global | --all) [--config file]
//   tragraph render <workspace> [--views test] [--mode progressive|naive|region=i] [--buffers]
//   tragraph eval <workspace> [--every 8]
//
// Exit codes: 0 success, 1 invalid input or precondition, 2 I/O failure.

#include <CLI11.hpp>
#include <iostream>

#include "pipeline/pipeline.hpp"
#include "tragraph/error.hpp"

namespace pl = tragraph::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-partitioned Gaussian splatting pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  pl::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene into a new workspace");
  synth_cmd->add_option("config", synth.config, "Scene config (key = value)")->required();
  synth_cmd->add_option("workspace", synth.workspace, "Workspace directory")->required();
  synth_cmd->add_flag("--force", synth.force, "Replace an existing workspace");

  pl::PartitionOptions partition;
  auto* partition_cmd = app.add_subcommand("partition", "Build the camera graph and split it into regions");
  partition_cmd->add_option("workspace", partition.workspace, "Workspace directory")->required();
  partition_cmd->add_option("-k,--k", partition.k, "Number of regions")->capture_default_str();
  partition_cmd->add_flag("--force", partition.force, "Accepted for symmetry; partitioning always overwrites");

  pl::TrainOptions train;
  int train_region = -1;
  std::string train_config;
  auto* train_cmd = app.add_subcommand("train", "Train one region, every region, or the coarse global set");
  train_cmd->add_option("workspace", train.workspace, "Workspace directory")->required();
  auto* region_opt = train_cmd->add_option("-r,--region", train_region, "Region index");
  train_cmd->add_flag("--global", train.global, "Train the coarse global set");
  train_cmd->add_flag("--all", train.all, "Train every region and then the global set");
  train_cmd->add_option("-c,--config", train_config, "Training config (key = value)");
  train_cmd->add_flag("--force", train.force, "Allow mixing artifacts trained with different configs");

  pl::RenderOptions render;
  auto* render_cmd = app.add_subcommand("render", "Render views from trained sets");
  render_cmd->add_option("workspace", render.workspace, "Workspace directory")->required();
  render_cmd->add_option("--views", render.views, "test, train, all or comma-separated view ids")
      ->capture_default_str();
  render_cmd->add_option("--mode", render.mode, "progressive, naive or region=<i>")->capture_default_str();
  render_cmd->add_flag("--buffers", render.buffers, "Also write depth, normal and opacity sidecars");
  render_cmd->add_flag("--force", render.force, "Allow mixing artifacts with different config hashes");

  pl::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score held-out renders against ground truth");
  eval_cmd->add_option("workspace", eval.workspace, "Workspace directory")->required();
  eval_cmd->add_option("--every", eval.every, "Test split stride (default: the workspace split)");
  eval_cmd->add_flag("--force", eval.force, "Allow comparing renders of different trained regions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) pl::cmd_synth(synth, std::cout);
    if (*partition_cmd) pl::cmd_partition(partition, std::cout);
    if (*train_cmd) {
      if (*region_opt) train.region = train_region;
      if (!train_config.empty()) train.config = train_config;
      pl::cmd_train(train, std::cout);
    }
    if (*render_cmd) pl::cmd_render(render, std::cout);
    if (*eval_cmd) pl::cmd_eval(eval, std::cout);
  } catch (const tragraph::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tragraph::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
