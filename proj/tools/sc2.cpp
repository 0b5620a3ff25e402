// Mission CLI: train a coverage policy, fly missions, sweep fleet sizes, and
// verify charging-slot allocations offline.

#include <CLI11.hpp>

#include "sc2/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multi-drone coverage and charging-schedule simulator"};
  app.require_subcommand(1);

  sc2::cli::TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train the coverage policy");
  train->add_option("--config", train_args.config_path, "mission config JSON")->required();
  train->add_option("--out", train_args.out_dir, "output directory")->required();
  train->add_option("--checkpoint", train_args.resume_checkpoint, "resume from checkpoint");

  sc2::cli::SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "run one mission");
  sim->add_option("--config", sim_args.config_path, "mission config JSON")->required();
  sim->add_option("--out", sim_args.out_dir, "output directory")->required();
  sim->add_option("--checkpoint", sim_args.checkpoint, "policy checkpoint");
  sim->add_flag("--scripted-policy", sim_args.scripted, "use the scripted fallback policy");
  sim->add_option("--scenario", sim_args.scenario, "preset name or scenario JSON path");
  sim->add_option("--steps", sim_args.steps, "override mission length");
  sim->add_option("--n", sim_args.fleet, "override fleet size");
  sim->add_option("--value-map", sim_args.value_map, "terrain value grid CSV");
  sim->add_option("--snapshot-every", sim_args.snapshot_every, "PGM snapshot cadence (0=off)");

  sc2::cli::SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "fleet-size sweep");
  sweep->add_option("--config", sweep_args.config_path, "mission config JSON")->required();
  sweep->add_option("--out", sweep_args.out_dir, "output directory")->required();
  sweep->add_option("--checkpoint", sweep_args.checkpoint, "policy checkpoint");
  sweep->add_flag("--scripted-policy", sweep_args.scripted, "use the scripted fallback policy");
  sweep->add_option("--scenario", sweep_args.scenario, "preset name or scenario JSON path");
  sweep->add_option("--n", sweep_args.n_spec, "fleet sizes: comma list or a..b");
  sweep->add_option("--seeds", sweep_args.seeds, "repetitions per fleet size");

  std::string instance_path;
  auto* check = app.add_subcommand("schedule-check", "verify an allocation instance");
  check->add_option("instance", instance_path, "instance JSON file")->required();

  std::string manifest_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
  rerun->add_option("manifest", manifest_path, "manifest.json of a finished run")->required();
  rerun->add_option("--out", rerun_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : sc2::cli::kConfigError;
  }

  if (train->parsed()) return sc2::cli::cmd_train(train_args);
  if (sim->parsed()) return sc2::cli::cmd_simulate(sim_args);
  if (sweep->parsed()) return sc2::cli::cmd_sweep(sweep_args);
  if (check->parsed()) return sc2::cli::cmd_schedule_check(instance_path);
  if (rerun->parsed()) return sc2::cli::rerun_from_manifest(manifest_path, rerun_out);
  return sc2::cli::kConfigError;
}
