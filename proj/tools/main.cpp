#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pacgibbs/commands.hpp"
#include "pacgibbs/config.hpp"

using namespace pacgibbs;

int main(int argc, char** argv) {
  CLI::App app{"Disintegrated PAC-Bayes bounds with Gibbs posteriors sampled by SGLD"};
  app.require_subcommand(1);
  app.footer("Config keys and defaults (INI):\n\n" + default_config_text());

  RunExperimentArgs run;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run-experiment", "Sweep the configured grid and write JSON-lines records");
  run_cmd->add_option("--config", run.config, "Experiment config")->required()->check(CLI::ExistingFile);
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Master seed (default: sweep.seed)");
  run_cmd->add_option("--out", run.out, "Record file")->capture_default_str();
  run_cmd->add_flag("--no-timing", run.no_timing, "Write wall_time_ms = 0 for byte-stable output");

  ValidateArgs val;
  std::uint64_t val_seed = 0;
  std::string force = "none";
  auto* val_cmd = app.add_subcommand("validate", "Monte Carlo validity check against the true-risk oracle");
  val_cmd->add_option("--config", val.config, "Experiment config")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--trials", val.trials, "Independent (S, h', h) draws (default: validate.trials)");
  auto* val_seed_opt = val_cmd->add_option("--seed", val_seed, "Master seed (default: sweep.seed)");
  val_cmd->add_option("--force-tau", force, "Debug: replace tau by inf or 0")
      ->check(CLI::IsMember({"none", "inf", "zero"}))
      ->capture_default_str();

  EmitPlotArgs plot;
  auto* plot_cmd = app.add_subcommand("emit-plot", "Summarise records into a CSV of means and stds");
  plot_cmd->add_option("--records", plot.records, "Record file")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--group-by", plot.group_by, "Grouping column")
      ->check(CLI::IsMember({"alpha", "beta", "family"}))
      ->capture_default_str();
  plot_cmd->add_option("--out", plot.out, "CSV output")->required();

  double q = 0.0, tau = 0.0;
  auto* inv_cmd = app.add_subcommand("invert-kl", "Largest p with kl(q||p) <= tau");
  inv_cmd->add_option("--q", q, "Empirical risk in [0,1]")->required();
  inv_cmd->add_option("--tau", tau, "kl budget >= 0")->required();

  GapDatasetArgs gap;
  std::uint64_t gap_seed = 0;
  auto* gap_cmd = app.add_subcommand("build-gap-dataset", "Train SGD models and record their generalization gaps");
  gap_cmd->add_option("--config", gap.config, "Experiment config")->required()->check(CLI::ExistingFile);
  gap_cmd->add_option("--out", gap.out, "Gap dataset (JSON lines)")->required();
  gap_cmd->add_option("--scale", gap.scale, "Fraction of the full repetition schedule")->capture_default_str();
  gap_cmd->add_option("--min-iterations", gap.min_iterations, "SGD iterations per model (0: sampler.epochs)")
      ->capture_default_str();
  auto* gap_seed_opt = gap_cmd->add_option("--seed", gap_seed, "Master seed (default: sweep.seed)");

  TrainPredictorArgs tp;
  auto* tp_cmd = app.add_subcommand("train-predictor", "Fit the neural gap predictor on a gap dataset");
  tp_cmd->add_option("--config", tp.config, "Experiment config (hypothesis architecture)")
      ->required()
      ->check(CLI::ExistingFile);
  tp_cmd->add_option("--dataset", tp.dataset, "Gap dataset")->required()->check(CLI::ExistingFile);
  tp_cmd->add_option("--out", tp.out, "Predictor checkpoint")->required();
  tp_cmd->add_option("--epochs", tp.epochs, "Training epochs")->capture_default_str();
  tp_cmd->add_option("--lr", tp.lr, "Adam learning rate")->capture_default_str();
  tp_cmd->add_option("--seed", tp.seed, "Seed")->capture_default_str();

  auto* def_cmd = app.add_subcommand("default-config", "Print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::kConfig;
  }

  if (*run_cmd) {
    if (*run_seed_opt) run.seed = run_seed;
    return cmd_run_experiment(run, std::cout, std::cerr);
  }
  if (*val_cmd) {
    if (*val_seed_opt) val.seed = val_seed;
    val.force = force == "inf" ? ForceTau::Infinity : force == "zero" ? ForceTau::Zero : ForceTau::None;
    return cmd_validate(val, std::cout, std::cerr);
  }
  if (*plot_cmd) return cmd_emit_plot(plot, std::cout, std::cerr);
  if (*inv_cmd) return cmd_invert_kl(q, tau, std::cout, std::cerr);
  if (*gap_cmd) {
    if (*gap_seed_opt) gap.seed = gap_seed;
    return cmd_build_gap_dataset(gap, std::cout, std::cerr);
  }
  if (*tp_cmd) return cmd_train_predictor(tp, std::cout, std::cerr);
  if (*def_cmd) {
    std::cout << default_config_text();
    return exit_code::kOk;
  }
  return exit_code::kConfig;
}
