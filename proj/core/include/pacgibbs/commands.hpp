#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "pacgibbs/experiment.hpp"

namespace pacgibbs {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 2;
inline constexpr int kRuntime = 3;
}  // namespace exit_code

struct RunExperimentArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "records.jsonl";
  bool no_timing = false;
};

struct ValidateArgs {
  std::string config;
  std::size_t trials = 0;  // 0: validate.trials from the config
  std::optional<std::uint64_t> seed;
  ForceTau force = ForceTau::None;
};

struct EmitPlotArgs {
  std::string records;
  std::string group_by = "alpha";
  std::string out;
};

struct GapDatasetArgs {
  std::string config;
  std::string out;
  double scale = 0.02;
  std::size_t min_iterations = 0;
  std::optional<std::uint64_t> seed;
};

struct TrainPredictorArgs {
  std::string config;  // provides the hypothesis architecture
  std::string dataset;
  std::string out;
  std::size_t epochs = 100;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

int cmd_run_experiment(const RunExperimentArgs& args, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err);
int cmd_emit_plot(const EmitPlotArgs& args, std::ostream& out, std::ostream& err);
int cmd_invert_kl(double q, double tau, std::ostream& out, std::ostream& err);
int cmd_build_gap_dataset(const GapDatasetArgs& args, std::ostream& out, std::ostream& err);
int cmd_train_predictor(const TrainPredictorArgs& args, std::ostream& out, std::ostream& err);

}  // namespace pacgibbs
