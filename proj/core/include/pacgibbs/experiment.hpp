#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pacgibbs/config.hpp"
#include "pacgibbs/data.hpp"
#include "pacgibbs/neural_complexity.hpp"
#include "pacgibbs/records.hpp"
#include "pacgibbs/synthetic.hpp"

namespace pacgibbs {

/// Learning pool and test set for a configured task, plus the oracle when
/// the task is synthetic.
struct TaskData {
  Dataset pool;
  Dataset test;
  std::shared_ptr<const SyntheticTask> synthetic;
};

TaskData load_task(const TaskConfig& cfg, std::uint64_t master_seed);

/// Label used in records and plots: "emp_risk", "regularized:par_norm", ...
std::string mu_label(const MuConfig& cfg);

/// Hypothesis drawn from a Gibbs distribution together with the exact μ it
/// was drawn for (references filled in).
struct GibbsDraw {
  ParamVector params;
  MuSpec spec;
};

/// Runs the configured μ protocol on `sample`: an SGD reference when the
/// family needs one, then SGLD from the initialisation or the reference.
GibbsDraw draw_gibbs(const ExperimentConfig& cfg, const Dataset& sample, const Dataset* test,
                     const ParamVector& init, double alpha, std::optional<double> beta, std::uint64_t seed,
                     std::shared_ptr<const GapPredictor> predictor);

struct SweepOptions {
  std::optional<std::uint64_t> seed;  // overrides sweep.seed
  bool record_timing = true;
};

/// One record per (point, family); failed points produce "failed" records.
std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, const SweepOptions& options = {});

enum class ForceTau { None, Infinity, Zero };

struct FamilyValidity {
  BoundFamily family;
  std::size_t violations = 0;
  double rate = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::size_t trials = 0;
  std::size_t m = 0;
  std::size_t m_prime = 0;
  double alpha = 0.0;
  double delta = 0.0;
  std::vector<FamilyValidity> families;
  bool pass = false;
};

/// Monte Carlo check of kl(R_S(h)‖R_D(h)) ≤ τ over fresh samples from the
/// synthetic distribution. Only cor4/cor5 are checked.
ValidationReport run_validation(const ExperimentConfig& cfg, std::size_t trials, ForceTau force = ForceTau::None,
                                std::optional<std::uint64_t> seed = std::nullopt);

std::string format_report(const ValidationReport& report);

enum class GroupBy { Alpha, Beta, Family };
GroupBy parse_group_by(const std::string& name);

/// CSV summary of the records: mean/std of risk_upper and test risk per
/// (group, family) cell. Sample standard deviation; 0 when n = 1.
std::string plot_csv(const std::vector<RunRecord>& records, GroupBy group_by,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace pacgibbs
