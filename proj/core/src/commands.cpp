#include "pacgibbs/commands.hpp"

#include <cstdio>
#include <fstream>

#include "pacgibbs/kl.hpp"

namespace pacgibbs {

namespace {

// Maps exceptions to exit codes; config problems are 2, the rest 3.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return exit_code::kConfig;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code::kConfig;
  } catch (const std::domain_error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code::kConfig;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code::kRuntime;
  }
}

}  // namespace

int cmd_run_experiment(const RunExperimentArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = ExperimentConfig::load(args.config);
    SweepOptions opts;
    opts.seed = args.seed;
    opts.record_timing = !args.no_timing;
    const auto records = run_sweep(cfg, opts);
    persist_records(records, args.out);
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.status == "ok" ? 0 : 1;
    if (failed > 0) err << "warning: " << failed << " record(s) failed; see the error field\n";
    out << "wrote " << records.size() << " records to " << args.out << "\n";
    return exit_code::kOk;
  });
}

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = ExperimentConfig::load(args.config);
    const std::size_t trials = args.trials > 0 ? args.trials : cfg.validate.trials;
    const ValidationReport rep = run_validation(cfg, trials, args.force, args.seed);
    out << format_report(rep);
    return exit_code::kOk;
  });
}

int cmd_emit_plot(const EmitPlotArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const GroupBy g = parse_group_by(args.group_by);
    const auto records = load_records(args.records);
    std::vector<std::string> warnings;
    const std::string csv = plot_csv(records, g, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    std::ofstream f(args.out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + args.out);
    f << csv;
    out << "wrote " << args.out << "\n";
    return exit_code::kOk;
  });
}

int cmd_invert_kl(double q, double tau, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", kl_inv_upper(q, tau));
    out << buf << "\n";
    return exit_code::kOk;
  });
}

int cmd_build_gap_dataset(const GapDatasetArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = ExperimentConfig::load(args.config);
    const std::uint64_t seed = args.seed.value_or(cfg.sweep.seed);
    const TaskData td = load_task(cfg.task, seed);
    GapBuilderConfig gb;
    gb.arch = cfg.model.architecture(td.pool.dim, td.pool.num_classes);
    gb.schedule = scaled_gap_schedule(args.scale);
    gb.sgd = cfg.sampler;
    gb.min_iterations = args.min_iterations;
    gb.threads = cfg.sweep.threads;
    const auto entries = build_gap_dataset(td.pool, gb, seed);
    save_gap_dataset(entries, args.out);
    out << "wrote " << entries.size() << " entries to " << args.out << "\n";
    return exit_code::kOk;
  });
}

int cmd_train_predictor(const TrainPredictorArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig cfg = ExperimentConfig::load(args.config);
    const TaskData td = load_task(cfg.task, cfg.sweep.seed);
    const Architecture arch = cfg.model.architecture(td.pool.dim, td.pool.num_classes);
    const auto entries = load_gap_dataset(args.dataset, arch);
    PredictorConfig pc;
    pc.epochs = args.epochs;
    pc.adam_lr = args.lr;
    pc.seed = args.seed;
    const TrainedPredictor tp = train_predictor(entries, pc);
    tp.predictor.save(args.out);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", tp.best_val_mae);
    out << "best validation MAE " << buf << " at epoch " << tp.best_epoch << "; saved " << args.out << "\n";
    return exit_code::kOk;
  });
}

}  // namespace pacgibbs
