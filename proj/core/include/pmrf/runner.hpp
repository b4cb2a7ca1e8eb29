#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pmrf/dataset.hpp"
#include "pmrf/learner.hpp"

namespace pmrf {

enum class Method { linbp, lcm, lcm_wo, lcm_l1, lcm_l2 };
enum class PriorMode { auto_detect, logreg, labels };

Method parse_method(const std::string& s);
std::string method_name(Method m);

struct RunConfig {
  std::string dataset_dir;
  Method method = Method::lcm;
  Hyperparams hp;
  int linbp_iters = -1;  // fixed iteration count for linbp; -1 = tolerance mode
  double linbp_tol = 1e-8;
  int linbp_max_iter = 100;
  SplitSpec split;
  std::string fixed_test_path;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  PriorMode prior_mode = PriorMode::auto_detect;
  LogRegConfig logreg;
  bool normalize_features = false;  // L1-normalize feature rows before fitting
  bool infer_n = false;
  std::string out_dir;
  // sweep grids; empty = appendix defaults
  std::vector<double> grid_gamma1;
  std::vector<double> grid_gamma2;
  std::vector<double> grid_lambda;
  std::vector<int> grid_linbp_iters;
};

struct PhaseTimings {
  double load_s = 0, priors_s = 0, fit_s = 0, predict_s = 0;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  double train_acc = 0, val_acc = 0, test_acc = 0;
  std::filesystem::path run_dir;
  PhaseTimings timings;
};

struct TrainSummary {
  std::vector<SeedOutcome> per_seed;
  double test_mean = 0, test_std = 0;
  double val_mean = 0;
  std::filesystem::path out_dir;
};

// One full train/evaluate pass per seed. Writes, per seed directory:
// report.json (deterministic: config, seed, version, history, accuracies,
// weight stats), timings.json (wall clock, kept out of report.json so
// identical runs stay byte-identical), predictions.csv, weights.csv,
// coupling_centered.csv, coupling_uncentered.csv. A summary.json aggregates
// the seeds.
TrainSummary run_train(const RunConfig& cfg);

struct SweepResult {
  Hyperparams best_hp;
  int best_linbp_iters = -1;
  double best_val_mean = 0;
  bool tie = false;
  TrainSummary best_summary;
};

// Exhaustive grid (defaults = the stock tuning grids), selection by mean
// validation accuracy, ties broken by first point in lexicographic grid
// order; test accuracy re-reported for the selected point only.
SweepResult run_sweep(const RunConfig& cfg);

struct EdgeWeightStats {
  std::optional<double> homo_mean, hetero_mean;
  std::int64_t homo_count = 0, hetero_count = 0;
  std::int64_t excluded_unlabeled = 0;
};

EdgeWeightStats weight_stats(const SparseGraph& g, const std::vector<double>& w,
                             const std::vector<int>& labels);

struct StatsReport {
  EdgeWeightStats init;
  EdgeWeightStats learnt;
};

// Recomputes homo/hetero weight averages from a completed run directory.
StatsReport run_stats(const std::filesystem::path& run_dir,
                      const std::filesystem::path& out_file = {});

// Re-exports the coupling matrix of a completed run (or the initial coupling
// for a class count) to CSV.
void run_export_coupling(const std::filesystem::path& run_dir,
                         const std::filesystem::path& out_base);
void export_initial_coupling(int C, const std::filesystem::path& out_base);

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels,
                const std::vector<int>& nodes);

}  // namespace pmrf
