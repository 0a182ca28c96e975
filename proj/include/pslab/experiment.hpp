#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pslab/data.hpp"
#include "pslab/split.hpp"
#include "pslab/stats.hpp"
#include "pslab/train.hpp"

namespace pslab {

/// DirPA variants to run and the hyperparameter grids searched per seed.
struct DirpaGridConfig {
  bool run_baseline = true;
  bool run_dirpa = true;
  std::vector<double> alpha_grid = {0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0};
  std::vector<double> tau_grid = {0.5, 1.0, 2.0, 5.0, 10.0};
  DirpaMode mode = DirpaMode::symmetric;
  double asym_focus_alpha = 1.0;
};

/// Optional pre-training phase shared by all cells of one seed.
struct PretrainSection {
  SyntheticSpec synthetic;
  SplitSpec split;
  PretrainConfig cfg;
};

struct ExperimentConfig {
  std::optional<SyntheticSpec> synthetic;
  std::string csv_path;
  std::string manifest_path;
  SplitSpec split;
  std::uint64_t kshot_seed = 0;
  std::vector<int> k_grid = {1, 5, 10, 20, 100};
  std::vector<std::uint64_t> seeds = {0, 1, 42, 123, 1234};
  std::vector<LossKind> losses = {LossKind::ce, LossKind::focal};
  DirpaGridConfig dirpa;
  std::vector<double> focal_gamma_grid = {1.0, 1.5, 2.0, 3.0};
  TrainConfig train;
  ModelConfig model;  // feature_dim and num_classes are filled from the data
  std::optional<PretrainSection> pretrain;
  std::string output_dir = "results";
  bool write_traces = true;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// One results.csv line; aggregate lines carry "mean"/"std" in the seed
/// column and empty alpha/tau.
struct ResultRow {
  std::string run_id;
  int k = 0;
  LossKind loss = LossKind::ce;
  bool dirpa = false;
  std::optional<double> alpha;
  std::optional<double> tau;
  std::string seed;  // decimal seed, "mean", or "std"
  MetricLevel level = MetricLevel::fine;
  double kappa = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct ImbalanceRow {
  int k = 0;
  double gini_test = 0.0;
  double bhattacharyya = 0.0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
  std::vector<ImbalanceRow> imbalance;
  std::vector<std::string> failures;
};

/// Runs every (k, loss, DirPA, seed) cell: per-seed grid selection on
/// validation kappa, test evaluation of the selected checkpoint at fine and
/// parent level, per-seed rows plus mean/std aggregate rows. Writes
/// results.csv, imbalance.csv, and per-run traces under cfg.output_dir.
/// A failing cell is recorded and skipped; other cells continue.
ResultsTable run_experiment(const ExperimentConfig& cfg);

void write_results_csv(const ResultsTable& table, const std::string& path);
void write_imbalance_csv(const ResultsTable& table, const std::string& path);

std::vector<ResultRow> load_results_csv(const std::string& path);
std::vector<ImbalanceRow> load_imbalance_csv(const std::string& path);

/// Pairs DirPA-on rows with their baselines (matching k, loss, level,
/// aggregate mean) and writes gain rows against the test-set Gini and the
/// per-k Bhattacharyya distance; positive gains are marked "+", losses "-".
/// Unpaired cells are skipped with a warning on stderr.
void emit_gain_plot_data(const std::vector<ResultRow>& rows,
                         const std::vector<ImbalanceRow>& imbalance,
                         const std::string& path);

/// K = 3 Dirichlet log-density over a barycentric grid: the triangle
/// {p1, p2 >= 0, p1 + p2 <= 1} is cut into 2 n^2 cells, boundary cells are
/// recursively subdivided refine_depth times (integrable singularities at
/// alpha < 1 live there), and each row carries the cell centroid plus its
/// weight, so Integral ~= sum(weight * exp(log_density)).
void emit_dirichlet_density(double alpha, int resolution,
                            const std::string& path, int refine_depth = 10);

const char* loss_kind_name(LossKind loss);

}  // namespace pslab
