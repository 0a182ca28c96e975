#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pslab/data.hpp"
#include "pslab/dirpa.hpp"
#include "pslab/losses.hpp"
#include "pslab/metrics.hpp"
#include "pslab/model.hpp"
#include "pslab/split.hpp"

namespace pslab {

enum class Schedule { constant, cosine_one_cycle };
enum class LossKind { ce, focal };
enum class CheckpointCriterion { val_loss, val_kappa, val_accuracy };

struct TrainConfig {
  int batch_size = 16;
  int max_epochs = 200;
  int patience = 20;
  double lr_head = 1e-2;
  double lr_backbone = 1e-3;
  Schedule schedule = Schedule::constant;
  int warmup_epochs = 0;
  std::uint64_t seed = 0;
  std::optional<DirpaConfig> dirpa;
  LossKind loss = LossKind::ce;
  SmoothingConfig smoothing;
  FocalConfig focal;
  int freeze_backbone_epochs = 0;
  CheckpointCriterion checkpoint = CheckpointCriterion::val_kappa;
  bool record_priors = false;
};

struct EpochRecord {
  int epoch = 0;  // 1-based, contiguous
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_kappa = 0.0;
  double val_accuracy = 0.0;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  long clamp_events = 0;
  double wall_time_sec = 0.0;
  std::vector<PseudoPrior> prior_trace;  // one per step when record_priors
};

/// Adam first/second moment buffers, one pair per parameter block, plus the
/// shared step counter.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;

  static AdamState for_params(const ModelParameters& params);
};

/// One bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8) with
/// separate learning rates for head and backbone; frozen backbone blocks are
/// skipped entirely. Throws std::runtime_error on a non-finite gradient.
void adam_step(ModelParameters& params, AdamState& state, double lr_head,
               double lr_backbone);

/// Linear ramp 0 -> base_lr over warmup_epochs, then half-cosine decay
/// base_lr (1 + cos(pi t)) / 2 with t = (epoch - warmup) / (max - warmup).
/// Throws std::invalid_argument when warmup >= max_epochs or epoch is out of
/// range.
double cosine_one_cycle_lr(double base_lr, int epoch, int max_epochs,
                           int warmup_epochs);

double scheduled_lr(const TrainConfig& cfg, double base_lr, int epoch);

Label predict(const ModelParameters& params, const ModelConfig& cfg,
              const Sample& sample);

struct EvalResult {
  double mean_loss = 0.0;
  ConfusionMatrix confusion;
};

/// Mean loss and confusion matrix on a dataset slice; logits are used as-is
/// (no DirPA adjustment outside training).
EvalResult evaluate(const ModelParameters& params, const ModelConfig& cfg,
                    const Dataset& dataset,
                    const std::vector<std::size_t>& indices,
                    const TrainConfig& tcfg);

/// Test hook replacing the Dirichlet draw (e.g. a uniform-forcing stub).
using PriorSource = std::function<PseudoPrior(int num_classes, Rng& rng)>;

struct TrainResult {
  Checkpoint best;
  RunRecord record;
};

/// One training run per Algorithm "sample batch -> sample pseudo-prior ->
/// adjust -> softmax -> loss -> backprop": per epoch the train indices are
/// shuffled, one pseudo-prior is drawn per mini-batch (when DirPA is
/// configured), the mini-batch loss is the arithmetic mean, and Adam updates
/// follow each batch. After each epoch the validation set is scored; early
/// stopping watches validation loss, while the returned checkpoint is the
/// best epoch under cfg.checkpoint (earliest epoch wins ties).
TrainResult train_loop(const ModelConfig& model_cfg, ModelParameters params,
                       const Dataset& dataset,
                       const std::vector<std::size_t>& train_indices,
                       const std::vector<std::size_t>& val_indices,
                       const TrainConfig& cfg, Rng& rng,
                       const PriorSource& prior_source = nullptr);

struct PretrainConfig {
  TrainConfig train;
  int per_class_cap = 10000;
};

/// Pre-trains on the (per-class capped) pre-training split, then fine-tunes
/// with the best backbone and a freshly initialized head sized for the
/// fine-tuning classes. Backbone dimensions must match across phases.
std::pair<TrainResult, TrainResult> pretrain_then_finetune(
    const ModelConfig& pre_model, const Dataset& pre_data,
    const SplitResult& pre_split, const PretrainConfig& pre_cfg,
    const ModelConfig& fine_model, const Dataset& fine_data,
    const std::vector<std::size_t>& fine_train,
    const std::vector<std::size_t>& fine_val, const TrainConfig& fine_cfg);

/// JSON-lines trace, one record per epoch, then one footer record.
void write_run_trace(const RunRecord& record, const std::string& path);

}  // namespace pslab
