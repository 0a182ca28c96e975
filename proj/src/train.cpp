#include "pslab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pslab {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Stream tags for deriving independent RNG streams from the run seed. The
// prior stream exists whether or not DirPA is on, so toggling it cannot
// shift the shuffle stream.
constexpr std::uint64_t kShuffleStream = 101;
constexpr std::uint64_t kPriorStream = 102;

void check_train_config(const TrainConfig& cfg) {
  if (cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1 ||
      cfg.lr_head <= 0.0 || cfg.lr_backbone <= 0.0 ||
      cfg.freeze_backbone_epochs < 0) {
    throw std::invalid_argument("TrainConfig: invalid values");
  }
  if (cfg.schedule == Schedule::cosine_one_cycle &&
      cfg.warmup_epochs >= cfg.max_epochs) {
    throw std::invalid_argument("TrainConfig: warmup must be < max_epochs");
  }
}

LossGrad compute_loss(const TrainConfig& cfg, const std::vector<double>& probs,
                      Label target, long* clamp_events) {
  if (cfg.loss == LossKind::focal) {
    return focal(probs, target, cfg.focal, clamp_events);
  }
  return ce_smoothed(probs, target, cfg.smoothing, clamp_events);
}

void update_block(ParamBlock& block, std::vector<double>& m,
                  std::vector<double>& v, double lr, double bias1,
                  double bias2) {
  for (std::size_t i = 0; i < block.value.size(); ++i) {
    const double g = block.grad[i];
    if (!std::isfinite(g)) {
      throw std::runtime_error("adam_step: non-finite gradient");
    }
    m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    block.value[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
  }
}

}  // namespace

AdamState AdamState::for_params(const ModelParameters& params) {
  AdamState state;
  const ParamBlock* blocks[6] = {&params.input_w, &params.input_b,
                                 &params.attn_q,  &params.attn_k,
                                 &params.head_w,  &params.head_b};
  for (const ParamBlock* b : blocks) {
    state.m.emplace_back(b->size(), 0.0);
    state.v.emplace_back(b->size(), 0.0);
  }
  return state;
}

void adam_step(ModelParameters& params, AdamState& state, double lr_head,
               double lr_backbone) {
  ++state.step;
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));

  ParamBlock* blocks[6] = {&params.input_w, &params.input_b, &params.attn_q,
                           &params.attn_k,  &params.head_w,  &params.head_b};
  for (std::size_t i = 0; i < 6; ++i) {
    const bool backbone = i < 4;
    if (backbone && params.backbone_frozen) continue;
    update_block(*blocks[i], state.m[i], state.v[i],
                 backbone ? lr_backbone : lr_head, bias1, bias2);
  }
  ++params.revision;
}

double cosine_one_cycle_lr(double base_lr, int epoch, int max_epochs,
                           int warmup_epochs) {
  if (warmup_epochs < 0 || warmup_epochs >= max_epochs) {
    throw std::invalid_argument("cosine_one_cycle_lr: warmup >= max_epochs");
  }
  if (epoch < 0 || epoch >= max_epochs) {
    throw std::invalid_argument("cosine_one_cycle_lr: epoch out of range");
  }
  if (epoch < warmup_epochs) {
    return base_lr * static_cast<double>(epoch) /
           static_cast<double>(warmup_epochs);
  }
  const double t = static_cast<double>(epoch - warmup_epochs) /
                   static_cast<double>(max_epochs - warmup_epochs);
  return base_lr * (1.0 + std::cos(std::numbers::pi * t)) / 2.0;
}

double scheduled_lr(const TrainConfig& cfg, double base_lr, int epoch) {
  if (cfg.schedule == Schedule::cosine_one_cycle) {
    return cosine_one_cycle_lr(base_lr, epoch, cfg.max_epochs,
                               cfg.warmup_epochs);
  }
  return base_lr;
}

Label predict(const ModelParameters& params, const ModelConfig& cfg,
              const Sample& sample) {
  const ForwardCache cache = forward(params, cfg, sample);
  const auto it = std::max_element(cache.logits.begin(), cache.logits.end());
  return static_cast<Label>(it - cache.logits.begin());
}

EvalResult evaluate(const ModelParameters& params, const ModelConfig& cfg,
                    const Dataset& dataset,
                    const std::vector<std::size_t>& indices,
                    const TrainConfig& tcfg) {
  if (indices.empty()) {
    throw std::invalid_argument("evaluate: empty index set");
  }
  EvalResult result{0.0, ConfusionMatrix(cfg.num_classes)};
  for (std::size_t i : indices) {
    const Sample& sample = dataset.samples.at(i);
    const ForwardCache cache = forward(params, cfg, sample);
    const std::vector<double> probs = softmax(cache.logits);
    result.mean_loss += compute_loss(tcfg, probs, sample.label, nullptr).loss;
    const auto it = std::max_element(cache.logits.begin(), cache.logits.end());
    result.confusion.add(sample.label,
                         static_cast<Label>(it - cache.logits.begin()));
  }
  result.mean_loss /= static_cast<double>(indices.size());
  return result;
}

TrainResult train_loop(const ModelConfig& model_cfg, ModelParameters params,
                       const Dataset& dataset,
                       const std::vector<std::size_t>& train_indices,
                       const std::vector<std::size_t>& val_indices,
                       const TrainConfig& cfg, Rng& rng,
                       const PriorSource& prior_source) {
  check_train_config(cfg);
  if (train_indices.empty()) {
    throw std::invalid_argument("train_loop: empty training set");
  }
  if (val_indices.empty()) {
    throw std::invalid_argument(
        "train_loop: early stopping needs a validation set");
  }
  const auto start = std::chrono::steady_clock::now();

  Rng shuffle_rng = rng.derive(kShuffleStream);
  Rng prior_rng = rng.derive(kPriorStream);

  TrainResult result;
  result.best.config = model_cfg;
  result.best.seed = cfg.seed;

  AdamState adam = AdamState::for_params(params);
  std::vector<std::size_t> order = train_indices;

  double best_criterion = -std::numeric_limits<double>::infinity();
  double best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double lr_head = scheduled_lr(cfg, cfg.lr_head, epoch - 1);
    const double lr_backbone = scheduled_lr(cfg, cfg.lr_backbone, epoch - 1);
    freeze_backbone(params, epoch <= cfg.freeze_backbone_epochs);

    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      const double batch_size = static_cast<double>(end - begin);

      PseudoPrior prior;
      if (cfg.dirpa.has_value()) {
        prior = prior_source
                    ? prior_source(model_cfg.num_classes, prior_rng)
                    : sample_pseudo_prior(model_cfg.num_classes, *cfg.dirpa,
                                          prior_rng);
        if (cfg.record_priors) result.record.prior_trace.push_back(prior);
      }

      params.zero_grads();
      for (std::size_t b = begin; b < end; ++b) {
        const Sample& sample = dataset.samples.at(order[b]);
        const ForwardCache cache = forward(params, model_cfg, sample);
        std::vector<double> logits = cache.logits;
        if (cfg.dirpa.has_value()) {
          logits = adjust_logits(logits, prior, cfg.dirpa->tau,
                                 &result.record.clamp_events);
        }
        const std::vector<double> probs = softmax(logits);
        LossGrad lg = compute_loss(cfg, probs, sample.label,
                                   &result.record.clamp_events);
        loss_sum += lg.loss;
        for (double& g : lg.grad_wrt_logits) g /= batch_size;
        backward(params, model_cfg, cache, lg.grad_wrt_logits);
      }
      adam_step(params, adam, lr_head, lr_backbone);
    }

    const EvalResult val = evaluate(params, model_cfg, dataset, val_indices, cfg);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = val.mean_loss;
    rec.val_kappa = cohen_kappa(val.confusion);
    rec.val_accuracy = micro_accuracy(val.confusion);
    result.record.epochs.push_back(rec);

    double criterion = 0.0;
    switch (cfg.checkpoint) {
      case CheckpointCriterion::val_loss: criterion = -rec.val_loss; break;
      case CheckpointCriterion::val_kappa: criterion = rec.val_kappa; break;
      case CheckpointCriterion::val_accuracy: criterion = rec.val_accuracy; break;
    }
    if (criterion > best_criterion) {
      best_criterion = criterion;
      result.best.params = params;
      result.record.best_epoch = epoch;
    }

    if (rec.val_loss < best_val_loss) {
      best_val_loss = rec.val_loss;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= cfg.patience) break;
    }
  }

  freeze_backbone(result.best.params, false);
  result.record.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

std::pair<TrainResult, TrainResult> pretrain_then_finetune(
    const ModelConfig& pre_model, const Dataset& pre_data,
    const SplitResult& pre_split, const PretrainConfig& pre_cfg,
    const ModelConfig& fine_model, const Dataset& fine_data,
    const std::vector<std::size_t>& fine_train,
    const std::vector<std::size_t>& fine_val, const TrainConfig& fine_cfg) {
  if (pre_model.feature_dim != fine_model.feature_dim ||
      pre_model.embed_dim != fine_model.embed_dim ||
      pre_model.use_attention != fine_model.use_attention ||
      pre_model.t_max != fine_model.t_max) {
    throw std::invalid_argument(
        "pretrain_then_finetune: backbone dimensions differ across phases");
  }
  if (pre_cfg.per_class_cap < 1) {
    throw std::invalid_argument("pretrain_then_finetune: cap must be >= 1");
  }

  // Downsample each class to at most per_class_cap training samples; classes
  // below the cap keep all their samples.
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(pre_model.num_classes));
  for (std::size_t i : pre_split.train) {
    by_class[static_cast<std::size_t>(pre_data.samples.at(i).label)].push_back(i);
  }
  const Rng cap_base = Rng(pre_cfg.train.seed).derive(201);
  std::vector<std::size_t> capped_train;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() > static_cast<std::size_t>(pre_cfg.per_class_cap)) {
      Rng class_rng = cap_base.derive(static_cast<std::uint64_t>(c));
      class_rng.shuffle(members);
      members.resize(static_cast<std::size_t>(pre_cfg.per_class_cap));
      std::sort(members.begin(), members.end());
    }
    capped_train.insert(capped_train.end(), members.begin(), members.end());
  }
  std::sort(capped_train.begin(), capped_train.end());

  Rng pre_rng(pre_cfg.train.seed);
  Rng pre_init = pre_rng.derive(202);
  ModelParameters pre_params = init_parameters(pre_model, pre_init);
  TrainResult pre_result =
      train_loop(pre_model, std::move(pre_params), pre_data, capped_train,
                 pre_split.validation, pre_cfg.train, pre_rng);

  // Best backbone carries over; the head is re-drawn for the fine-tuning
  // class count with the fine-tuning run seed.
  Rng fine_rng(fine_cfg.seed);
  Rng head_rng = fine_rng.derive(203);
  ModelParameters fine_params = pre_result.best.params;
  reinit_head(fine_params, fine_model, head_rng);
  TrainResult fine_result =
      train_loop(fine_model, std::move(fine_params), fine_data, fine_train,
                 fine_val, fine_cfg, fine_rng);
  return {std::move(pre_result), std::move(fine_result)};
}

void write_run_trace(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  for (const EpochRecord& e : record.epochs) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["val_loss"] = e.val_loss;
    j["val_kappa"] = e.val_kappa;
    j["val_accuracy"] = e.val_accuracy;
    out << j.dump() << "\n";
  }
  nlohmann::json footer;
  footer["best_epoch"] = record.best_epoch;
  footer["clamp_events"] = record.clamp_events;
  footer["wall_time_sec"] = record.wall_time_sec;
  out << footer.dump() << "\n";
}

}  // namespace pslab
