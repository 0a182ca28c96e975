#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pslab/data.hpp"
#include "pslab/rng.hpp"

namespace pslab {

/// Desk-scale encoder: per-step input projection plus sinusoidal positional
/// encoding, an optional single self-attention block, mean pooling, and a
/// linear head. f = f_head  composed with  f_backbone.
struct ModelConfig {
  int feature_dim = 1;
  int embed_dim = 8;
  bool use_attention = false;
  int t_max = 366;
  int num_classes = 2;
};

struct ParamBlock {
  std::vector<double> value;
  std::vector<double> grad;

  void resize(std::size_t n) {
    value.assign(n, 0.0);
    grad.assign(n, 0.0);
  }
  std::size_t size() const { return value.size(); }
};

/// Backbone blocks (input projection, attention) and head blocks (affine
/// classifier), each paired with a gradient accumulator of identical shape.
/// `revision` advances whenever parameter values change, so a forward cache
/// taken before an update is detectably stale.
struct ModelParameters {
  ParamBlock input_w;  // embed_dim x feature_dim, row-major
  ParamBlock input_b;  // embed_dim
  ParamBlock attn_q;   // embed_dim x embed_dim (empty when attention is off)
  ParamBlock attn_k;   // embed_dim x embed_dim
  ParamBlock head_w;   // num_classes x embed_dim
  ParamBlock head_b;   // num_classes
  bool backbone_frozen = false;
  std::uint64_t revision = 0;

  std::vector<ParamBlock*> backbone_blocks();
  std::vector<ParamBlock*> head_blocks();
  std::vector<const ParamBlock*> backbone_blocks() const;

  void zero_grads();
};

/// Sinusoidal positional encoding with base t_max:
/// PE[2i] = sin(day / t_max^(2i/embed_dim)), PE[2i+1] = cos(...).
/// Throws std::invalid_argument for a day outside [1, t_max].
std::vector<double> positional_encoding(int day, const ModelConfig& cfg);

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
ModelParameters init_parameters(const ModelConfig& cfg, Rng& rng);

/// Re-draws the head for a (possibly different) class count; the backbone
/// blocks stay bit-identical. cfg.num_classes must already be updated.
void reinit_head(ModelParameters& params, const ModelConfig& cfg, Rng& rng);

/// Toggles whether backward/optimizer touch the backbone blocks.
void freeze_backbone(ModelParameters& params, bool frozen);

/// Activations retained for the backward pass.
struct ForwardCache {
  std::vector<double> logits;
  std::vector<std::vector<double>> embeddings;  // T x embed_dim
  std::vector<std::vector<double>> attn;        // T x T row-softmax weights
  std::vector<std::vector<double>> queries;     // T x embed_dim
  std::vector<std::vector<double>> keys;        // T x embed_dim
  std::vector<double> pooled;                   // embed_dim
  const Sample* sample = nullptr;
  std::uint64_t revision = 0;
};

/// Throws std::invalid_argument on a feature-dimension or day-range mismatch.
ForwardCache forward(const ModelParameters& params, const ModelConfig& cfg,
                     const Sample& sample);

/// Exact reverse-mode gradients, accumulated into the parameter grad blocks.
/// Backbone accumulation is skipped while frozen. Throws std::logic_error if
/// the cache predates the current parameter revision.
void backward(ModelParameters& params, const ModelConfig& cfg,
              const ForwardCache& cache,
              const std::vector<double>& grad_wrt_logits);

struct Checkpoint {
  ModelConfig config;
  ModelParameters params;
  std::uint64_t seed = 0;
};

/// Flat binary checkpoint, versioned with the magic string "PSLAB1":
/// config, parameter blocks in declared order, and the producing seed.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pslab
