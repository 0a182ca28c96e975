#include "pslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pslab/dirpa.hpp"

namespace pslab {

namespace {

constexpr char kMagic[6] = {'P', 'S', 'L', 'A', 'B', '1'};

void check_config(const ModelConfig& cfg) {
  if (cfg.feature_dim < 1 || cfg.embed_dim < 1 || cfg.num_classes < 2 ||
      cfg.t_max < 1) {
    throw std::invalid_argument("ModelConfig: invalid dimensions");
  }
}

void fill_uniform(ParamBlock& block, double fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(fan_in);
  for (double& w : block.value) w = rng.uniform(-bound, bound);
}

}  // namespace

std::vector<ParamBlock*> ModelParameters::backbone_blocks() {
  return {&input_w, &input_b, &attn_q, &attn_k};
}

std::vector<ParamBlock*> ModelParameters::head_blocks() {
  return {&head_w, &head_b};
}

std::vector<const ParamBlock*> ModelParameters::backbone_blocks() const {
  return {&input_w, &input_b, &attn_q, &attn_k};
}

void ModelParameters::zero_grads() {
  for (ParamBlock* b : backbone_blocks()) {
    std::fill(b->grad.begin(), b->grad.end(), 0.0);
  }
  for (ParamBlock* b : head_blocks()) {
    std::fill(b->grad.begin(), b->grad.end(), 0.0);
  }
}

std::vector<double> positional_encoding(int day, const ModelConfig& cfg) {
  check_config(cfg);
  if (day < 1 || day > cfg.t_max) {
    throw std::invalid_argument("positional_encoding: day outside [1, t_max]");
  }
  const int n = cfg.embed_dim;
  std::vector<double> pe(static_cast<std::size_t>(n));
  for (int i = 0; 2 * i < n; ++i) {
    const double divisor = std::pow(static_cast<double>(cfg.t_max),
                                    2.0 * i / static_cast<double>(n));
    const double angle = static_cast<double>(day) / divisor;
    pe[static_cast<std::size_t>(2 * i)] = std::sin(angle);
    if (2 * i + 1 < n) pe[static_cast<std::size_t>(2 * i + 1)] = std::cos(angle);
  }
  return pe;
}

ModelParameters init_parameters(const ModelConfig& cfg, Rng& rng) {
  check_config(cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t d = static_cast<std::size_t>(cfg.feature_dim);
  const std::size_t k = static_cast<std::size_t>(cfg.num_classes);

  ModelParameters params;
  params.input_w.resize(n * d);
  params.input_b.resize(n);
  if (cfg.use_attention) {
    params.attn_q.resize(n * n);
    params.attn_k.resize(n * n);
  }
  params.head_w.resize(k * n);
  params.head_b.resize(k);

  fill_uniform(params.input_w, static_cast<double>(d), rng);
  if (cfg.use_attention) {
    fill_uniform(params.attn_q, static_cast<double>(n), rng);
    fill_uniform(params.attn_k, static_cast<double>(n), rng);
  }
  fill_uniform(params.head_w, static_cast<double>(n), rng);
  params.revision = 1;
  return params;
}

void reinit_head(ModelParameters& params, const ModelConfig& cfg, Rng& rng) {
  check_config(cfg);
  const std::size_t n = static_cast<std::size_t>(cfg.embed_dim);
  const std::size_t k = static_cast<std::size_t>(cfg.num_classes);
  params.head_w.resize(k * n);
  params.head_b.resize(k);
  fill_uniform(params.head_w, static_cast<double>(n), rng);
  ++params.revision;
}

void freeze_backbone(ModelParameters& params, bool frozen) {
  params.backbone_frozen = frozen;
}

ForwardCache forward(const ModelParameters& params, const ModelConfig& cfg,
                     const Sample& sample) {
  check_config(cfg);
  const std::size_t t_len = sample.length();
  const int n = cfg.embed_dim;
  const int d = cfg.feature_dim;
  if (t_len == 0) throw std::invalid_argument("forward: empty sample");

  ForwardCache cache;
  cache.sample = &sample;
  cache.revision = params.revision;
  cache.embeddings.resize(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    if (static_cast<int>(sample.features[t].size()) != d) {
      throw std::invalid_argument("forward: feature dimension mismatch");
    }
    std::vector<double> e = positional_encoding(sample.times[t], cfg);
    for (int i = 0; i < n; ++i) {
      double acc = params.input_b.value[static_cast<std::size_t>(i)];
      const double* w_row =
          params.input_w.value.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) acc += w_row[j] * sample.features[t][static_cast<std::size_t>(j)];
      e[static_cast<std::size_t>(i)] += acc;
    }
    cache.embeddings[t] = std::move(e);
  }

  // Attention re-weights the step embeddings: H = softmax(QK^T / sqrt(n)) E.
  const std::vector<std::vector<double>>* pooled_src = &cache.embeddings;
  std::vector<std::vector<double>> attended;
  if (cfg.use_attention) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    cache.queries.assign(t_len, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    cache.keys.assign(t_len, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (std::size_t t = 0; t < t_len; ++t) {
      for (int j = 0; j < n; ++j) {
        double q = 0.0, kk = 0.0;
        for (int i = 0; i < n; ++i) {
          const double e = cache.embeddings[t][static_cast<std::size_t>(i)];
          q += e * params.attn_q.value[static_cast<std::size_t>(i) * n + j];
          kk += e * params.attn_k.value[static_cast<std::size_t>(i) * n + j];
        }
        cache.queries[t][static_cast<std::size_t>(j)] = q;
        cache.keys[t][static_cast<std::size_t>(j)] = kk;
      }
    }
    cache.attn.resize(t_len);
    attended.assign(t_len, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (std::size_t t = 0; t < t_len; ++t) {
      std::vector<double> scores(t_len);
      for (std::size_t s = 0; s < t_len; ++s) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j) {
          dot += cache.queries[t][static_cast<std::size_t>(j)] *
                 cache.keys[s][static_cast<std::size_t>(j)];
        }
        scores[s] = dot * scale;
      }
      cache.attn[t] = softmax(scores);
      for (std::size_t s = 0; s < t_len; ++s) {
        const double a = cache.attn[t][s];
        for (int j = 0; j < n; ++j) {
          attended[t][static_cast<std::size_t>(j)] +=
              a * cache.embeddings[s][static_cast<std::size_t>(j)];
        }
      }
    }
    pooled_src = &attended;
  }

  cache.pooled.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (int j = 0; j < n; ++j) {
      cache.pooled[static_cast<std::size_t>(j)] += (*pooled_src)[t][static_cast<std::size_t>(j)];
    }
  }
  for (double& v : cache.pooled) v /= static_cast<double>(t_len);

  cache.logits.assign(static_cast<std::size_t>(cfg.num_classes), 0.0);
  for (int c = 0; c < cfg.num_classes; ++c) {
    double acc = params.head_b.value[static_cast<std::size_t>(c)];
    const double* w_row =
        params.head_w.value.data() + static_cast<std::size_t>(c) * n;
    for (int j = 0; j < n; ++j) acc += w_row[j] * cache.pooled[static_cast<std::size_t>(j)];
    cache.logits[static_cast<std::size_t>(c)] = acc;
  }
  return cache;
}

void backward(ModelParameters& params, const ModelConfig& cfg,
              const ForwardCache& cache,
              const std::vector<double>& grad_wrt_logits) {
  if (cache.revision != params.revision) {
    throw std::logic_error("backward: stale forward cache");
  }
  if (grad_wrt_logits.size() != cache.logits.size()) {
    throw std::invalid_argument("backward: gradient dimension mismatch");
  }
  const Sample& sample = *cache.sample;
  const std::size_t t_len = sample.length();
  const int n = cfg.embed_dim;
  const int d = cfg.feature_dim;

  // Head.
  std::vector<double> d_pooled(static_cast<std::size_t>(n), 0.0);
  for (int c = 0; c < cfg.num_classes; ++c) {
    const double g = grad_wrt_logits[static_cast<std::size_t>(c)];
    params.head_b.grad[static_cast<std::size_t>(c)] += g;
    double* gw_row = params.head_w.grad.data() + static_cast<std::size_t>(c) * n;
    const double* w_row =
        params.head_w.value.data() + static_cast<std::size_t>(c) * n;
    for (int j = 0; j < n; ++j) {
      gw_row[j] += g * cache.pooled[static_cast<std::size_t>(j)];
      d_pooled[static_cast<std::size_t>(j)] += g * w_row[j];
    }
  }
  if (params.backbone_frozen) return;

  // Mean pooling spreads the pooled gradient uniformly over steps.
  const double inv_t = 1.0 / static_cast<double>(t_len);
  std::vector<double> d_step(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) d_step[static_cast<std::size_t>(j)] = d_pooled[static_cast<std::size_t>(j)] * inv_t;

  std::vector<std::vector<double>> d_embed(
      t_len, std::vector<double>(static_cast<std::size_t>(n), 0.0));

  if (cfg.use_attention) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::vector<double>> d_queries(
        t_len, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<std::vector<double>> d_keys(
        t_len, std::vector<double>(static_cast<std::size_t>(n), 0.0));

    for (std::size_t t = 0; t < t_len; ++t) {
      // dH_t = d_step for every t; value path and softmax jacobian.
      std::vector<double> d_attn(t_len, 0.0);
      for (std::size_t s = 0; s < t_len; ++s) {
        double dot = 0.0;
        for (int j = 0; j < n; ++j) {
          dot += d_step[static_cast<std::size_t>(j)] *
                 cache.embeddings[s][static_cast<std::size_t>(j)];
        }
        d_attn[s] = dot;
        const double a = cache.attn[t][s];
        for (int j = 0; j < n; ++j) {
          d_embed[s][static_cast<std::size_t>(j)] += a * d_step[static_cast<std::size_t>(j)];
        }
      }
      double weighted = 0.0;
      for (std::size_t s = 0; s < t_len; ++s) weighted += cache.attn[t][s] * d_attn[s];
      for (std::size_t s = 0; s < t_len; ++s) {
        const double d_score = cache.attn[t][s] * (d_attn[s] - weighted) * scale;
        for (int j = 0; j < n; ++j) {
          d_queries[t][static_cast<std::size_t>(j)] +=
              d_score * cache.keys[s][static_cast<std::size_t>(j)];
          d_keys[s][static_cast<std::size_t>(j)] +=
              d_score * cache.queries[t][static_cast<std::size_t>(j)];
        }
      }
    }

    for (std::size_t t = 0; t < t_len; ++t) {
      for (int i = 0; i < n; ++i) {
        const double e = cache.embeddings[t][static_cast<std::size_t>(i)];
        double de = 0.0;
        for (int j = 0; j < n; ++j) {
          const double dq = d_queries[t][static_cast<std::size_t>(j)];
          const double dk = d_keys[t][static_cast<std::size_t>(j)];
          params.attn_q.grad[static_cast<std::size_t>(i) * n + j] += e * dq;
          params.attn_k.grad[static_cast<std::size_t>(i) * n + j] += e * dk;
          de += dq * params.attn_q.value[static_cast<std::size_t>(i) * n + j];
          de += dk * params.attn_k.value[static_cast<std::size_t>(i) * n + j];
        }
        d_embed[t][static_cast<std::size_t>(i)] += de;
      }
    }
  } else {
    for (std::size_t t = 0; t < t_len; ++t) d_embed[t] = d_step;
  }

  for (std::size_t t = 0; t < t_len; ++t) {
    for (int i = 0; i < n; ++i) {
      const double g = d_embed[t][static_cast<std::size_t>(i)];
      params.input_b.grad[static_cast<std::size_t>(i)] += g;
      double* gw_row = params.input_w.grad.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) {
        gw_row[j] += g * sample.features[t][static_cast<std::size_t>(j)];
      }
    }
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::int32_t header[5] = {
      ckpt.config.feature_dim, ckpt.config.embed_dim,
      ckpt.config.use_attention ? 1 : 0, ckpt.config.t_max,
      ckpt.config.num_classes};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(&ckpt.seed), sizeof(ckpt.seed));
  const ParamBlock* blocks[6] = {&ckpt.params.input_w, &ckpt.params.input_b,
                                 &ckpt.params.attn_q,  &ckpt.params.attn_k,
                                 &ckpt.params.head_w,  &ckpt.params.head_b};
  for (const ParamBlock* b : blocks) {
    const std::uint64_t count = b->value.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(b->value.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a PSLAB1 checkpoint: " + path);
  }
  std::int32_t header[5];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  Checkpoint ckpt;
  ckpt.config.feature_dim = header[0];
  ckpt.config.embed_dim = header[1];
  ckpt.config.use_attention = header[2] != 0;
  ckpt.config.t_max = header[3];
  ckpt.config.num_classes = header[4];
  in.read(reinterpret_cast<char*>(&ckpt.seed), sizeof(ckpt.seed));
  ParamBlock* blocks[6] = {&ckpt.params.input_w, &ckpt.params.input_b,
                           &ckpt.params.attn_q,  &ckpt.params.attn_k,
                           &ckpt.params.head_w,  &ckpt.params.head_b};
  for (ParamBlock* b : blocks) {
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    b->resize(count);
    in.read(reinterpret_cast<char*>(b->value.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  ckpt.params.revision = 1;
  return ckpt;
}

}  // namespace pslab
