#pragma once

#include <vector>

#include "pslab/labelspace.hpp"

namespace pslab {

struct SmoothingConfig {
  double epsilon = 0.0;  // in [0, 1)
};

struct FocalConfig {
  double gamma = 2.0;  // >= 0; gamma = 0 reduces to plain CE
};

/// Scalar loss plus its analytic gradient with respect to the logits that
/// produced `probs` through softmax. DirPA's adjustment is an additive
/// per-class constant, so the same gradient applies with or without it.
struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_wrt_logits;
};

/// Label-smoothed cross entropy: loss = -sum_c q_c ln p_c with
/// q = (1-eps) onehot(target) + eps/K; gradient p - q. Probabilities at or
/// below 1e-12 are clamped before the log; clamps increment *clamp_events.
LossGrad ce_smoothed(const std::vector<double>& probs, Label target,
                     const SmoothingConfig& cfg, long* clamp_events = nullptr);

/// Focal loss without a class-imbalance factor:
/// loss = -(1 - p_t)^gamma ln p_t with p_t = probs[target].
LossGrad focal(const std::vector<double>& probs, Label target,
               const FocalConfig& cfg, long* clamp_events = nullptr);

}  // namespace pslab
