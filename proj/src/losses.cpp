#include "pslab/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace pslab {

namespace {

constexpr double kProbFloor = 1e-12;

double clamped(double p, long* clamp_events) {
  if (p < kProbFloor) {
    if (clamp_events != nullptr) ++*clamp_events;
    return kProbFloor;
  }
  return p;
}

void check_inputs(const std::vector<double>& probs, Label target) {
  if (probs.empty()) throw std::invalid_argument("loss: empty probabilities");
  if (target < 0 || target >= static_cast<Label>(probs.size())) {
    throw std::invalid_argument("loss: target out of range");
  }
}

}  // namespace

LossGrad ce_smoothed(const std::vector<double>& probs, Label target,
                     const SmoothingConfig& cfg, long* clamp_events) {
  check_inputs(probs, target);
  if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0) {
    throw std::invalid_argument("ce_smoothed: epsilon must be in [0, 1)");
  }
  const std::size_t k = probs.size();
  const double uniform_mass = cfg.epsilon / static_cast<double>(k);

  LossGrad out;
  out.grad_wrt_logits.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double q =
        uniform_mass + (static_cast<Label>(c) == target ? 1.0 - cfg.epsilon : 0.0);
    if (q > 0.0) {
      out.loss -= q * std::log(clamped(probs[c], clamp_events));
    }
    out.grad_wrt_logits[c] = probs[c] - q;
  }
  return out;
}

LossGrad focal(const std::vector<double>& probs, Label target,
               const FocalConfig& cfg, long* clamp_events) {
  check_inputs(probs, target);
  if (cfg.gamma < 0.0 || !std::isfinite(cfg.gamma)) {
    throw std::invalid_argument("focal: gamma must be finite and >= 0");
  }
  if (cfg.gamma == 0.0) {
    return ce_smoothed(probs, target, SmoothingConfig{0.0}, clamp_events);
  }
  const std::size_t k = probs.size();
  const double pt = clamped(probs[static_cast<std::size_t>(target)], clamp_events);
  const double one_minus = 1.0 - pt;
  const double focus = std::pow(one_minus, cfg.gamma);

  LossGrad out;
  out.loss = -focus * std::log(pt);

  // d loss / d z_j = (dL/dp_t) p_t (delta_tj - p_j); the p_t factor is folded
  // in so the saturated limits (p_t -> 0 or 1) stay finite.
  double scaled = -focus;  // = -(1-p_t)^gamma / p_t * p_t
  if (one_minus > 0.0) {
    scaled += cfg.gamma * std::pow(one_minus, cfg.gamma - 1.0) *
              std::log(pt) * pt;
  }
  out.grad_wrt_logits.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double indicator = (static_cast<Label>(c) == target) ? 1.0 : 0.0;
    out.grad_wrt_logits[c] = scaled * (indicator - probs[c]);
  }
  return out;
}

}  // namespace pslab
