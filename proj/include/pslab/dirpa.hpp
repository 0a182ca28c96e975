#pragma once

#include <cstdint>
#include <vector>

#include "pslab/rng.hpp"

namespace pslab {

enum class DirpaMode { symmetric, asymmetric };

/// Dirichlet prior augmentation knobs: concentration alpha, logit scaling
/// tau, and the optional asymmetric variant that gives one randomly chosen
/// focus class a different concentration each draw.
struct DirpaConfig {
  double alpha = 1.0;
  double tau = 1.0;
  DirpaMode mode = DirpaMode::symmetric;
  double asym_focus_alpha = 1.0;
};

/// A point on the (K-1)-simplex: non-negative, sums to 1.
struct PseudoPrior {
  std::vector<double> probs;

  int num_classes() const { return static_cast<int>(probs.size()); }
};

/// Draws one pseudo-prior from Dir(alpha * 1) (symmetric mode) or with a
/// uniformly chosen focus class at asym_focus_alpha (asymmetric mode).
/// Gamma draws are carried in log domain so sparse draws at alpha = 0.01 do
/// not underflow. Throws std::invalid_argument for K < 1 or bad config.
PseudoPrior sample_pseudo_prior(int num_classes, const DirpaConfig& cfg,
                                Rng& rng);

/// Logit adjustment z'_c = z_c + tau * (ln prior_c - ln(1/K)). The centering
/// term is constant across classes, so softmax, losses, and gradients match
/// the plain z + tau*ln(prior) form; a uniform prior leaves the logits
/// bit-identical. Prior components at or below 1e-12 are clamped before the
/// log; each clamp increments *clamp_events when provided.
std::vector<double> adjust_logits(const std::vector<double>& logits,
                                  const PseudoPrior& prior, double tau,
                                  long* clamp_events = nullptr);

/// Numerically stable softmax: p_c = exp(z_c - max z) / sum.
std::vector<double> softmax(const std::vector<double>& logits);

/// Log density of the Dirichlet with the given concentration vector at a
/// simplex point. Boundary points (some x_c = 0) are a domain error unless
/// the matching alpha_c equals 1.
double dirichlet_log_density(const PseudoPrior& x,
                             const std::vector<double>& alpha);

}  // namespace pslab
