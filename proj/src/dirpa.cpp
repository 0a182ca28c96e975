#include "pslab/dirpa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pslab {

namespace {
constexpr double kPriorFloor = 1e-12;
}

PseudoPrior sample_pseudo_prior(int num_classes, const DirpaConfig& cfg,
                                Rng& rng) {
  if (num_classes < 1) {
    throw std::invalid_argument("sample_pseudo_prior: K must be >= 1");
  }
  if (cfg.alpha <= 0.0 || cfg.asym_focus_alpha <= 0.0) {
    throw std::invalid_argument("sample_pseudo_prior: alpha must be > 0");
  }
  PseudoPrior prior;
  if (num_classes == 1) {
    prior.probs = {1.0};
    return prior;
  }

  int focus = -1;
  if (cfg.mode == DirpaMode::asymmetric) {
    focus = static_cast<int>(rng.below(static_cast<std::size_t>(num_classes)));
  }

  std::vector<double> log_draws(static_cast<std::size_t>(num_classes));
  double max_log = -std::numeric_limits<double>::infinity();
  do {
    max_log = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < num_classes; ++c) {
      const double shape = (c == focus) ? cfg.asym_focus_alpha : cfg.alpha;
      const double lg = rng.gamma_log(shape);
      log_draws[static_cast<std::size_t>(c)] = lg;
      max_log = std::max(max_log, lg);
    }
  } while (!std::isfinite(max_log));  // retry a degenerate draw
  double total = 0.0;
  prior.probs.resize(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    const double v = std::exp(log_draws[static_cast<std::size_t>(c)] - max_log);
    prior.probs[static_cast<std::size_t>(c)] = v;
    total += v;
  }
  for (double& p : prior.probs) p /= total;
  return prior;
}

std::vector<double> adjust_logits(const std::vector<double>& logits,
                                  const PseudoPrior& prior, double tau,
                                  long* clamp_events) {
  if (logits.size() != prior.probs.size()) {
    throw std::invalid_argument("adjust_logits: dimension mismatch");
  }
  const int k = static_cast<int>(logits.size());
  const double log_uniform = std::log(1.0 / static_cast<double>(k));
  std::vector<double> adjusted(logits.size());
  for (int c = 0; c < k; ++c) {
    double p = prior.probs[static_cast<std::size_t>(c)];
    if (p <= kPriorFloor) {
      p = kPriorFloor;
      if (clamp_events != nullptr) ++*clamp_events;
    }
    adjusted[static_cast<std::size_t>(c)] =
        logits[static_cast<std::size_t>(c)] + tau * (std::log(p) - log_uniform);
  }
  return adjusted;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) {
    throw std::invalid_argument("softmax: empty logits");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    probs[c] = std::exp(logits[c] - m);
    total += probs[c];
  }
  for (double& p : probs) p /= total;
  return probs;
}

double dirichlet_log_density(const PseudoPrior& x,
                             const std::vector<double>& alpha) {
  if (x.probs.size() != alpha.size() || alpha.empty()) {
    throw std::invalid_argument("dirichlet_log_density: dimension mismatch");
  }
  double alpha_sum = 0.0;
  double log_beta = 0.0;
  for (double a : alpha) {
    if (a <= 0.0) {
      throw std::invalid_argument("dirichlet_log_density: alpha must be > 0");
    }
    alpha_sum += a;
    log_beta += std::lgamma(a);
  }
  log_beta -= std::lgamma(alpha_sum);

  double log_density = -log_beta;
  for (std::size_t c = 0; c < alpha.size(); ++c) {
    const double xc = x.probs[c];
    if (xc < 0.0) {
      throw std::invalid_argument("dirichlet_log_density: negative component");
    }
    if (xc == 0.0) {
      if (alpha[c] != 1.0) {
        throw std::invalid_argument(
            "dirichlet_log_density: boundary point with alpha != 1");
      }
      continue;  // (alpha - 1) * ln x = 0
    }
    log_density += (alpha[c] - 1.0) * std::log(xc);
  }
  return log_density;
}

}  // namespace pslab
