#include <doctest.h>

#include <cmath>
#include <vector>

#include "pslab/dirpa.hpp"
#include "pslab/losses.hpp"
#include "pslab/rng.hpp"

using pslab::adjust_logits;
using pslab::ce_smoothed;
using pslab::focal;
using pslab::FocalConfig;
using pslab::LossGrad;
using pslab::PseudoPrior;
using pslab::Rng;
using pslab::SmoothingConfig;
using pslab::softmax;

namespace {

// Central finite differences of a loss through softmax, w.r.t. the logits.
template <typename LossFn>
std::vector<double> fd_grad(const std::vector<double>& logits, LossFn loss_of,
                            double h = 1e-5) {
  std::vector<double> grad(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    std::vector<double> plus = logits, minus = logits;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (loss_of(plus) - loss_of(minus)) / (2.0 * h);
  }
  return grad;
}

void check_close(const std::vector<double>& analytic,
                 const std::vector<double>& fd, double tol = 1e-4) {
  REQUIRE(analytic.size() == fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double rel =
        std::abs(analytic[i] - fd[i]) / std::max(1.0, std::abs(fd[i]));
    CHECK(rel < tol);
  }
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("near-onehot probability drives the loss to 0") {
  double previous = std::log(2.0);
  for (double delta : {1e-3, 1e-6, 1e-9}) {
    const std::vector<double> p = {1.0 - delta, delta};
    const LossGrad lg = ce_smoothed(p, 0, SmoothingConfig{0.0});
    CHECK(lg.loss > 0.0);
    CHECK(lg.loss < 2.0 * delta);  // -ln(1 - d) ~ d
    CHECK(lg.loss < previous);
    previous = lg.loss;
  }
}

TEST_CASE("hand value for the symmetric binary case") {
  const LossGrad lg = ce_smoothed({0.5, 0.5}, 0, SmoothingConfig{0.0});
  CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lg.grad_wrt_logits[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(lg.grad_wrt_logits[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("uniform probabilities cost ln K for any target and smoothing") {
  const std::vector<double> p(4, 0.25);
  for (int target = 0; target < 4; ++target) {
    const LossGrad lg = ce_smoothed(p, target, SmoothingConfig{0.1});
    CHECK(lg.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
}

TEST_CASE("smoothed loss respects the Gibbs bound") {
  Rng rng(8);
  const SmoothingConfig cfg{0.1};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z(5);
    for (double& v : z) v = rng.uniform(-3.0, 3.0);
    const std::vector<double> p = softmax(z);
    const int target = static_cast<int>(rng.below(5));
    const LossGrad lg = ce_smoothed(p, target, cfg);
    // Entropy of q.
    double entropy = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      const double q = 0.1 / 5 + (static_cast<int>(c) == target ? 0.9 : 0.0);
      entropy -= q * std::log(q);
    }
    CHECK(lg.loss >= entropy - 1e-12);
  }
}

TEST_CASE("zero probability at a smoothed class is clamped and counted") {
  long clamps = 0;
  const LossGrad lg = ce_smoothed({1.0, 0.0}, 0, SmoothingConfig{0.1}, &clamps);
  CHECK(clamps == 1);
  CHECK(std::isfinite(lg.loss));
}

TEST_CASE("focal with gamma 0 reduces exactly to plain CE") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> z(4);
    for (double& v : z) v = rng.uniform(-2.0, 2.0);
    const std::vector<double> p = softmax(z);
    const int target = static_cast<int>(rng.below(4));
    const LossGrad f = focal(p, target, FocalConfig{0.0});
    const LossGrad ce = ce_smoothed(p, target, SmoothingConfig{0.0});
    CHECK(f.loss == doctest::Approx(ce.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(f.grad_wrt_logits[i] ==
            doctest::Approx(ce.grad_wrt_logits[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("perfect prediction has zero focal loss") {
  const LossGrad lg = focal({1.0, 0.0, 0.0}, 0, FocalConfig{2.0});
  CHECK(lg.loss == doctest::Approx(0.0));
  for (double g : lg.grad_wrt_logits) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("hand value at p_t = 0.5, gamma = 2") {
  const LossGrad lg = focal({0.5, 0.5}, 0, FocalConfig{2.0});
  CHECK(lg.loss == doctest::Approx(0.25 * std::log(2.0)).epsilon(1e-12));
  CHECK(lg.loss == doctest::Approx(0.17329).epsilon(1e-4));
}

TEST_CASE("focal never exceeds CE pointwise") {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(6);
    for (double& v : z) v = rng.uniform(-4.0, 4.0);
    const std::vector<double> p = softmax(z);
    const int target = static_cast<int>(rng.below(6));
    for (double gamma : {1.0, 1.5, 2.0, 3.0}) {
      CHECK(focal(p, target, FocalConfig{gamma}).loss <=
            ce_smoothed(p, target, SmoothingConfig{0.0}).loss + 1e-12);
    }
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(5));  // K <= 6
    std::vector<double> z(static_cast<std::size_t>(k));
    for (double& v : z) v = rng.uniform(-2.5, 2.5);
    const int target = static_cast<int>(rng.below(static_cast<std::size_t>(k)));
    const double eps = trial % 2 == 0 ? 0.0 : 0.1;
    const double gamma = 1.0 + rng.uniform01() * 2.0;

    // Optionally compose through a DirPA adjustment (constant per class).
    PseudoPrior prior;
    prior.probs.assign(static_cast<std::size_t>(k), 1.0 / k);
    const bool with_dirpa = trial % 3 == 0;
    if (with_dirpa) {
      double total = 0.0;
      for (double& p : prior.probs) {
        p = 0.05 + rng.uniform01();
        total += p;
      }
      for (double& p : prior.probs) p /= total;
    }
    const double tau = 1.5;

    auto ce_of = [&](const std::vector<double>& logits) {
      const std::vector<double> adjusted =
          with_dirpa ? adjust_logits(logits, prior, tau) : logits;
      return ce_smoothed(softmax(adjusted), target, SmoothingConfig{eps}).loss;
    };
    auto focal_of = [&](const std::vector<double>& logits) {
      const std::vector<double> adjusted =
          with_dirpa ? adjust_logits(logits, prior, tau) : logits;
      return focal(softmax(adjusted), target, FocalConfig{gamma}).loss;
    };

    const std::vector<double> adjusted =
        with_dirpa ? adjust_logits(z, prior, tau) : z;
    const std::vector<double> p = softmax(adjusted);
    check_close(ce_smoothed(p, target, SmoothingConfig{eps}).grad_wrt_logits,
                fd_grad(z, ce_of));
    check_close(focal(p, target, FocalConfig{gamma}).grad_wrt_logits,
                fd_grad(z, focal_of));
  }
}

}  // TEST_SUITE
