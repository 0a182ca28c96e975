#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pslab/dirpa.hpp"
#include "pslab/rng.hpp"

using pslab::adjust_logits;
using pslab::dirichlet_log_density;
using pslab::DirpaConfig;
using pslab::DirpaMode;
using pslab::PseudoPrior;
using pslab::Rng;
using pslab::sample_pseudo_prior;
using pslab::softmax;

TEST_SUITE("dirpa") {

TEST_CASE("K = 1 yields the trivial simplex point") {
  Rng rng(1);
  DirpaConfig cfg;
  cfg.alpha = 0.3;
  const PseudoPrior p = sample_pseudo_prior(1, cfg, rng);
  REQUIRE(p.probs.size() == 1);
  CHECK(p.probs[0] == 1.0);
}

TEST_CASE("draws lie on the simplex for all alpha regimes") {
  Rng rng(2);
  for (double alpha : {0.01, 0.5, 1.0, 5.0}) {
    DirpaConfig cfg;
    cfg.alpha = alpha;
    for (int i = 0; i < 2000; ++i) {
      const PseudoPrior p = sample_pseudo_prior(6, cfg, rng);
      double sum = 0.0;
      for (double x : p.probs) {
        CHECK(x >= 0.0);
        sum += x;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("Monte Carlo moments match the Dirichlet formulas") {
  // K = 5, alpha = 5: mean 1/5, var (1/K)(1-1/K)/(K alpha + 1).
  const int k = 5;
  const double alpha = 5.0;
  const int n = 100000;
  DirpaConfig cfg;
  cfg.alpha = alpha;
  Rng rng(3);

  std::vector<double> sum(k, 0.0), sum2(k, 0.0);
  for (int i = 0; i < n; ++i) {
    const PseudoPrior p = sample_pseudo_prior(k, cfg, rng);
    for (int c = 0; c < k; ++c) {
      sum[static_cast<std::size_t>(c)] += p.probs[static_cast<std::size_t>(c)];
      sum2[static_cast<std::size_t>(c)] +=
          p.probs[static_cast<std::size_t>(c)] * p.probs[static_cast<std::size_t>(c)];
    }
  }
  const double expect_var =
      (1.0 / k) * (1.0 - 1.0 / k) / (k * alpha + 1.0);
  CHECK(expect_var == doctest::Approx(0.0061538).epsilon(1e-4));
  const double mc_sigma = std::sqrt(expect_var / n);
  for (int c = 0; c < k; ++c) {
    const double mean = sum[static_cast<std::size_t>(c)] / n;
    const double var = sum2[static_cast<std::size_t>(c)] / n - mean * mean;
    CHECK(std::abs(mean - 0.2) < 4.0 * mc_sigma);
    CHECK(var == doctest::Approx(expect_var).epsilon(0.10));
  }
}

TEST_CASE("sparse alpha dominates more often than dense alpha") {
  const int k = 5;
  const int n = 20000;
  auto dominance_fraction = [&](double alpha) {
    DirpaConfig cfg;
    cfg.alpha = alpha;
    Rng rng(4);
    int dominated = 0;
    for (int i = 0; i < n; ++i) {
      const PseudoPrior p = sample_pseudo_prior(k, cfg, rng);
      double mx = 0.0;
      for (double x : p.probs) mx = std::max(mx, x);
      if (mx > 0.5) ++dominated;
    }
    return static_cast<double>(dominated) / n;
  };
  CHECK(dominance_fraction(0.5) > dominance_fraction(5.0));
}

TEST_CASE("asymmetric mode amplifies the focus class on average") {
  const int k = 4;
  DirpaConfig cfg;
  cfg.alpha = 1.0;
  cfg.mode = DirpaMode::asymmetric;
  cfg.asym_focus_alpha = 20.0;
  Rng rng(5);
  // With a random focus each draw, every component mean stays 1/K, but the
  // max component is usually the (heavily concentrated) focus class.
  int strong_max = 0;
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    const PseudoPrior p = sample_pseudo_prior(k, cfg, rng);
    double mx = 0.0, sum = 0.0;
    for (double x : p.probs) {
      mx = std::max(mx, x);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    if (mx > 0.5) ++strong_max;
  }
  CHECK(strong_max > n / 2);
}

TEST_CASE("zero K and bad alpha are rejected") {
  Rng rng(6);
  DirpaConfig cfg;
  CHECK_THROWS_AS(sample_pseudo_prior(0, cfg, rng), std::invalid_argument);
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(sample_pseudo_prior(3, cfg, rng), std::invalid_argument);
}

TEST_CASE("tau = 0 leaves the logits untouched") {
  const std::vector<double> z = {0.3, -1.2, 4.5};
  const PseudoPrior prior{{0.2, 0.5, 0.3}};
  CHECK(adjust_logits(z, prior, 0.0) == z);
}

TEST_CASE("a uniform prior is an exact no-op for any tau") {
  const std::vector<double> z = {1.25, -0.5, 0.75, 2.0};
  const PseudoPrior uniform{{1.0 / 4, 1.0 / 4, 1.0 / 4, 1.0 / 4}};
  for (double tau : {0.5, 1.0, 5.0, 10.0}) {
    const std::vector<double> adjusted = adjust_logits(z, uniform, tau);
    CHECK(adjusted == z);  // bitwise
    CHECK(softmax(adjusted) == softmax(z));
  }
}

TEST_CASE("softmax of adjusted zero logits recovers the prior") {
  const std::vector<double> z = {0.0, 0.0};
  const PseudoPrior prior{{0.9, 0.1}};
  const std::vector<double> p = softmax(adjust_logits(z, prior, 1.0));
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("tiny prior components are clamped and counted") {
  const std::vector<double> z = {0.0, 0.0};
  const PseudoPrior prior{{1.0, 0.0}};
  long clamps = 0;
  const std::vector<double> adjusted = adjust_logits(z, prior, 1.0, &clamps);
  CHECK(clamps == 1);
  for (double v : adjusted) CHECK(std::isfinite(v));
}

TEST_CASE("increasing a prior component increases its probability") {
  const std::vector<double> z = {0.4, -0.3, 1.1};
  double prev = -1.0;
  for (double pc : {0.1, 0.3, 0.6, 0.85}) {
    const double rest = (1.0 - pc) / 2.0;
    const PseudoPrior prior{{rest, pc, rest}};
    const double p1 = softmax(adjust_logits(z, prior, 2.0))[1];
    CHECK(p1 > prev);
    prev = p1;
  }
}

TEST_CASE("softmax basics") {
  const std::vector<double> thirds = softmax({0.0, 0.0, 0.0});
  for (double p : thirds) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));

  const std::vector<double> p = softmax({std::log(2.0), 0.0});
  CHECK(p[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  double sum = 0.0;
  for (double x : softmax({3.0, -2.0, 0.5, 11.0})) sum += x;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("softmax is stable under large constant shifts") {
  const std::vector<double> z = {std::log(2.0), 0.0, -1.0};
  std::vector<double> shifted = z;
  for (double& v : shifted) v += 1000.0;
  const std::vector<double> a = softmax(z);
  const std::vector<double> b = softmax(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("uniform Dirichlet density is constant ln 2 on the 2-simplex") {
  const std::vector<double> alpha = {1.0, 1.0, 1.0};
  for (double a : {0.1, 0.33, 0.7}) {
    const PseudoPrior x{{a, (1.0 - a) / 2.0, (1.0 - a) / 2.0}};
    CHECK(dirichlet_log_density(x, alpha) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  // Boundary is fine when all alpha are 1.
  CHECK(dirichlet_log_density(PseudoPrior{{0.0, 0.5, 0.5}}, alpha) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("hand value at the barycenter for alpha = (2,2,2)") {
  const PseudoPrior x{{1.0 / 3, 1.0 / 3, 1.0 / 3}};
  CHECK(dirichlet_log_density(x, {2.0, 2.0, 2.0}) ==
        doctest::Approx(std::log(120.0 / 27.0)).epsilon(1e-12));
}

TEST_CASE("boundary with alpha != 1 is a domain error") {
  CHECK_THROWS_AS(
      dirichlet_log_density(PseudoPrior{{0.0, 0.5, 0.5}}, {0.5, 0.5, 0.5}),
      std::invalid_argument);
}

TEST_CASE("density integrates to 1 over a fine simplex grid") {
  // Midpoint quadrature over a triangulation of the (p1, p2) triangle whose
  // boundary cells are recursively halved; alpha = 0.5 has integrable
  // singularities on the whole boundary.
  const std::vector<double> alpha = {0.5, 0.5, 0.5};
  struct Tri {
    double a1, a2, b1, b2, c1, c2;
  };
  auto near_edge = [](double p1, double p2) {
    return p1 < 1e-13 || p2 < 1e-13 || p1 + p2 > 1.0 - 1e-13;
  };
  double sum = 0.0;
  auto visit = [&](const Tri& t, int depth, auto&& self) -> void {
    int boundary_vertices = (near_edge(t.a1, t.a2) ? 1 : 0) +
                            (near_edge(t.b1, t.b2) ? 1 : 0) +
                            (near_edge(t.c1, t.c2) ? 1 : 0);
    if (depth > 0 && boundary_vertices >= 2) {
      const double ab1 = (t.a1 + t.b1) / 2, ab2 = (t.a2 + t.b2) / 2;
      const double bc1 = (t.b1 + t.c1) / 2, bc2 = (t.b2 + t.c2) / 2;
      const double ca1 = (t.c1 + t.a1) / 2, ca2 = (t.c2 + t.a2) / 2;
      self({t.a1, t.a2, ab1, ab2, ca1, ca2}, depth - 1, self);
      self({ab1, ab2, t.b1, t.b2, bc1, bc2}, depth - 1, self);
      self({ca1, ca2, bc1, bc2, t.c1, t.c2}, depth - 1, self);
      self({ab1, ab2, bc1, bc2, ca1, ca2}, depth - 1, self);
      return;
    }
    const double p1 = (t.a1 + t.b1 + t.c1) / 3.0;
    const double p2 = (t.a2 + t.b2 + t.c2) / 3.0;
    const double area = std::abs((t.b1 - t.a1) * (t.c2 - t.a2) -
                                 (t.c1 - t.a1) * (t.b2 - t.a2)) /
                        2.0;
    sum += area * std::exp(dirichlet_log_density(
                      PseudoPrior{{p1, p2, 1.0 - p1 - p2}}, alpha));
  };
  const int n = 128;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + i < n; ++j) {
      const double a = static_cast<double>(i) / n;
      const double b = static_cast<double>(j) / n;
      const double h = 1.0 / n;
      visit({a, b, a + h, b, a, b + h}, 12, visit);
      if (j + i < n - 1) {
        visit({a + h, b, a, b + h, a + h, b + h}, 12, visit);
      }
    }
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(0.01));
}

}  // TEST_SUITE
