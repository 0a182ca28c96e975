#include <doctest.h>

#include <vector>

#include "pslab/labelspace.hpp"
#include "pslab/metrics.hpp"
#include "pslab/rng.hpp"

using pslab::cohen_kappa;
using pslab::ConfusionMatrix;
using pslab::LabelSpace;
using pslab::macro_f1;
using pslab::micro_accuracy;
using pslab::Rng;
using pslab::rollup_confusion;

namespace {

// Literal-formula oracles, kept independent of the library implementations.

double kappa_oracle(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  double total = 0.0, diag = 0.0;
  std::vector<double> row(static_cast<std::size_t>(k), 0.0);
  std::vector<double> col(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double v = static_cast<double>(cm.at(i, j));
      total += v;
      row[static_cast<std::size_t>(i)] += v;
      col[static_cast<std::size_t>(j)] += v;
      if (i == j) diag += v;
    }
  }
  const double p_o = diag / total;
  double p_e = 0.0;
  for (int c = 0; c < k; ++c) {
    p_e += row[static_cast<std::size_t>(c)] * col[static_cast<std::size_t>(c)] /
           (total * total);
  }
  if (p_e >= 1.0) return 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double macro_f1_oracle(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    double tp = static_cast<double>(cm.at(c, c));
    double pred = 0.0, truth = 0.0;
    for (int j = 0; j < k; ++j) {
      pred += static_cast<double>(cm.at(j, c));
      truth += static_cast<double>(cm.at(c, j));
    }
    const double precision = pred > 0.0 ? tp / pred : 0.0;
    const double recall = truth > 0.0 ? tp / truth : 0.0;
    sum += (precision + recall) > 0.0
               ? 2.0 * precision * recall / (precision + recall)
               : 0.0;
  }
  return sum / static_cast<double>(k);
}

ConfusionMatrix random_cm(Rng& rng, int k, int entries) {
  ConfusionMatrix cm(k);
  for (int n = 0; n < entries; ++n) {
    cm.add(static_cast<int>(rng.below(static_cast<std::size_t>(k))),
           static_cast<int>(rng.below(static_cast<std::size_t>(k))));
  }
  return cm;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("diagonal matrix scores perfectly") {
  ConfusionMatrix cm(3);
  cm.add(0, 0, 5);
  cm.add(1, 1, 2);
  cm.add(2, 2, 9);
  CHECK(cohen_kappa(cm) == doctest::Approx(1.0));
  CHECK(micro_accuracy(cm) == doctest::Approx(1.0));
  CHECK(macro_f1(cm) == doctest::Approx(1.0));
}

TEST_CASE("2x2 all-ones matrix has kappa 0") {
  ConfusionMatrix cm(2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) cm.add(i, j);
  }
  CHECK(cohen_kappa(cm) == doctest::Approx(0.0));
  CHECK(micro_accuracy(cm) == doctest::Approx(0.5));
}

TEST_CASE("kappa is 0 when chance agreement is total") {
  // Single row and single column: p_e = 1.
  ConfusionMatrix cm(3);
  cm.add(1, 1, 42);
  CHECK(cohen_kappa(cm) == doctest::Approx(0.0));
}

TEST_CASE("zero diagonal means zero accuracy") {
  ConfusionMatrix cm(2);
  cm.add(0, 1, 3);
  cm.add(1, 0, 4);
  CHECK(micro_accuracy(cm) == doctest::Approx(0.0));
}

TEST_CASE("hand-computed macro f1 for [[8,2],[3,7]]") {
  ConfusionMatrix cm(2);
  cm.add(0, 0, 8);
  cm.add(0, 1, 2);
  cm.add(1, 0, 3);
  cm.add(1, 1, 7);
  const double expected = (16.0 / 21.0 + 14.0 / 19.0) / 2.0;
  CHECK(macro_f1(cm) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.74937).epsilon(1e-4));
}

TEST_CASE("an absent class drags macro f1 down by its zero") {
  // 3 declared classes, class 2 never true and never predicted.
  ConfusionMatrix cm(3);
  cm.add(0, 0, 5);
  cm.add(1, 1, 5);
  CHECK(macro_f1(cm) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("random matrices agree with the brute-force oracles") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(9));  // K <= 10
    const ConfusionMatrix cm = random_cm(rng, k, 120);
    CHECK(cohen_kappa(cm) == doctest::Approx(kappa_oracle(cm)).epsilon(1e-12));
    CHECK(micro_accuracy(cm) ==
          doctest::Approx(static_cast<double>(cm.trace()) /
                          static_cast<double>(cm.total()))
              .epsilon(1e-12));
    CHECK(macro_f1(cm) == doctest::Approx(macro_f1_oracle(cm)).epsilon(1e-12));
  }
}

TEST_CASE("kappa is 1 iff the matrix is diagonal with positive trace") {
  Rng rng(321);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(5));
    ConfusionMatrix cm = random_cm(rng, k, 60);
    bool diagonal = true;
    for (int i = 0; i < k && diagonal; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i != j && cm.at(i, j) != 0) {
          diagonal = false;
          break;
        }
      }
    }
    // Diagonal with positive trace but p_e < 1 needs >= 2 occupied classes.
    int occupied = 0;
    for (int i = 0; i < k; ++i) {
      if (cm.at(i, i) > 0) ++occupied;
    }
    if (diagonal && occupied >= 2) {
      CHECK(cohen_kappa(cm) == doctest::Approx(1.0));
    } else if (!diagonal) {
      CHECK(cohen_kappa(cm) < 1.0);
    }
  }
}

TEST_CASE("metrics are invariant under simultaneous class permutation") {
  Rng rng(55);
  const int k = 6;
  const ConfusionMatrix cm = random_cm(rng, k, 200);
  // Fixed permutation.
  const int perm[6] = {3, 0, 5, 1, 4, 2};
  ConfusionMatrix permuted(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      permuted.add(perm[i], perm[j], cm.at(i, j));
    }
  }
  CHECK(cohen_kappa(permuted) == doctest::Approx(cohen_kappa(cm)).epsilon(1e-12));
  CHECK(micro_accuracy(permuted) ==
        doctest::Approx(micro_accuracy(cm)).epsilon(1e-12));
  CHECK(macro_f1(permuted) == doctest::Approx(macro_f1(cm)).epsilon(1e-12));
}

TEST_CASE("roll-up: identity hierarchy is a no-op and siblings diagonalize") {
  const LabelSpace identity = LabelSpace::identity(4);
  Rng rng(9);
  const ConfusionMatrix cm = random_cm(rng, 4, 80);
  const ConfusionMatrix same = rollup_confusion(cm, identity);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(same.at(i, j) == cm.at(i, j));
  }

  // Two fine classes sharing a parent: cross-confusion becomes diagonal.
  const LabelSpace shared(2, {"a", "b"}, {0, 0}, 1);
  ConfusionMatrix cross(2);
  cross.add(0, 1, 7);
  cross.add(1, 0, 3);
  const ConfusionMatrix rolled = rollup_confusion(cross, shared);
  CHECK(rolled.at(0, 0) == 10);
  CHECK(micro_accuracy(rolled) == doctest::Approx(1.0));
}

TEST_CASE("roll-up preserves totals and never lowers accuracy") {
  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 3 + static_cast<int>(rng.below(8));
    const int parents = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(k)));
    std::vector<int> table(static_cast<std::size_t>(k));
    for (int p = 0; p < parents; ++p) table[static_cast<std::size_t>(p)] = p;
    for (int c = parents; c < k; ++c) {
      table[static_cast<std::size_t>(c)] =
          static_cast<int>(rng.below(static_cast<std::size_t>(parents)));
    }
    const LabelSpace space(k, std::vector<std::string>(static_cast<std::size_t>(k), "x"),
                           table, parents);
    const ConfusionMatrix cm = random_cm(rng, k, 150);
    const ConfusionMatrix rolled = rollup_confusion(cm, space);
    CHECK(rolled.total() == cm.total());
    CHECK(micro_accuracy(rolled) >= micro_accuracy(cm));
  }
}

}  // TEST_SUITE
