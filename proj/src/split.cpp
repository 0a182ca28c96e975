#include "pslab/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pslab/rng.hpp"

namespace pslab {

namespace {

using json = nlohmann::json;

/// Apportions `need` units over class pools by largest remainder, capped at
/// each pool size, so the taken counts keep the pool's class distribution.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& pool_sizes,
                                   std::size_t need) {
  const std::size_t total =
      std::accumulate(pool_sizes.begin(), pool_sizes.end(), std::size_t{0});
  std::vector<std::size_t> take(pool_sizes.size(), 0);
  if (total == 0 || need == 0) return take;
  if (need >= total) return pool_sizes;

  std::vector<std::pair<double, std::size_t>> remainders;  // (-frac, class)
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < pool_sizes.size(); ++c) {
    const double quota = static_cast<double>(need) *
                         static_cast<double>(pool_sizes[c]) /
                         static_cast<double>(total);
    take[c] = static_cast<std::size_t>(std::floor(quota));
    assigned += take[c];
    remainders.emplace_back(-(quota - std::floor(quota)), c);
  }
  std::sort(remainders.begin(), remainders.end());
  for (const auto& [neg_frac, c] : remainders) {
    if (assigned >= need) break;
    if (take[c] < pool_sizes[c]) {
      ++take[c];
      ++assigned;
    }
  }
  return take;
}

}  // namespace

SplitResult class_aware_split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.samples.empty()) {
    throw std::invalid_argument("class_aware_split: empty dataset");
  }
  if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0 ||
      spec.validation_target < 1) {
    throw std::invalid_argument("class_aware_split: invalid spec");
  }
  const int k = dataset.space.num_classes();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.samples[i].label)].push_back(i);
  }

  const Rng base(spec.seed);
  for (int c = 0; c < k; ++c) {
    Rng class_rng = base.derive(static_cast<std::uint64_t>(c));
    class_rng.shuffle(by_class[static_cast<std::size_t>(c)]);
  }

  SplitResult result;
  std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(k));

  for (int c = 0; c < k; ++c) {
    const auto& members = by_class[static_cast<std::size_t>(c)];
    switch (members.size()) {
      case 0:
        break;
      case 1:
        result.train.push_back(members[0]);
        break;
      case 2: {
        result.train.push_back(members[0]);
        const bool to_validation =
            (hash_combine(spec.seed, static_cast<std::uint64_t>(c)) & 1u) == 0;
        (to_validation ? result.validation : result.test).push_back(members[1]);
        break;
      }
      default:
        // One reserved per subset; the rest joins the random-fill pool.
        result.train.push_back(members[0]);
        result.validation.push_back(members[1]);
        result.test.push_back(members[2]);
        pools[static_cast<std::size_t>(c)].assign(members.begin() + 3,
                                                  members.end());
        break;
    }
  }

  std::vector<std::size_t> pool_sizes(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    pool_sizes[static_cast<std::size_t>(c)] =
        pools[static_cast<std::size_t>(c)].size();
  }

  // Soft capacities: test first, then validation, leftovers to train.
  const auto test_target = static_cast<std::size_t>(std::llround(
      spec.test_fraction * static_cast<double>(dataset.samples.size())));
  const std::size_t test_need =
      test_target > result.test.size() ? test_target - result.test.size() : 0;
  const std::vector<std::size_t> take_test = apportion(pool_sizes, test_need);

  for (int c = 0; c < k; ++c) {
    const auto& pool = pools[static_cast<std::size_t>(c)];
    const std::size_t t = take_test[static_cast<std::size_t>(c)];
    result.test.insert(result.test.end(), pool.begin(), pool.begin() + t);
    pool_sizes[static_cast<std::size_t>(c)] -= t;
  }

  const auto validation_target = static_cast<std::size_t>(spec.validation_target);
  const std::size_t val_need = validation_target > result.validation.size()
                                   ? validation_target - result.validation.size()
                                   : 0;
  const std::vector<std::size_t> take_val = apportion(pool_sizes, val_need);

  for (int c = 0; c < k; ++c) {
    auto& pool = pools[static_cast<std::size_t>(c)];
    const std::size_t skip = take_test[static_cast<std::size_t>(c)];
    const std::size_t v = take_val[static_cast<std::size_t>(c)];
    result.validation.insert(result.validation.end(), pool.begin() + skip,
                             pool.begin() + skip + v);
    result.train.insert(result.train.end(), pool.begin() + skip + v, pool.end());
  }

  std::sort(result.train.begin(), result.train.end());
  std::sort(result.validation.begin(), result.validation.end());
  std::sort(result.test.begin(), result.test.end());
  return result;
}

std::vector<std::size_t> build_kshot(const std::vector<std::size_t>& train,
                                     const Dataset& dataset,
                                     const FewShotSpec& spec) {
  if (train.empty()) {
    throw std::invalid_argument("build_kshot: empty train set");
  }
  if (spec.k < 1) {
    throw std::invalid_argument("build_kshot: k must be >= 1");
  }
  const int k_classes = dataset.space.num_classes();
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(k_classes));
  for (std::size_t i : train) {
    by_class[static_cast<std::size_t>(dataset.samples.at(i).label)].push_back(i);
  }

  const Rng base(spec.seed);
  std::vector<std::size_t> picked;
  for (int c = 0; c < k_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.empty()) continue;
    Rng class_rng = base.derive(static_cast<std::uint64_t>(c));
    class_rng.shuffle(members);
    const std::size_t take =
        std::min(members.size(), static_cast<std::size_t>(spec.k));
    picked.insert(picked.end(), members.begin(), members.begin() + take);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

void save_split(const SplitResult& split, const SplitSpec& spec,
                const std::string& path) {
  json j;
  j["spec"] = {{"test_fraction", spec.test_fraction},
               {"validation_target", spec.validation_target}};
  j["seed"] = spec.seed;
  j["fill_order"] = "test_then_validation";
  j["train"] = split.train;
  j["validation"] = split.validation;
  j["test"] = split.test;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write split: " + path);
  out << j.dump(2) << "\n";
}

SplitResult load_split(const std::string& path, SplitSpec* spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split: " + path);
  json j = json::parse(in);
  SplitResult split;
  split.train = j.at("train").get<std::vector<std::size_t>>();
  split.validation = j.at("validation").get<std::vector<std::size_t>>();
  split.test = j.at("test").get<std::vector<std::size_t>>();
  if (spec != nullptr) {
    spec->test_fraction = j.at("spec").at("test_fraction").get<double>();
    spec->validation_target = j.at("spec").at("validation_target").get<int>();
    spec->seed = j.at("seed").get<std::uint64_t>();
  }
  return split;
}

}  // namespace pslab
