#include "pslab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pslab/rng.hpp"

namespace pslab {

namespace {

using json = nlohmann::json;

constexpr double kClipLo = 0.0;
constexpr double kClipHi = 1.2;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void row_error(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

int Dataset::feature_dim() const {
  if (samples.empty() || samples.front().features.empty()) return 0;
  return static_cast<int>(samples.front().features.front().size());
}

void validate_dataset(const Dataset& dataset) {
  if (dataset.samples.empty()) {
    throw std::invalid_argument("dataset is empty");
  }
  const int d = dataset.feature_dim();
  for (const Sample& s : dataset.samples) {
    if (s.times.empty() || s.times.size() != s.features.size()) {
      throw std::invalid_argument("sample has mismatched times/features");
    }
    if (!dataset.space.valid_label(s.label)) {
      throw std::invalid_argument("sample label out of range");
    }
    for (std::size_t t = 0; t < s.times.size(); ++t) {
      if (s.times[t] < 1 || s.times[t] > 366) {
        throw std::invalid_argument("sample day outside [1, 366]");
      }
      if (t > 0 && s.times[t] <= s.times[t - 1]) {
        throw std::invalid_argument("sample times not strictly increasing");
      }
      if (static_cast<int>(s.features[t].size()) != d) {
        throw std::invalid_argument("sample feature dimension varies");
      }
      for (double v : s.features[t]) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("sample feature not finite");
        }
      }
    }
  }
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.space.num_classes() != b.space.num_classes()) return false;
  if (a.space.parent_table() != b.space.parent_table()) return false;
  if (a.samples.size() != b.samples.size()) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const Sample& x = a.samples[i];
    const Sample& y = b.samples[i];
    if (x.label != y.label || x.times != y.times || x.features != y.features) {
      return false;
    }
  }
  return true;
}

std::vector<double> ideal_class_weights(const SyntheticSpec& spec) {
  std::vector<double> w(static_cast<std::size_t>(spec.num_classes));
  double total = 0.0;
  for (int c = 0; c < spec.num_classes; ++c) {
    w[static_cast<std::size_t>(c)] =
        std::pow(static_cast<double>(c + 1), -spec.imbalance_exponent);
    total += w[static_cast<std::size_t>(c)];
  }
  for (double& x : w) x *= static_cast<double>(spec.num_samples) / total;
  return w;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes < 2 || spec.feature_dim < 1 ||
      spec.num_samples < spec.num_classes || spec.imbalance_exponent < 0.0 ||
      spec.min_sequence_length < 1 ||
      spec.min_sequence_length > spec.max_sequence_length ||
      spec.max_sequence_length > 366 || spec.noise_sigma < 0.0) {
    throw std::invalid_argument("generate_synthetic: invalid spec");
  }
  const int k = spec.num_classes;
  const int d = spec.feature_dim;

  // Rounded power-law counts, each class >= 1, total fixed at num_samples.
  const std::vector<double> ideal = ideal_class_weights(spec);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(k));
  std::int64_t total = 0;
  for (int c = 0; c < k; ++c) {
    counts[static_cast<std::size_t>(c)] =
        std::max<std::int64_t>(1, std::llround(ideal[static_cast<std::size_t>(c)]));
    total += counts[static_cast<std::size_t>(c)];
  }
  while (total != spec.num_samples) {
    // Adjust the most populous class (lowest index on ties).
    const auto it = std::max_element(counts.begin(), counts.end());
    if (total > spec.num_samples) {
      if (*it <= 1) break;
      --*it;
      --total;
    } else {
      ++*it;
      ++total;
    }
  }

  Rng base(spec.seed);
  Rng class_rng = base.derive(1);
  Rng data_rng = base.derive(2);

  // Per-class seasonal signature: peak day evenly spaced over [60, 300],
  // class-specific width, per-channel amplitude and baseline.
  std::vector<double> peak(static_cast<std::size_t>(k));
  std::vector<double> width(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> amplitude(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> baseline(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    peak[static_cast<std::size_t>(c)] =
        60.0 + (300.0 - 60.0) * static_cast<double>(c) /
                   static_cast<double>(k - 1);
    width[static_cast<std::size_t>(c)] = class_rng.uniform(18.0, 40.0);
    auto& amp = amplitude[static_cast<std::size_t>(c)];
    auto& base_level = baseline[static_cast<std::size_t>(c)];
    amp.resize(static_cast<std::size_t>(d));
    base_level.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      amp[static_cast<std::size_t>(j)] = class_rng.uniform(0.35, 0.95);
      base_level[static_cast<std::size_t>(j)] = class_rng.uniform(0.05, 0.15);
    }
  }

  Dataset dataset{LabelSpace::identity(k), {}, "synthetic"};
  dataset.samples.reserve(static_cast<std::size_t>(spec.num_samples));
  for (int c = 0; c < k; ++c) {
    for (std::int64_t n = 0; n < counts[static_cast<std::size_t>(c)]; ++n) {
      const int len =
          spec.min_sequence_length +
          static_cast<int>(data_rng.below(static_cast<std::size_t>(
              spec.max_sequence_length - spec.min_sequence_length + 1)));
      std::vector<int> days;
      days.reserve(static_cast<std::size_t>(len));
      while (static_cast<int>(days.size()) < len) {
        const int day = 1 + static_cast<int>(data_rng.below(366));
        if (std::find(days.begin(), days.end(), day) == days.end()) {
          days.push_back(day);
        }
      }
      std::sort(days.begin(), days.end());

      Sample sample;
      sample.label = c;
      sample.times = days;
      sample.features.resize(static_cast<std::size_t>(len));
      for (int t = 0; t < len; ++t) {
        auto& row = sample.features[static_cast<std::size_t>(t)];
        row.resize(static_cast<std::size_t>(d));
        const double dist = static_cast<double>(days[static_cast<std::size_t>(t)]) -
                            peak[static_cast<std::size_t>(c)];
        const double bump = std::exp(
            -dist * dist /
            (2.0 * width[static_cast<std::size_t>(c)] * width[static_cast<std::size_t>(c)]));
        for (int j = 0; j < d; ++j) {
          double v = baseline[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] +
                     amplitude[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] * bump +
                     spec.noise_sigma * data_rng.normal();
          row[static_cast<std::size_t>(j)] = std::clamp(v, kClipLo, kClipHi);
        }
      }
      dataset.samples.push_back(std::move(sample));
    }
  }
  validate_dataset(dataset);
  return dataset;
}

LabelSpace Manifest::label_space() const {
  std::vector<std::string> names = class_names;
  if (names.empty()) {
    for (int c = 0; c < num_classes; ++c) {
      names.push_back("class_" + std::to_string(c));
    }
  }
  return LabelSpace(num_classes, std::move(names), parent_of, num_parents);
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  json j = json::parse(in);
  Manifest m;
  m.num_classes = j.at("num_classes").get<int>();
  m.num_parents = j.at("num_parents").get<int>();
  m.parent_of = j.at("parent_of").get<std::vector<int>>();
  m.feature_dim = j.at("feature_dim").get<int>();
  if (j.contains("class_names")) {
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
  }
  if (j.contains("excluded_classes")) {
    m.excluded_classes = j.at("excluded_classes").get<std::vector<int>>();
  }
  m.normalize_raw = j.value("normalize_raw", false);
  return m;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  json j;
  j["num_classes"] = manifest.num_classes;
  j["num_parents"] = manifest.num_parents;
  j["parent_of"] = manifest.parent_of;
  j["feature_dim"] = manifest.feature_dim;
  j["class_names"] = manifest.class_names;
  j["excluded_classes"] = manifest.excluded_classes;
  j["normalize_raw"] = manifest.normalize_raw;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

Manifest manifest_for(const Dataset& dataset) {
  Manifest m;
  m.num_classes = dataset.space.num_classes();
  m.num_parents = dataset.space.num_parents();
  m.parent_of = dataset.space.parent_table();
  m.feature_dim = dataset.feature_dim();
  m.class_names = dataset.space.class_names();
  m.normalize_raw = false;
  return m;
}

Dataset load_csv(const std::string& path, const Manifest& manifest) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  const int d = manifest.feature_dim;

  std::string line;
  if (!std::getline(in, line)) row_error(path, 1, "missing header");
  {
    std::vector<std::string> header = split_line(line);
    std::vector<std::string> expected = {"sample_id", "day"};
    for (int j = 0; j < d; ++j) expected.push_back("f" + std::to_string(j));
    expected.push_back("label");
    if (header != expected) row_error(path, 1, "unexpected columns");
  }

  std::vector<bool> excluded(static_cast<std::size_t>(manifest.num_classes), false);
  for (int c : manifest.excluded_classes) {
    if (c >= 0 && c < manifest.num_classes) excluded[static_cast<std::size_t>(c)] = true;
  }

  Dataset dataset{manifest.label_space(), {}, path};
  Sample current;
  std::string current_id;
  bool have_current = false;

  auto flush = [&]() {
    if (!have_current) return;
    if (!excluded[static_cast<std::size_t>(current.label)]) {
      dataset.samples.push_back(std::move(current));
    }
    current = Sample{};
    have_current = false;
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != d + 3) {
      row_error(path, line_no, "wrong number of columns");
    }
    const std::string& id = cells[0];

    int day = 0;
    try {
      day = std::stoi(cells[1]);
    } catch (const std::exception&) {
      row_error(path, line_no, "bad day value");
    }
    if (day < 1 || day > 366) row_error(path, line_no, "day outside [1, 366]");

    int label = 0;
    try {
      label = std::stoi(cells.back());
    } catch (const std::exception&) {
      row_error(path, line_no, "bad label value");
    }
    if (label < 0 || label >= manifest.num_classes) {
      row_error(path, line_no, "unknown label " + cells.back());
    }

    std::vector<double> feats(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const std::string& cell = cells[static_cast<std::size_t>(j + 2)];
      double v = 0.0;  // empty cell = no-data
      if (!cell.empty()) {
        char* end = nullptr;
        v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) row_error(path, line_no, "bad feature value");
      }
      if (!std::isfinite(v)) v = 0.0;  // no-data convention
      if (manifest.normalize_raw) {
        v = std::clamp(v / 1e4, kClipLo, kClipHi) + 1e-4;
      }
      feats[static_cast<std::size_t>(j)] = v;
    }

    if (have_current && id == current_id) {
      if (label != current.label) {
        row_error(path, line_no, "label changes within sample " + id);
      }
      if (day <= current.times.back()) {
        row_error(path, line_no, "days not strictly increasing in sample " + id);
      }
    } else {
      flush();
      current_id = id;
      current.label = label;
      have_current = true;
    }
    current.times.push_back(day);
    current.features.push_back(std::move(feats));
  }
  flush();

  if (dataset.samples.empty()) {
    throw std::runtime_error(path + ": no samples after exclusions");
  }
  validate_dataset(dataset);
  return dataset;
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  const int d = dataset.feature_dim();
  out << "sample_id,day";
  for (int j = 0; j < d; ++j) out << ",f" << j;
  out << ",label\n";
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    for (std::size_t t = 0; t < s.times.size(); ++t) {
      out << i << ',' << s.times[t];
      for (double v : s.features[t]) out << ',' << fmt_double(v);
      out << ',' << s.label << '\n';
    }
  }
}

}  // namespace pslab
