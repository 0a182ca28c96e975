#include "pslab/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pslab {

namespace {

using json = nlohmann::json;

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

SyntheticSpec parse_synthetic(const json& j) {
  SyntheticSpec s;
  s.num_classes = j.value("num_classes", s.num_classes);
  s.feature_dim = j.value("feature_dim", s.feature_dim);
  s.num_samples = j.value("num_samples", s.num_samples);
  s.imbalance_exponent = j.value("imbalance_exponent", s.imbalance_exponent);
  s.min_sequence_length = j.value("min_sequence_length", s.min_sequence_length);
  s.max_sequence_length = j.value("max_sequence_length", s.max_sequence_length);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.seed = j.value("seed", s.seed);
  return s;
}

SplitSpec parse_split(const json& j) {
  SplitSpec s;
  s.test_fraction = j.value("test_fraction", s.test_fraction);
  s.validation_target = j.value("validation_target", s.validation_target);
  s.seed = j.value("seed", s.seed);
  return s;
}

Schedule parse_schedule(const std::string& name) {
  if (name == "constant") return Schedule::constant;
  if (name == "cosine_one_cycle") return Schedule::cosine_one_cycle;
  throw std::invalid_argument("unknown schedule: " + name);
}

CheckpointCriterion parse_checkpoint(const std::string& name) {
  if (name == "val_loss") return CheckpointCriterion::val_loss;
  if (name == "val_kappa") return CheckpointCriterion::val_kappa;
  if (name == "val_accuracy") return CheckpointCriterion::val_accuracy;
  throw std::invalid_argument("unknown checkpoint criterion: " + name);
}

LossKind parse_loss(const std::string& name) {
  if (name == "ce") return LossKind::ce;
  if (name == "focal") return LossKind::focal;
  throw std::invalid_argument("unknown loss: " + name);
}

TrainConfig parse_train(const json& j, const TrainConfig& defaults) {
  TrainConfig t = defaults;
  t.batch_size = j.value("batch_size", t.batch_size);
  t.max_epochs = j.value("max_epochs", t.max_epochs);
  t.patience = j.value("patience", t.patience);
  t.lr_head = j.value("lr_head", t.lr_head);
  t.lr_backbone = j.value("lr_backbone", t.lr_backbone);
  if (j.contains("schedule")) {
    t.schedule = parse_schedule(j.at("schedule").get<std::string>());
  }
  t.warmup_epochs = j.value("warmup_epochs", t.warmup_epochs);
  t.freeze_backbone_epochs =
      j.value("freeze_backbone_epochs", t.freeze_backbone_epochs);
  t.smoothing.epsilon = j.value("smoothing_epsilon", t.smoothing.epsilon);
  if (j.contains("checkpoint")) {
    t.checkpoint = parse_checkpoint(j.at("checkpoint").get<std::string>());
  }
  return t;
}

// RNG stream tags for per-run derivations.
constexpr std::uint64_t kInitStream = 301;
constexpr std::uint64_t kHeadStream = 302;

struct CellKey {
  int k = 0;
  LossKind loss = LossKind::ce;
  bool dirpa = false;
};

std::string variant_name(const CellKey& key) {
  return std::string(loss_kind_name(key.loss)) + "_" +
         (key.dirpa ? "dirpa" : "base");
}

std::string run_id_for(const CellKey& key, const std::string& seed_field) {
  return "k" + std::to_string(key.k) + "_" + variant_name(key) + "_" +
         seed_field;
}

struct Combo {
  std::optional<DirpaConfig> dirpa;
  double gamma = 0.0;
};

std::vector<Combo> combos_for(const ExperimentConfig& cfg, const CellKey& key) {
  std::vector<double> gammas = {0.0};
  if (key.loss == LossKind::focal) gammas = cfg.focal_gamma_grid;
  std::vector<Combo> combos;
  if (!key.dirpa) {
    for (double g : gammas) combos.push_back({std::nullopt, g});
    return combos;
  }
  for (double g : gammas) {
    for (double alpha : cfg.dirpa.alpha_grid) {
      for (double tau : cfg.dirpa.tau_grid) {
        DirpaConfig dc;
        dc.alpha = alpha;
        dc.tau = tau;
        dc.mode = cfg.dirpa.mode;
        dc.asym_focus_alpha = cfg.dirpa.asym_focus_alpha;
        combos.push_back({dc, g});
      }
    }
  }
  return combos;
}

struct CellRun {
  TrainResult result;
  Combo combo;
  double val_kappa = 0.0;
};

/// Grid selection on validation kappa for one (cell, seed): every combo is
/// trained from the same initialization and RNG streams; the best checkpoint
/// by validation kappa wins, first combo on ties.
CellRun run_cell_seed(const ExperimentConfig& cfg, const ModelConfig& model_cfg,
                      const Dataset& dataset,
                      const std::vector<std::size_t>& kshot,
                      const std::vector<std::size_t>& validation,
                      const CellKey& key, std::uint64_t seed,
                      const Checkpoint* pretrained) {
  std::optional<CellRun> best;
  for (const Combo& combo : combos_for(cfg, key)) {
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.loss = key.loss;
    tc.focal.gamma = combo.gamma;
    tc.dirpa = combo.dirpa;

    const Rng base(seed);
    ModelParameters params;
    if (pretrained != nullptr) {
      params = pretrained->params;
      Rng head_rng = base.derive(kHeadStream);
      reinit_head(params, model_cfg, head_rng);
    } else {
      Rng init_rng = base.derive(kInitStream);
      params = init_parameters(model_cfg, init_rng);
    }

    Rng run_rng(seed);
    TrainResult run = train_loop(model_cfg, std::move(params), dataset, kshot,
                                 validation, tc, run_rng);
    const double val_kappa =
        run.record.epochs.at(static_cast<std::size_t>(run.record.best_epoch - 1))
            .val_kappa;
    if (!best.has_value() || val_kappa > best->val_kappa) {
      best = CellRun{std::move(run), combo, val_kappa};
    }
  }
  return std::move(*best);
}

void append_metric_rows(std::vector<ResultRow>& rows, const CellKey& key,
                        const std::string& seed_field,
                        const std::optional<double>& alpha,
                        const std::optional<double>& tau,
                        const MetricsReport& fine, const MetricsReport& parent) {
  for (const MetricsReport* rep : {&fine, &parent}) {
    ResultRow row;
    row.run_id = run_id_for(key, seed_field);
    row.k = key.k;
    row.loss = key.loss;
    row.dirpa = key.dirpa;
    row.alpha = alpha;
    row.tau = tau;
    row.seed = seed_field;
    row.level = rep->level;
    row.kappa = rep->kappa;
    row.accuracy = rep->accuracy;
    row.macro_f1 = rep->macro_f1;
    rows.push_back(std::move(row));
  }
}

}  // namespace

const char* loss_kind_name(LossKind loss) {
  return loss == LossKind::ce ? "ce" : "focal";
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j = json::parse(in);

  ExperimentConfig cfg;
  const json& ds = j.at("dataset");
  if (ds.contains("synthetic")) {
    cfg.synthetic = parse_synthetic(ds.at("synthetic"));
  } else {
    cfg.csv_path = ds.at("csv").get<std::string>();
    cfg.manifest_path = ds.at("manifest").get<std::string>();
  }
  if (j.contains("split")) cfg.split = parse_split(j.at("split"));
  cfg.kshot_seed = j.value("kshot_seed", cfg.split.seed);
  if (j.contains("k_grid")) cfg.k_grid = j.at("k_grid").get<std::vector<int>>();
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (j.contains("losses")) {
    cfg.losses.clear();
    for (const auto& name : j.at("losses")) {
      cfg.losses.push_back(parse_loss(name.get<std::string>()));
    }
  }
  if (j.contains("dirpa")) {
    const json& d = j.at("dirpa");
    cfg.dirpa.run_baseline = d.value("run_baseline", cfg.dirpa.run_baseline);
    cfg.dirpa.run_dirpa = d.value("run_dirpa", cfg.dirpa.run_dirpa);
    if (d.contains("alpha_grid")) {
      cfg.dirpa.alpha_grid = d.at("alpha_grid").get<std::vector<double>>();
    }
    if (d.contains("tau_grid")) {
      cfg.dirpa.tau_grid = d.at("tau_grid").get<std::vector<double>>();
    }
    if (d.contains("mode")) {
      const std::string mode = d.at("mode").get<std::string>();
      if (mode == "symmetric") {
        cfg.dirpa.mode = DirpaMode::symmetric;
      } else if (mode == "asymmetric") {
        cfg.dirpa.mode = DirpaMode::asymmetric;
      } else {
        throw std::invalid_argument("unknown dirpa mode: " + mode);
      }
    }
    cfg.dirpa.asym_focus_alpha =
        d.value("asym_focus_alpha", cfg.dirpa.asym_focus_alpha);
  }
  if (j.contains("focal_gamma_grid")) {
    cfg.focal_gamma_grid = j.at("focal_gamma_grid").get<std::vector<double>>();
  }
  if (j.contains("train")) cfg.train = parse_train(j.at("train"), cfg.train);
  if (j.contains("model")) {
    const json& m = j.at("model");
    cfg.model.embed_dim = m.value("embed_dim", cfg.model.embed_dim);
    cfg.model.use_attention = m.value("use_attention", cfg.model.use_attention);
    cfg.model.t_max = m.value("t_max", cfg.model.t_max);
  }
  if (j.contains("pretrain")) {
    const json& p = j.at("pretrain");
    PretrainSection section;
    section.synthetic = parse_synthetic(p.at("synthetic"));
    section.split = parse_split(p.at("split"));
    section.cfg.per_class_cap = p.value("per_class_cap", 10000);
    if (p.contains("train")) {
      section.cfg.train = parse_train(p.at("train"), section.cfg.train);
    }
    cfg.pretrain = section;
  }
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.write_traces = j.value("write_traces", cfg.write_traces);

  if (cfg.k_grid.empty() || cfg.seeds.empty() || cfg.losses.empty()) {
    throw std::invalid_argument("experiment config: empty grid");
  }
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    for (std::size_t j2 = i + 1; j2 < cfg.seeds.size(); ++j2) {
      if (cfg.seeds[i] == cfg.seeds[j2]) {
        throw std::invalid_argument("experiment config: duplicate seeds");
      }
    }
  }
  return cfg;
}

ResultsTable run_experiment(const ExperimentConfig& cfg) {
  Dataset dataset =
      cfg.synthetic.has_value()
          ? generate_synthetic(*cfg.synthetic)
          : load_csv(cfg.csv_path, load_manifest(cfg.manifest_path));

  ModelConfig model_cfg = cfg.model;
  model_cfg.feature_dim = dataset.feature_dim();
  model_cfg.num_classes = dataset.space.num_classes();

  // The split is computed once; every cell is evaluated on the same test set.
  const SplitResult split = class_aware_split(dataset, cfg.split);
  const ClassHistogram test_hist = class_histogram(dataset, split.test);
  const double gini_test = gini_coefficient(test_hist);

  std::map<int, std::vector<std::size_t>> kshots;
  ResultsTable table;
  for (int k : cfg.k_grid) {
    FewShotSpec fs{k, cfg.kshot_seed};
    kshots[k] = build_kshot(split.train, dataset, fs);
    ImbalanceRow row;
    row.k = k;
    row.gini_test = gini_test;
    row.bhattacharyya =
        bhattacharyya_distance(class_histogram(dataset, kshots[k]), test_hist);
    table.imbalance.push_back(row);
  }

  // Optional shared pre-training, once per seed.
  std::map<std::uint64_t, Checkpoint> backbones;
  if (cfg.pretrain.has_value()) {
    const Dataset pre_data = generate_synthetic(cfg.pretrain->synthetic);
    if (pre_data.feature_dim() != dataset.feature_dim()) {
      throw std::invalid_argument(
          "pretrain feature dimension differs from experiment dataset");
    }
    const SplitResult pre_split = class_aware_split(pre_data, cfg.pretrain->split);
    ModelConfig pre_model = model_cfg;
    pre_model.num_classes = pre_data.space.num_classes();
    for (std::uint64_t seed : cfg.seeds) {
      PretrainConfig pc = cfg.pretrain->cfg;
      pc.train.seed = seed;
      Rng pre_rng(seed);
      Rng init_rng = pre_rng.derive(kInitStream);
      ModelParameters params = init_parameters(pre_model, init_rng);

      std::vector<std::vector<std::size_t>> by_class(
          static_cast<std::size_t>(pre_model.num_classes));
      for (std::size_t i : pre_split.train) {
        by_class[static_cast<std::size_t>(pre_data.samples[i].label)].push_back(i);
      }
      const Rng cap_base = Rng(seed).derive(201);
      std::vector<std::size_t> capped;
      for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() > static_cast<std::size_t>(pc.per_class_cap)) {
          Rng class_rng = cap_base.derive(static_cast<std::uint64_t>(c));
          class_rng.shuffle(members);
          members.resize(static_cast<std::size_t>(pc.per_class_cap));
          std::sort(members.begin(), members.end());
        }
        capped.insert(capped.end(), members.begin(), members.end());
      }
      std::sort(capped.begin(), capped.end());

      TrainResult pre = train_loop(pre_model, std::move(params), pre_data,
                                   capped, pre_split.validation, pc.train,
                                   pre_rng);
      backbones[seed] = std::move(pre.best);
    }
  }

  std::filesystem::create_directories(cfg.output_dir);
  const std::filesystem::path trace_dir =
      std::filesystem::path(cfg.output_dir) / "traces";
  if (cfg.write_traces) std::filesystem::create_directories(trace_dir);

  std::vector<CellKey> cells;
  for (int k : cfg.k_grid) {
    for (LossKind loss : cfg.losses) {
      if (cfg.dirpa.run_baseline) cells.push_back({k, loss, false});
      if (cfg.dirpa.run_dirpa) cells.push_back({k, loss, true});
    }
  }

  for (const CellKey& cell : cells) {
    struct SeedOutcome {
      MetricsReport fine;
      MetricsReport parent;
      std::optional<double> alpha;
      std::optional<double> tau;
    };
    std::vector<SeedOutcome> outcomes;
    bool all_seeds_ok = true;

    for (std::uint64_t seed : cfg.seeds) {
      const std::string seed_field = "s" + std::to_string(seed);
      try {
        const Checkpoint* backbone = nullptr;
        if (const auto it = backbones.find(seed); it != backbones.end()) {
          backbone = &it->second;
        }
        CellRun run = run_cell_seed(cfg, model_cfg, dataset, kshots[cell.k],
                                    split.validation, cell, seed, backbone);

        const EvalResult test_eval = evaluate(run.result.best.params, model_cfg,
                                              dataset, split.test, cfg.train);
        const MetricsReport fine =
            metrics_report(test_eval.confusion, MetricLevel::fine);
        const MetricsReport parent = metrics_report(
            rollup_confusion(test_eval.confusion, dataset.space),
            MetricLevel::parent);

        SeedOutcome outcome;
        outcome.fine = fine;
        outcome.parent = parent;
        if (run.combo.dirpa.has_value()) {
          outcome.alpha = run.combo.dirpa->alpha;
          outcome.tau = run.combo.dirpa->tau;
        }
        append_metric_rows(table.rows, cell, std::to_string(seed),
                           outcome.alpha, outcome.tau, fine, parent);
        outcomes.push_back(outcome);

        if (cfg.write_traces) {
          write_run_trace(run.result.record,
                          (trace_dir / (run_id_for(cell, seed_field) + ".jsonl"))
                              .string());
        }
      } catch (const std::exception& e) {
        all_seeds_ok = false;
        const std::string msg = run_id_for(cell, seed_field) + ": " + e.what();
        table.failures.push_back(msg);
        std::cerr << "cell failed: " << msg << "\n";
      }
    }

    if (all_seeds_ok && outcomes.size() >= 2) {
      auto aggregate = [&](auto metric_of) {
        double mean_fine = 0.0, mean_parent = 0.0;
        for (const SeedOutcome& o : outcomes) {
          mean_fine += metric_of(o.fine);
          mean_parent += metric_of(o.parent);
        }
        mean_fine /= static_cast<double>(outcomes.size());
        mean_parent /= static_cast<double>(outcomes.size());
        double var_fine = 0.0, var_parent = 0.0;
        for (const SeedOutcome& o : outcomes) {
          var_fine += (metric_of(o.fine) - mean_fine) * (metric_of(o.fine) - mean_fine);
          var_parent +=
              (metric_of(o.parent) - mean_parent) * (metric_of(o.parent) - mean_parent);
        }
        var_fine /= static_cast<double>(outcomes.size() - 1);
        var_parent /= static_cast<double>(outcomes.size() - 1);
        return std::array<double, 4>{mean_fine, mean_parent,
                                     std::sqrt(var_fine), std::sqrt(var_parent)};
      };
      const auto kappa_stats = aggregate([](const MetricsReport& r) { return r.kappa; });
      const auto acc_stats = aggregate([](const MetricsReport& r) { return r.accuracy; });
      const auto f1_stats = aggregate([](const MetricsReport& r) { return r.macro_f1; });

      MetricsReport fine_mean{kappa_stats[0], acc_stats[0], f1_stats[0], MetricLevel::fine};
      MetricsReport parent_mean{kappa_stats[1], acc_stats[1], f1_stats[1], MetricLevel::parent};
      MetricsReport fine_std{kappa_stats[2], acc_stats[2], f1_stats[2], MetricLevel::fine};
      MetricsReport parent_std{kappa_stats[3], acc_stats[3], f1_stats[3], MetricLevel::parent};
      append_metric_rows(table.rows, cell, "mean", std::nullopt, std::nullopt,
                         fine_mean, parent_mean);
      append_metric_rows(table.rows, cell, "std", std::nullopt, std::nullopt,
                         fine_std, parent_std);
    }
  }

  write_results_csv(table, (std::filesystem::path(cfg.output_dir) / "results.csv").string());
  write_imbalance_csv(table, (std::filesystem::path(cfg.output_dir) / "imbalance.csv").string());
  if (!table.failures.empty()) {
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "failures.txt");
    for (const std::string& f : table.failures) out << f << "\n";
  }
  return table;
}

void write_results_csv(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results: " + path);
  out << "run_id,k,loss,dirpa,alpha,tau,seed,level,kappa,accuracy,macro_f1\n";
  for (const ResultRow& r : table.rows) {
    out << r.run_id << ',' << r.k << ',' << loss_kind_name(r.loss) << ','
        << (r.dirpa ? "on" : "off") << ','
        << (r.alpha.has_value() ? fmt(*r.alpha, "%g") : "") << ','
        << (r.tau.has_value() ? fmt(*r.tau, "%g") : "") << ',' << r.seed << ','
        << metric_level_name(r.level) << ',' << fmt(r.kappa) << ','
        << fmt(r.accuracy) << ',' << fmt(r.macro_f1) << '\n';
  }
}

void write_imbalance_csv(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write imbalance: " + path);
  out << "k,gini_test,bhattacharyya_kshot_vs_test\n";
  for (const ImbalanceRow& r : table.imbalance) {
    out << r.k << ',' << fmt(r.gini_test) << ','
        << (std::isinf(r.bhattacharyya) ? "inf" : fmt(r.bhattacharyya)) << '\n';
  }
}

std::vector<ResultRow> load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results csv");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 11) cells.emplace_back();
    ResultRow r;
    r.run_id = cells[0];
    r.k = std::stoi(cells[1]);
    r.loss = parse_loss(cells[2]);
    r.dirpa = cells[3] == "on";
    if (!cells[4].empty()) r.alpha = std::stod(cells[4]);
    if (!cells[5].empty()) r.tau = std::stod(cells[5]);
    r.seed = cells[6];
    r.level = cells[7] == "parent" ? MetricLevel::parent : MetricLevel::fine;
    r.kappa = std::stod(cells[8]);
    r.accuracy = std::stod(cells[9]);
    r.macro_f1 = std::stod(cells[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ImbalanceRow> load_imbalance_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open imbalance: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty imbalance csv");
  std::vector<ImbalanceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string k_str, gini_str, db_str;
    std::getline(ss, k_str, ',');
    std::getline(ss, gini_str, ',');
    std::getline(ss, db_str, ',');
    ImbalanceRow r;
    r.k = std::stoi(k_str);
    r.gini_test = std::stod(gini_str);
    r.bhattacharyya = db_str == "inf"
                          ? std::numeric_limits<double>::infinity()
                          : std::stod(db_str);
    rows.push_back(r);
  }
  return rows;
}

void emit_gain_plot_data(const std::vector<ResultRow>& rows,
                         const std::vector<ImbalanceRow>& imbalance,
                         const std::string& path) {
  // Use aggregate rows when present, otherwise pair per-seed rows.
  bool has_mean = false;
  for (const ResultRow& r : rows) {
    if (r.seed == "mean") {
      has_mean = true;
      break;
    }
  }

  auto db_for = [&](int k) -> std::optional<double> {
    for (const ImbalanceRow& r : imbalance) {
      if (r.k == k) return r.bhattacharyya;
    }
    return std::nullopt;
  };
  auto gini_for = [&](int k) -> std::optional<double> {
    for (const ImbalanceRow& r : imbalance) {
      if (r.k == k) return r.gini_test;
    }
    return std::nullopt;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gains: " + path);
  out << "k,loss,level,gini,bhattacharyya,metric,baseline,dirpa,gain,sign\n";

  for (const ResultRow& base : rows) {
    if (base.dirpa) continue;
    if (base.seed == "std") continue;
    if (has_mean && base.seed != "mean") continue;
    const ResultRow* paired = nullptr;
    for (const ResultRow& other : rows) {
      if (other.dirpa && other.k == base.k && other.loss == base.loss &&
          other.level == base.level && other.seed == base.seed) {
        paired = &other;
        break;
      }
    }
    if (paired == nullptr) {
      std::cerr << "emit_gain_plot_data: no DirPA counterpart for "
                << base.run_id << "\n";
      continue;
    }
    const auto gini = gini_for(base.k);
    const auto db = db_for(base.k);
    if (!gini.has_value() || !db.has_value()) {
      std::cerr << "emit_gain_plot_data: no imbalance row for k=" << base.k
                << "\n";
      continue;
    }
    struct MetricPick {
      const char* name;
      double base_value;
      double dirpa_value;
    };
    const MetricPick picks[3] = {
        {"kappa", base.kappa, paired->kappa},
        {"accuracy", base.accuracy, paired->accuracy},
        {"macro_f1", base.macro_f1, paired->macro_f1}};
    for (const MetricPick& p : picks) {
      const double gain = p.dirpa_value - p.base_value;
      out << base.k << ',' << loss_kind_name(base.loss) << ','
          << metric_level_name(base.level) << ',' << fmt(*gini) << ','
          << (std::isinf(*db) ? "inf" : fmt(*db)) << ',' << p.name << ','
          << fmt(p.base_value) << ',' << fmt(p.dirpa_value) << ',' << fmt(gain)
          << ',' << (gain >= 0.0 ? '+' : '-') << '\n';
    }
  }
}

namespace {

struct Tri {
  double v[3][2];  // (p1, p2) per vertex
};

// Index of the simplex boundary line an edge lies on, or -1.
// Lines: 0 -> p1 = 0, 1 -> p2 = 0, 2 -> p1 + p2 = 1.
int edge_boundary_line(const double a[2], const double b[2]) {
  constexpr double eps = 1e-13;
  if (a[0] < eps && b[0] < eps) return 0;
  if (a[1] < eps && b[1] < eps) return 1;
  if (a[0] + a[1] > 1.0 - eps && b[0] + b[1] > 1.0 - eps) return 2;
  return -1;
}

}  // namespace

void emit_dirichlet_density(double alpha, int resolution,
                            const std::string& path, int refine_depth) {
  if (alpha <= 0.0 || resolution < 2 || refine_depth < 0) {
    throw std::invalid_argument("emit_dirichlet_density: bad parameters");
  }
  const std::vector<double> alpha_vec(3, alpha);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write density: " + path);
  out << "p1,p2,p3,x,y,log_density,weight\n";

  auto emit_cell = [&](const Tri& t) {
    const double p1 = (t.v[0][0] + t.v[1][0] + t.v[2][0]) / 3.0;
    const double p2 = (t.v[0][1] + t.v[1][1] + t.v[2][1]) / 3.0;
    const double p3 = 1.0 - p1 - p2;
    const double area =
        std::abs((t.v[1][0] - t.v[0][0]) * (t.v[2][1] - t.v[0][1]) -
                 (t.v[2][0] - t.v[0][0]) * (t.v[1][1] - t.v[0][1])) /
        2.0;
    const double ld = dirichlet_log_density(PseudoPrior{{p1, p2, p3}}, alpha_vec);
    const double x = p2 + 0.5 * p3;
    const double y = std::sqrt(3.0) / 2.0 * p3;
    out << fmt(p1, "%.12g") << ',' << fmt(p2, "%.12g") << ',' << fmt(p3, "%.12g")
        << ',' << fmt(x, "%.9g") << ',' << fmt(y, "%.9g") << ','
        << fmt(ld, "%.9g") << ',' << fmt(area, "%.12g") << '\n';
  };

  // Midpoint rule over a uniform triangulation. Cells on the simplex
  // boundary, where alpha < 1 densities have integrable singularities, are
  // graded geometrically toward the edge: each level peels off the far half
  // and recurses into a strip of half the height (corner cells split 4-way
  // so both incident edges keep grading).
  auto process = [&](const Tri& t, int depth, auto&& self) -> void {
    int lines[3];
    int boundary_edges = 0;
    for (int e = 0; e < 3; ++e) {
      lines[e] = edge_boundary_line(t.v[e], t.v[(e + 1) % 3]);
      if (lines[e] >= 0) ++boundary_edges;
    }
    if (depth == 0 || boundary_edges == 0) {
      emit_cell(t);
      return;
    }
    if (boundary_edges == 1) {
      int e = 0;
      while (lines[e] < 0) ++e;
      const double* a = t.v[e];
      const double* b = t.v[(e + 1) % 3];
      const double* c = t.v[(e + 2) % 3];
      const double m1[2] = {(a[0] + c[0]) / 2.0, (a[1] + c[1]) / 2.0};
      const double m2[2] = {(b[0] + c[0]) / 2.0, (b[1] + c[1]) / 2.0};
      emit_cell({{{m1[0], m1[1]}, {m2[0], m2[1]}, {c[0], c[1]}}});
      emit_cell({{{a[0], a[1]}, {m2[0], m2[1]}, {m1[0], m1[1]}}});
      self({{{a[0], a[1]}, {b[0], b[1]}, {m2[0], m2[1]}}}, depth - 1, self);
      return;
    }
    // Corner cell: 4-way midpoint split.
    const double m01[2] = {(t.v[0][0] + t.v[1][0]) / 2.0,
                           (t.v[0][1] + t.v[1][1]) / 2.0};
    const double m12[2] = {(t.v[1][0] + t.v[2][0]) / 2.0,
                           (t.v[1][1] + t.v[2][1]) / 2.0};
    const double m20[2] = {(t.v[2][0] + t.v[0][0]) / 2.0,
                           (t.v[2][1] + t.v[0][1]) / 2.0};
    self({{{t.v[0][0], t.v[0][1]}, {m01[0], m01[1]}, {m20[0], m20[1]}}},
         depth - 1, self);
    self({{{m01[0], m01[1]}, {t.v[1][0], t.v[1][1]}, {m12[0], m12[1]}}},
         depth - 1, self);
    self({{{m20[0], m20[1]}, {m12[0], m12[1]}, {t.v[2][0], t.v[2][1]}}},
         depth - 1, self);
    self({{{m01[0], m01[1]}, {m12[0], m12[1]}, {m20[0], m20[1]}}}, depth - 1,
         self);
  };

  const double n = static_cast<double>(resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j + i < resolution; ++j) {
      const double a = i / n, b = j / n, h = 1.0 / n;
      process({{{a, b}, {a + h, b}, {a, b + h}}}, refine_depth, process);
      if (j + i < resolution - 1) {
        process({{{a + h, b}, {a, b + h}, {a + h, b + h}}}, refine_depth,
                process);
      }
    }
  }
}

}  // namespace pslab
