#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pslab/data.hpp"
#include "pslab/experiment.hpp"
#include "pslab/split.hpp"
#include "pslab/stats.hpp"

namespace {

int run_generate(const pslab::SyntheticSpec& spec, const std::string& out_csv,
                 const std::string& out_manifest) {
  const pslab::Dataset dataset = pslab::generate_synthetic(spec);
  pslab::write_csv(dataset, out_csv);
  if (!out_manifest.empty()) {
    pslab::save_manifest(pslab::manifest_for(dataset), out_manifest);
  }
  const pslab::ClassHistogram hist = pslab::class_histogram(dataset);
  std::cout << "wrote " << dataset.samples.size() << " samples over "
            << dataset.space.num_classes()
            << " classes (gini " << pslab::gini_coefficient(hist) << ") to "
            << out_csv << "\n";
  return 0;
}

int run_split(const std::string& data_csv, const std::string& manifest_path,
              const pslab::SplitSpec& spec, const std::string& out_path) {
  const pslab::Manifest manifest = pslab::load_manifest(manifest_path);
  const pslab::Dataset dataset = pslab::load_csv(data_csv, manifest);
  const pslab::SplitResult split = pslab::class_aware_split(dataset, spec);
  pslab::save_split(split, spec, out_path);
  std::cout << "train " << split.train.size() << ", validation "
            << split.validation.size() << ", test " << split.test.size()
            << " -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prior-shift lab: long-tailed few-shot training experiments"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "emit a synthetic dataset CSV");
  pslab::SyntheticSpec synth;
  std::string gen_out = "data.csv";
  std::string gen_manifest = "manifest.json";
  generate->add_option("--classes", synth.num_classes, "number of classes");
  generate->add_option("--dim", synth.feature_dim, "feature dimension");
  generate->add_option("--samples", synth.num_samples, "total sample count");
  generate->add_option("--exponent", synth.imbalance_exponent,
                       "power-law imbalance exponent");
  generate->add_option("--min-len", synth.min_sequence_length, "min sequence length");
  generate->add_option("--max-len", synth.max_sequence_length, "max sequence length");
  generate->add_option("--noise", synth.noise_sigma, "noise sigma");
  generate->add_option("--seed", synth.seed, "generator seed");
  generate->add_option("--out", gen_out, "output CSV path");
  generate->add_option("--manifest-out", gen_manifest, "output manifest path");

  // split
  auto* split_cmd = app.add_subcommand("split", "class-aware train/validation/test split");
  std::string split_data, split_manifest, split_out = "split.json";
  pslab::SplitSpec split_spec;
  split_cmd->add_option("--data", split_data, "dataset CSV")->required();
  split_cmd->add_option("--manifest", split_manifest, "dataset manifest")->required();
  split_cmd->add_option("--test-fraction", split_spec.test_fraction, "test fraction");
  split_cmd->add_option("--validation-target", split_spec.validation_target,
                        "validation size target");
  split_cmd->add_option("--seed", split_spec.seed, "split seed");
  split_cmd->add_option("--out", split_out, "output JSON path");

  // run
  auto* run_cmd = app.add_subcommand("run", "run the full experiment grid");
  std::string run_config;
  std::string run_out_dir;
  std::vector<int> run_k;
  std::vector<std::uint64_t> run_seeds;
  run_cmd->add_option("--config", run_config, "experiment config JSON")->required();
  run_cmd->add_option("--out-dir", run_out_dir, "override output directory");
  run_cmd->add_option("--k", run_k, "override k grid");
  run_cmd->add_option("--seeds", run_seeds, "override seed set");

  // report
  auto* report_cmd = app.add_subcommand("report", "emit DirPA gain plot data");
  std::string rep_results = "results.csv";
  std::string rep_imbalance = "imbalance.csv";
  std::string rep_out = "gains.csv";
  report_cmd->add_option("--results", rep_results, "results.csv path");
  report_cmd->add_option("--imbalance", rep_imbalance, "imbalance.csv path");
  report_cmd->add_option("--out", rep_out, "output gains CSV");

  // density
  auto* density_cmd = app.add_subcommand("density", "emit K=3 Dirichlet density grid");
  double density_alpha = 1.0;
  int density_resolution = 120;
  int density_refine = 10;
  std::string density_out = "density.csv";
  density_cmd->add_option("--alpha", density_alpha, "concentration parameter");
  density_cmd->add_option("--resolution", density_resolution, "grid subdivisions per edge");
  density_cmd->add_option("--refine", density_refine, "boundary cell refinement depth");
  density_cmd->add_option("--out", density_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return run_generate(synth, gen_out, gen_manifest);
    if (split_cmd->parsed()) {
      return run_split(split_data, split_manifest, split_spec, split_out);
    }
    if (run_cmd->parsed()) {
      pslab::ExperimentConfig cfg = pslab::load_experiment_config(run_config);
      if (!run_out_dir.empty()) cfg.output_dir = run_out_dir;
      if (!run_k.empty()) cfg.k_grid = run_k;
      if (!run_seeds.empty()) cfg.seeds = run_seeds;
      const pslab::ResultsTable table = pslab::run_experiment(cfg);
      std::cout << "wrote " << table.rows.size() << " result rows to "
                << cfg.output_dir << "/results.csv";
      if (!table.failures.empty()) {
        std::cout << " (" << table.failures.size() << " failed cells)";
      }
      std::cout << "\n";
      return table.failures.empty() ? 0 : 1;
    }
    if (report_cmd->parsed()) {
      const auto rows = pslab::load_results_csv(rep_results);
      const auto imbalance = pslab::load_imbalance_csv(rep_imbalance);
      pslab::emit_gain_plot_data(rows, imbalance, rep_out);
      std::cout << "wrote " << rep_out << "\n";
      return 0;
    }
    if (density_cmd->parsed()) {
      pslab::emit_dirichlet_density(density_alpha, density_resolution,
                                    density_out, density_refine);
      std::cout << "wrote " << density_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
