// Command-line front end. Each subcommand runs one pipeline stage on files;
// `run` chains all of them.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdxai.hpp"

namespace fs = std::filesystem;
using namespace fdxai;

namespace {

int fail(const std::string& stage, const std::string& message, int code = 1) {
  std::cerr << "error [" << stage << "]: " << message << '\n';
  return code;
}

Eigen::VectorXd target_from(const fs::path& labelled_csv, const std::string& target) {
  require_file(labelled_csv);
  return load_dataset(labelled_csv).target(target_number(target));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explain neural networks trained on functional data via fPCA and permutation feature importance"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FDXAI_VERSION);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic signature dataset");
  std::size_t sim_n = 0, sim_grid = 1000, threads = 1;
  std::uint64_t sim_seed = 0;
  std::string sim_params, sim_out;
  simulate->add_option("--n", sim_n, "Number of signatures")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--grid-points", sim_grid, "Grid points on log-time [-4, 0]");
  simulate->add_option("--params", sim_params, "JSON file with generator parameters");
  simulate->add_option("-o,--out", sim_out, "Output CSV")->required();
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // split
  auto* split_cmd = app.add_subcommand("split", "Partition a dataset into train/test/validation");
  std::string split_in, split_out;
  std::uint64_t split_seed = 0;
  std::vector<double> ratios{0.7225, 0.15, 0.1275};
  split_cmd->add_option("--in", split_in, "Dataset CSV")->required();
  split_cmd->add_option("--seed", split_seed, "Shuffle seed");
  split_cmd->add_option("--ratios", ratios, "train test validation fractions")->expected(3);
  split_cmd->add_option("--out-dir", split_out, "Output directory")->required();

  // fpca
  auto* fpca_cmd = app.add_subcommand("fpca", "Fit fPCA on training signatures and write scores");
  std::string fpca_in, fpca_out;
  std::vector<std::string> fpca_project;
  fpca_cmd->add_option("--in", fpca_in, "Training dataset CSV")->required();
  fpca_cmd->add_option("--out-dir", fpca_out, "Model directory")->required();
  fpca_cmd->add_option("--project", fpca_project, "Extra dataset CSVs to transform");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a network on fPC scores");
  std::string train_scores, train_data, train_target, train_out, train_config;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--scores", train_scores, "Score CSV")->required();
  train_cmd->add_option("--data", train_data, "Dataset CSV with the labels (same row order)")->required();
  train_cmd->add_option("--target", train_target, "y1, y2 or y3")->required();
  train_cmd->add_option("--out", train_out, "Model directory")->required();
  train_cmd->add_option("--config", train_config, "JSON file with network settings");
  train_cmd->add_option("--seed", train_seed, "Training seed");

  // pfi
  auto* pfi_cmd = app.add_subcommand("pfi", "Permutation feature importance of a trained network");
  std::string pfi_model, pfi_scores, pfi_data, pfi_target, pfi_out;
  std::size_t pfi_reps = 10;
  std::uint64_t pfi_seed = 0;
  pfi_cmd->add_option("--model", pfi_model, "Model directory")->required();
  pfi_cmd->add_option("--scores", pfi_scores, "Score CSV")->required();
  pfi_cmd->add_option("--data", pfi_data, "Dataset CSV with the labels")->required();
  pfi_cmd->add_option("--target", pfi_target, "y1, y2 or y3")->required();
  pfi_cmd->add_option("--replications", pfi_reps, "Permutations per feature")->check(CLI::PositiveNumber);
  pfi_cmd->add_option("--seed", pfi_seed, "Permutation seed");
  pfi_cmd->add_option("--out", pfi_out, "Output prefix (writes <prefix>.csv and <prefix>.json)")->required();
  pfi_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // report / figures
  auto* report_cmd = app.add_subcommand("report", "Render the run report from a run directory");
  std::string run_dir;
  report_cmd->add_option("--run-dir", run_dir, "Run directory")->required();
  auto* figures_cmd = app.add_subcommand("figures", "Emit all figures from a run directory");
  figures_cmd->add_option("--run-dir", run_dir, "Run directory")->required();
  std::string figures_config;
  figures_cmd->add_option("--config", figures_config, "Run config JSON (figure settings)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline");
  std::string run_config, run_out;
  std::size_t run_n = 0;
  bool full_scale = false, print_config = false;
  std::uint64_t run_seed = 0;
  run_cmd->add_option("--config", run_config, "Run config JSON (missing keys use defaults)");
  run_cmd->add_option("--out", run_out, "Output directory");
  run_cmd->add_option("--n", run_n, "Override the number of signatures");
  run_cmd->add_option("--seed", run_seed, "Override the master seed");
  run_cmd->add_flag("--full-scale", full_scale, "Use 10000 signatures");
  run_cmd->add_flag("--print-config", print_config, "Print the materialized config and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      SimParams params = sim_params.empty() ? SimParams{} : sim_params_from_json(read_json(sim_params));
      const Dataset data = generate_dataset(sim_n, params, sim_seed, default_grid(sim_grid), threads);
      save_dataset(data, sim_out);
      std::cout << "wrote " << data.size() << " signatures x " << data.grid.count() << " points to " << sim_out << '\n';
    } else if (*split_cmd) {
      require_file(split_in);
      const Dataset data = load_dataset(split_in);
      const auto s = split(data.size(), {ratios[0], ratios[1], ratios[2]}, split_seed);
      write_split(data, s, split_out);
      std::cout << "train " << s.train.size() << ", test " << s.test.size() << ", validation " << s.validation.size()
                << '\n';
    } else if (*fpca_cmd) {
      require_file(fpca_in);
      const Dataset train = load_dataset(fpca_in);
      const FpcaModel model = fit_fpca(train);
      save_fpca(model, fpca_out);
      save_scores(transform(model, train), fs::path(fpca_out) / ("scores_" + fs::path(fpca_in).stem().string() + ".csv"));
      for (const auto& extra : fpca_project) {
        require_file(extra);
        save_scores(transform(model, load_dataset(extra)),
                    fs::path(fpca_out) / ("scores_" + fs::path(extra).stem().string() + ".csv"));
      }
      const auto ve = variance_explained(model);
      std::printf("components %zu; fPC1 %.2f%%; first three %.2f%%\n", model.components(), 100.0 * ve.fraction(0),
                  100.0 * ve.cumulative(std::min<Eigen::Index>(2, ve.cumulative.size() - 1)));
    } else if (*train_cmd) {
      require_file(train_scores);
      const int target = target_number(train_target);
      MlpConfig config = RunConfig{}.models[static_cast<std::size_t>(target - 1)];
      if (!train_config.empty()) config = mlp_config_from_json(read_json(train_config), config);
      config.seed = train_seed;
      const Mlp net = train(load_scores(train_scores), target_from(train_data, train_target), config);
      save_mlp(net, train_out);
      std::cout << "trained " << train_target << " for " << net.log.train_loss.size() << " epochs (best "
                << net.log.best_epoch << ")\n";
    } else if (*pfi_cmd) {
      require_file(fs::path(pfi_model) / "model.json");
      require_file(pfi_scores);
      const Mlp net = load_mlp(pfi_model);
      const Predictor predictor = [&net](const Eigen::MatrixXd& x) { return predict(net, x); };
      const auto report = permutation_importance(predictor, load_scores(pfi_scores), target_from(pfi_data, pfi_target),
                                                 loss_for_target(target_number(pfi_target)), pfi_reps, pfi_seed, threads);
      save_pfi(report, pfi_out);
      for (const auto& f : rank_features(report, std::min<std::size_t>(5, report.features())))
        std::printf("fPC %zu  %.6f\n", f.feature, f.mean_importance);
    } else if (*report_cmd) {
      const RunLayout run{run_dir};
      const std::string md = build_report(run);
      write_text(run.report(), md);
      std::cout << md;
    } else if (*figures_cmd) {
      const RunLayout run{run_dir};
      FigureSettings settings;
      const fs::path cfg = figures_config.empty() ? run.config() : fs::path(figures_config);
      if (fs::exists(cfg)) settings = run_config_from_json(read_json(cfg)).figures;
      const auto written = emit_figures(run, settings);
      std::cout << "wrote " << written.size() << " files to " << run.figures().string() << '\n';
    } else if (*run_cmd) {
      RunConfig config = run_config.empty() ? RunConfig{} : run_config_from_json(read_json(run_config));
      if (full_scale) config.n = 10000;
      if (run_n > 0) config.n = run_n;
      if (run_cmd->count("--seed") > 0) config.master_seed = run_seed;
      config.validate();
      if (print_config) {
        std::cout << to_json(config).dump(2) << '\n';
        return 0;
      }
      if (run_out.empty()) return fail("run", "--out is required");
      const auto manifest = run_pipeline(config, run_out);
      std::cout << "run complete: " << manifest.artifacts.size() << " artifacts in " << run_out << '\n';
      std::cout << read_text(RunLayout{run_out}.report());
    }
  } catch (const StageError& e) {
    return fail(e.stage(), e.what(), 2);
  } catch (const std::exception& e) {
    return fail(app.get_subcommands().front()->get_name(), e.what());
  }
  return 0;
}
