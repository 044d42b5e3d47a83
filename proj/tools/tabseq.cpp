#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "tabseq/errors.hpp"
#include "tabseq/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  int clusters = -1;
  std::string direction;
  bool no_ordering = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", args.seeds, "override seed list (repeatable)");
  cmd->add_option("--out", args.out_dir, "override output directory");
  cmd->add_option("--clusters", args.clusters, "override k-means cluster count");
  cmd->add_option("--direction", args.direction, "override sort direction (asc|desc)")
      ->check(CLI::IsMember({"asc", "desc", "ascending", "descending"}));
  cmd->add_flag("--no-ordering", args.no_ordering, "disable feature ordering");
}

tabseq::ExperimentConfig resolve_config(const CommonArgs& args) {
  tabseq::ExperimentConfig cfg = tabseq::load_experiment_config(args.config_path);
  if (!args.seeds.empty()) cfg.seeds = args.seeds;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.clusters > 0) cfg.clustering.kmeans.num_clusters = args.clusters;
  if (!args.direction.empty())
    cfg.ordering.direction = (args.direction == "desc" || args.direction == "descending")
                                 ? tabseq::SortDirection::descending
                                 : tabseq::SortDirection::ascending;
  if (args.no_ordering) cfg.ordering_enabled = false;
  return cfg;
}

void print_aggregate(const tabseq::ExperimentResult& result) {
  std::printf("seeds: %d ok / %zu total\n", result.succeeded, result.seeds.size());
  if (result.succeeded > 0) {
    std::printf("accuracy: %.4f +/- %.4f\n", result.mean_accuracy, result.stddev_accuracy);
    std::printf("auc:      %.4f +/- %.4f\n", result.mean_auc, result.stddev_auc);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TabSeq: cluster-driven feature ordering for tabular deep learning"};
  app.require_subcommand(1);

  CommonArgs run_args, order_args, train_args, eval_args, ablate_args;
  std::string eval_checkpoint;
  int ablate_max_clusters = 8;
  int ablate_min_clusters = 1;

  CLI::App* cmd_run = app.add_subcommand("run", "full pipeline over all seeds");
  add_common(cmd_run, run_args);
  CLI::App* cmd_order = app.add_subcommand("order", "compute the feature ordering only");
  add_common(cmd_order, order_args);
  CLI::App* cmd_train = app.add_subcommand("train", "train one seed and save a checkpoint");
  add_common(cmd_train, train_args);
  CLI::App* cmd_eval = app.add_subcommand("evaluate", "evaluate a saved checkpoint");
  add_common(cmd_eval, eval_args);
  cmd_eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  CLI::App* cmd_ablate =
      app.add_subcommand("ablate", "grid over cluster counts and sort directions");
  add_common(cmd_ablate, ablate_args);
  cmd_ablate->add_option("--max-clusters", ablate_max_clusters, "largest k in the sweep");
  cmd_ablate->add_option("--min-clusters", ablate_min_clusters, "smallest k in the sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const auto cfg = resolve_config(run_args);
      const auto result = tabseq::run_experiment(cfg);
      print_aggregate(result);
      std::printf("artifacts: %s\n", cfg.output_dir.c_str());
      if (result.succeeded == 0) throw tabseq::TrainingError("all seeds failed");
    } else if (cmd_order->parsed()) {
      const auto cfg = resolve_config(order_args);
      const auto perm = tabseq::order_only(cfg);
      std::printf("wrote ordering of %d features to %s\n", perm.size(),
                  (std::filesystem::path(cfg.output_dir) / "ordering.txt").c_str());
      if (perm.cost) std::printf("F_G = %.6f\n", *perm.cost);
    } else if (cmd_train->parsed()) {
      auto cfg = resolve_config(train_args);
      cfg.seeds.resize(1);
      const auto result = tabseq::run_experiment(cfg);
      if (result.succeeded == 0)
        throw tabseq::TrainingError(result.seeds.front().error);
      std::printf("checkpoint: %s/seed_%llu/checkpoint.txt\n", cfg.output_dir.c_str(),
                  static_cast<unsigned long long>(cfg.seeds.front()));
    } else if (cmd_eval->parsed()) {
      const auto cfg = resolve_config(eval_args);
      const auto report = tabseq::evaluate_checkpoint(cfg, eval_checkpoint);
      std::printf("%s", report.summary({}).c_str());
    } else if (cmd_ablate->parsed()) {
      const auto cfg = resolve_config(ablate_args);
      tabseq::AblationGrid grid;
      grid.min_clusters = ablate_min_clusters;
      grid.max_clusters = ablate_max_clusters;
      const auto rows = tabseq::ablate(cfg, grid);
      int ok = 0;
      for (const auto& r : rows) ok += r.ok;
      std::printf("ablation: %d/%zu cells ok -> %s/ablation.csv\n", ok, rows.size(),
                  cfg.output_dir.c_str());
    }
  } catch (const tabseq::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const tabseq::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
