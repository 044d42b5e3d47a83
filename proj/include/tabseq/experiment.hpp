#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabseq/dataset.hpp"
#include "tabseq/metrics.hpp"
#include "tabseq/nn.hpp"
#include "tabseq/ordering.hpp"

namespace tabseq {

struct ExperimentConfig {
  std::string dataset_path;
  std::string target_column;
  std::vector<std::string> drop_columns;

  SplitSpec split;
  ScalerMode scaler_mode = ScalerMode::minmax01;

  bool ordering_enabled = true;
  OrderingConfig ordering;
  ClusterConfig clustering;

  nn::NetworkConfig network;
  nn::TrainConfig train;

  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
};

// Parses the JSON config file; throws ConfigError with a field path on any
// problem.
ExperimentConfig load_experiment_config(const std::string& path);

// Everything needed to reproduce predictions bit-exactly.
struct Checkpoint {
  nn::DaeModel model;
  nn::ClassifierParams classifier;
  ScalerParams scaler;
  Permutation permutation;  // identity when ordering is disabled
  std::vector<std::string> feature_names;  // post-permutation order
  std::vector<std::string> class_names;
  nn::TrainConfig train;
  std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// One seed of the full pipeline: split -> scale -> (order) -> train DAE ->
// train classifier -> evaluate on the test split.
struct PipelineResult {
  Checkpoint checkpoint;
  nn::LossCurve dae_curve;
  nn::ClassifierCurve classifier_curve;
  MetricReport test_metrics;
};
PipelineResult run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed);
PipelineResult run_single_seed(const ExperimentConfig& cfg, const Dataset& full,
                               std::uint64_t seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricReport metrics;
  std::optional<double> ordering_cost;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  int succeeded = 0;
  double mean_accuracy = 0.0, stddev_accuracy = 0.0;
  double mean_auc = 0.0, stddev_auc = 0.0;
};

// Runs every seed (failures are recorded, not fatal) and writes metrics.csv
// plus per-seed ordering.txt / checkpoint.txt / losses.csv under
// cfg.output_dir. Artifacts are byte-deterministic for a fixed config.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct AblationGrid {
  std::vector<ClusterAlgorithm> algorithms = {ClusterAlgorithm::kmeans};
  int min_clusters = 1;
  int max_clusters = 8;
  std::vector<SortDirection> directions = {SortDirection::ascending,
                                           SortDirection::descending};
};

struct AblationRow {
  std::string algorithm;
  int num_clusters = 0;
  std::string direction;
  std::string mode;
  std::optional<double> f_g;
  bool ok = false;
  double accuracy = 0.0;
  double auc = 0.0;
  std::string error;
};

// One run_experiment per grid cell with shared seeds; failed cells are
// recorded in the CSV, never dropped. Writes ablation.csv to cfg.output_dir.
std::vector<AblationRow> ablate(const ExperimentConfig& cfg, const AblationGrid& grid);

// Clustering + ordering only: writes ordering.txt and a reordered copy of
// the input CSV (original values, permuted feature columns, target last).
Permutation order_only(const ExperimentConfig& cfg);

// Loads a checkpoint, replays split/scale/permute on the configured dataset
// and reports test metrics.
MetricReport evaluate_checkpoint(const ExperimentConfig& cfg, const std::string& checkpoint_path);

void write_metrics_csv(const std::string& path, const ExperimentResult& result);
void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);

}  // namespace tabseq
