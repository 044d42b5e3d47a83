#include "tabseq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tabseq/errors.hpp"

namespace tabseq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

ScalerMode parse_scaler_mode(const std::string& s) {
  if (s == "minmax01") return ScalerMode::minmax01;
  if (s == "zscore") return ScalerMode::zscore;
  throw ConfigError("unknown scaler mode '" + s + "'");
}

SortDirection parse_direction(const std::string& s) {
  if (s == "ascending" || s == "asc") return SortDirection::ascending;
  if (s == "descending" || s == "desc") return SortDirection::descending;
  throw ConfigError("unknown sort direction '" + s + "'");
}

std::string direction_name(SortDirection d) {
  return d == SortDirection::ascending ? "ascending" : "descending";
}

std::string algorithm_name(ClusterAlgorithm a) {
  switch (a) {
    case ClusterAlgorithm::kmeans: return "kmeans";
    case ClusterAlgorithm::dbscan: return "dbscan";
    case ClusterAlgorithm::external: return "external";
  }
  return "?";
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }

  ExperimentConfig cfg;
  try {
    const auto& ds = j.at("dataset");
    cfg.dataset_path = ds.at("path").get<std::string>();
    cfg.target_column = ds.at("target_column").get<std::string>();
    if (ds.contains("drop_columns"))
      cfg.drop_columns = ds["drop_columns"].get<std::vector<std::string>>();

    if (j.contains("split")) {
      const auto& sp = j["split"];
      cfg.split.train_fraction = sp.value("train", 0.70);
      cfg.split.val_fraction = sp.value("val", 0.15);
      cfg.split.test_fraction = sp.value("test", 0.15);
    }
    if (j.contains("scaler")) cfg.scaler_mode = parse_scaler_mode(j["scaler"].get<std::string>());

    if (j.contains("ordering")) {
      const auto& od = j["ordering"];
      cfg.ordering_enabled = od.value("enabled", true);
      const std::string mode = od.value("mode", std::string("variance"));
      if (mode == "variance") {
        cfg.ordering.mode = OrderingMode::variance;
        cfg.ordering.cluster_target = ClusterTarget::samples;
      } else if (mode == "graph") {
        cfg.ordering.mode = OrderingMode::graph;
        cfg.ordering.cluster_target = ClusterTarget::features;
      } else {
        throw ConfigError("unknown ordering mode '" + mode + "'");
      }
      cfg.ordering.direction = parse_direction(od.value("direction", std::string("ascending")));
      cfg.ordering.edge_threshold = od.value("edge_threshold", 0.3);
      if (cfg.ordering.edge_threshold < 0.0 || cfg.ordering.edge_threshold > 1.0)
        throw ConfigError("ordering.edge_threshold must be in [0, 1]");

      if (od.contains("clustering")) {
        const auto& cl = od["clustering"];
        const std::string algo = cl.value("algorithm", std::string("kmeans"));
        if (algo == "kmeans")
          cfg.clustering.algorithm = ClusterAlgorithm::kmeans;
        else if (algo == "dbscan")
          cfg.clustering.algorithm = ClusterAlgorithm::dbscan;
        else if (algo == "external")
          cfg.clustering.algorithm = ClusterAlgorithm::external;
        else
          throw ConfigError("unknown clustering algorithm '" + algo + "'");
        cfg.clustering.kmeans.num_clusters = cl.value("num_clusters", 3);
        cfg.clustering.kmeans.max_iters = cl.value("max_iters", 100);
        cfg.clustering.kmeans.tol = cl.value("tol", 1e-6);
        cfg.clustering.kmeans.restarts = cl.value("restarts", 10);
        cfg.clustering.dbscan.eps = cl.value("eps", 0.0);
        cfg.clustering.dbscan.min_pts = cl.value("min_pts", 1);
        cfg.clustering.external_labels_path = cl.value("labels_path", std::string());
        if (cfg.clustering.algorithm == ClusterAlgorithm::dbscan &&
            cfg.clustering.dbscan.eps <= 0.0)
          throw ConfigError("dbscan requires a positive eps");
        if (cfg.clustering.algorithm == ClusterAlgorithm::external &&
            cfg.clustering.external_labels_path.empty())
          throw ConfigError("external clustering requires labels_path");
      }
    }

    if (j.contains("network")) {
      const auto& net = j["network"];
      cfg.network.heads = net.value("heads", 4);
      cfg.network.model_dim = net.value("model_dim", 32);
      cfg.network.latent_dim = net.value("latent_dim", 32);
      cfg.network.classifier_hidden = net.value("classifier_hidden", 16);
      if (cfg.network.heads < 1 || cfg.network.model_dim % cfg.network.heads != 0)
        throw ConfigError("network.model_dim must be divisible by network.heads");
    }

    if (j.contains("train")) {
      const auto& tr = j["train"];
      cfg.train.epochs = tr.value("epochs", 50);
      cfg.train.batch_size = tr.value("batch_size", 32);
      cfg.train.learning_rate = tr.value("learning_rate", 1e-3);
      cfg.train.beta1 = tr.value("beta1", 0.9);
      cfg.train.beta2 = tr.value("beta2", 0.999);
      cfg.train.epsilon = tr.value("epsilon", 1e-8);
      if (cfg.train.epochs < 0 || cfg.train.batch_size < 1)
        throw ConfigError("train.epochs must be >= 0 and train.batch_size >= 1");
      if (tr.contains("noise")) {
        const auto& nz = tr["noise"];
        const std::string mode = nz.value("mode", std::string("gaussian"));
        if (mode == "gaussian")
          cfg.train.noise.mode = nn::NoiseMode::gaussian;
        else if (mode == "mask")
          cfg.train.noise.mode = nn::NoiseMode::mask;
        else
          throw ConfigError("unknown noise mode '" + mode + "'");
        cfg.train.noise.sigma = nz.value("sigma", 0.1);
        cfg.train.noise.mask_fraction = nz.value("mask_fraction", 0.25);
      }
    }

    cfg.output_dir = j.value("output_dir", std::string("out"));
    if (j.contains("seeds")) {
      cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
      if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    }
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << "# tabseq-checkpoint v1\n";
  out << "seed " << ckpt.seed << "\n";
  const auto& t = ckpt.train;
  out << "train " << t.epochs << " " << t.batch_size << " " << fmt17(t.learning_rate) << " "
      << fmt17(t.beta1) << " " << fmt17(t.beta2) << " " << fmt17(t.epsilon) << " "
      << (t.noise.mode == nn::NoiseMode::gaussian ? "gaussian" : "mask") << " "
      << fmt17(t.noise.sigma) << " " << fmt17(t.noise.mask_fraction) << "\n";
  const auto& a = ckpt.model.attn;
  out << "network " << a.heads << " " << a.model_dim << " " << ckpt.model.dae.latent_dim << " "
      << a.input_dim << " " << ckpt.classifier.num_outputs << "\n";
  out << "classes " << ckpt.class_names.size() << "\n";
  for (const auto& c : ckpt.class_names) out << "class " << c << "\n";
  out << "features " << ckpt.feature_names.size() << "\n";
  for (const auto& f : ckpt.feature_names) out << "feature " << f << "\n";
  out << "permutation " << ckpt.permutation.size() << "\n";
  for (int j = 0; j < ckpt.permutation.size(); ++j)
    out << ckpt.permutation.order[static_cast<std::size_t>(j)]
        << (j + 1 < ckpt.permutation.size() ? " " : "");
  out << "\n";
  out << "scaler " << (ckpt.scaler.mode == ScalerMode::minmax01 ? "minmax01" : "zscore") << " "
      << ckpt.scaler.offset.size() << "\n";
  for (Eigen::Index j = 0; j < ckpt.scaler.offset.size(); ++j)
    out << fmt17(ckpt.scaler.offset(j)) << (j + 1 < ckpt.scaler.offset.size() ? " " : "");
  out << "\n";
  for (Eigen::Index j = 0; j < ckpt.scaler.scale.size(); ++j)
    out << fmt17(ckpt.scaler.scale(j)) << (j + 1 < ckpt.scaler.scale.size() ? " " : "");
  out << "\n";
  for (const auto& nt : nn::collect_tensors(ckpt.model, ckpt.classifier))
    nn::write_tensor_section(out, nt.name, nt.value);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");

  Checkpoint ckpt;
  std::map<std::string, nn::MatrixXd> tensors;
  int heads = 0, model_dim = 0, latent_dim = 0, input_dim = 0, num_outputs = 0;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "seed") {
      ls >> ckpt.seed;
    } else if (key == "train") {
      std::string noise_mode;
      ls >> ckpt.train.epochs >> ckpt.train.batch_size >> ckpt.train.learning_rate >>
          ckpt.train.beta1 >> ckpt.train.beta2 >> ckpt.train.epsilon >> noise_mode >>
          ckpt.train.noise.sigma >> ckpt.train.noise.mask_fraction;
      ckpt.train.noise.mode =
          noise_mode == "mask" ? nn::NoiseMode::mask : nn::NoiseMode::gaussian;
    } else if (key == "network") {
      ls >> heads >> model_dim >> latent_dim >> input_dim >> num_outputs;
    } else if (key == "class") {
      std::string name;
      std::getline(ls, name);
      ckpt.class_names.push_back(name.empty() ? name : name.substr(1));
    } else if (key == "feature") {
      std::string name;
      std::getline(ls, name);
      ckpt.feature_names.push_back(name.empty() ? name : name.substr(1));
    } else if (key == "permutation") {
      int m;
      ls >> m;
      if (!std::getline(in, line)) throw DataError("checkpoint: truncated permutation");
      std::istringstream ps(line);
      ckpt.permutation.order.assign(static_cast<std::size_t>(m), 0);
      for (int j = 0; j < m; ++j) ps >> ckpt.permutation.order[static_cast<std::size_t>(j)];
    } else if (key == "scaler") {
      std::string mode;
      Eigen::Index m;
      ls >> mode >> m;
      ckpt.scaler.mode = parse_scaler_mode(mode);
      ckpt.scaler.offset.resize(m);
      ckpt.scaler.scale.resize(m);
      if (!std::getline(in, line)) throw DataError("checkpoint: truncated scaler");
      std::istringstream off(line);
      for (Eigen::Index j = 0; j < m; ++j) off >> ckpt.scaler.offset(j);
      if (!std::getline(in, line)) throw DataError("checkpoint: truncated scaler");
      std::istringstream sc(line);
      for (Eigen::Index j = 0; j < m; ++j) sc >> ckpt.scaler.scale(j);
      ckpt.scaler.fitted = true;
    } else if (key == "tensor") {
      std::string name;
      Eigen::Index rows, cols;
      ls >> name >> rows >> cols;
      nn::MatrixXd t(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw DataError("checkpoint: truncated tensor " + name);
        std::istringstream row(line);
        for (Eigen::Index j = 0; j < cols; ++j) row >> t(i, j);
      }
      tensors[name] = std::move(t);
    }
  }

  if (heads == 0) throw DataError("checkpoint '" + path + "': missing network line");
  auto take = [&](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError("checkpoint: missing tensor " + name);
    return it->second;
  };

  auto& a = ckpt.model.attn;
  a.heads = heads;
  a.model_dim = model_dim;
  a.head_dim = model_dim / heads;
  a.input_dim = input_dim;
  if (input_dim != model_dim) {
    a.w_embed = take("attn.w_embed");
    a.b_embed = take("attn.b_embed");
  }
  for (int h = 0; h < heads; ++h) {
    const std::string suffix = std::to_string(h);
    a.wq.push_back(take("attn.wq." + suffix));
    a.wk.push_back(take("attn.wk." + suffix));
    a.wv.push_back(take("attn.wv." + suffix));
  }
  a.w_out = take("attn.w_out");
  ckpt.model.dae.latent_dim = latent_dim;
  ckpt.model.dae.w_enc = take("dae.w_enc");
  ckpt.model.dae.b_enc = take("dae.b_enc");
  ckpt.model.dae.w_dec = take("dae.w_dec");
  ckpt.model.dae.b_dec = take("dae.b_dec");
  ckpt.classifier.num_outputs = num_outputs;
  ckpt.classifier.w1 = take("clf.w1");
  ckpt.classifier.b1 = take("clf.b1");
  ckpt.classifier.w2 = take("clf.w2");
  ckpt.classifier.b2 = take("clf.b2");
  return ckpt;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

PipelineResult run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_single_seed(cfg, load_csv(cfg.dataset_path, cfg.target_column, cfg.drop_columns),
                         seed);
}

PipelineResult run_single_seed(const ExperimentConfig& cfg, const Dataset& full,
                               std::uint64_t seed) {
  if (full.class_names.size() < 2) throw DataError("dataset has fewer than two classes");

  SplitSpec split_spec = cfg.split;
  split_spec.seed = seed;
  SplitResult split = stratified_split(full, split_spec);

  const ScalerParams scaler = fit_scaler(split.train, cfg.scaler_mode);
  Dataset train = apply_scaler(split.train, scaler);
  Dataset val = apply_scaler(split.val, scaler);
  Dataset test = apply_scaler(split.test, scaler);

  Permutation perm = identity_permutation(static_cast<int>(train.cols()));
  if (cfg.ordering_enabled) {
    ClusterConfig cc = cfg.clustering;
    cc.kmeans.seed = seed;
    perm = order_features(train, cfg.ordering, cc);
  }
  train = apply_permutation(train, perm);
  val = apply_permutation(val, perm);
  test = apply_permutation(test, perm);

  nn::TrainConfig train_cfg = cfg.train;
  train_cfg.seed = seed;
  const int num_classes = static_cast<int>(full.class_names.size());
  const int num_outputs = num_classes == 2 ? 1 : num_classes;

  PipelineResult result;
  nn::DaeModel model = nn::init_dae(static_cast<int>(train.cols()), cfg.network, seed);
  result.dae_curve = nn::train_dae(model, train.values, val.values, train_cfg);

  const nn::MatrixXd z_train = nn::encode(train.values, model);
  const nn::MatrixXd z_val = nn::encode(val.values, model);
  nn::ClassifierParams clf = nn::init_classifier(
      cfg.network.latent_dim, cfg.network.classifier_hidden, num_outputs, seed + 1);
  result.classifier_curve = nn::train_classifier(clf, z_train, train.labels, z_val, val.labels,
                                                 num_classes, train_cfg);

  const nn::MatrixXd prob = nn::predict(test.values, model, clf);
  result.test_metrics = evaluate_classification(test.labels, prob, num_classes);

  result.checkpoint.model = std::move(model);
  result.checkpoint.classifier = std::move(clf);
  result.checkpoint.scaler = scaler;
  result.checkpoint.permutation = perm;
  result.checkpoint.feature_names = train.feature_names;
  result.checkpoint.class_names = full.class_names;
  result.checkpoint.train = train_cfg;
  result.checkpoint.seed = seed;
  return result;
}

namespace {

void write_losses_csv(const std::string& path, const nn::LossCurve& dae,
                      const nn::ClassifierCurve& clf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "stage,epoch,train_loss,val_loss,train_accuracy,val_accuracy\n";
  for (std::size_t e = 0; e < dae.train.size(); ++e) {
    out << "dae," << e << "," << fmt17(dae.train[e]) << ","
        << (e < dae.val.size() ? fmt17(dae.val[e]) : "") << ",,\n";
  }
  for (std::size_t e = 0; e < clf.train_loss.size(); ++e) {
    out << "classifier," << e << "," << fmt17(clf.train_loss[e]) << ","
        << (e < clf.val_loss.size() ? fmt17(clf.val_loss[e]) : "") << ","
        << fmt17(clf.train_accuracy[e]) << ","
        << (e < clf.val_accuracy.size() ? fmt17(clf.val_accuracy[e]) : "") << "\n";
  }
}

OrderingFileInfo ordering_annotations(const ExperimentConfig& cfg, std::uint64_t seed) {
  OrderingFileInfo info;
  if (!cfg.ordering_enabled) {
    info.annotations.push_back("mode=none");
  } else {
    info.annotations.push_back(
        std::string("mode=") +
        (cfg.ordering.mode == OrderingMode::variance ? "variance" : "graph"));
    info.annotations.push_back("algorithm=" + algorithm_name(cfg.clustering.algorithm));
    if (cfg.clustering.algorithm == ClusterAlgorithm::kmeans)
      info.annotations.push_back("num_clusters=" +
                                 std::to_string(cfg.clustering.kmeans.num_clusters));
    info.annotations.push_back("direction=" + direction_name(cfg.ordering.direction));
  }
  info.annotations.push_back("dataset=" + cfg.dataset_path);
  info.annotations.push_back("seed=" + std::to_string(seed));
  return info;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("run_experiment: seeds must be non-empty");
  fs::create_directories(cfg.output_dir);

  // dataset problems abort the whole run; per-seed failures do not
  const Dataset full = load_csv(cfg.dataset_path, cfg.target_column, cfg.drop_columns);

  ExperimentResult result;
  for (std::uint64_t seed : cfg.seeds) {
    SeedOutcome outcome;
    outcome.seed = seed;
    const fs::path seed_dir = fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
    try {
      PipelineResult run = run_single_seed(cfg, full, seed);
      fs::create_directories(seed_dir);
      // checkpoint stores names in post-permutation order; the ordering file
      // wants the original column names
      std::vector<std::string> original_names(run.checkpoint.feature_names.size());
      for (std::size_t j = 0; j < original_names.size(); ++j)
        original_names[static_cast<std::size_t>(
            run.checkpoint.permutation.order[j])] = run.checkpoint.feature_names[j];
      write_ordering_file((seed_dir / "ordering.txt").string(), run.checkpoint.permutation,
                          original_names, ordering_annotations(cfg, seed));
      save_checkpoint((seed_dir / "checkpoint.txt").string(), run.checkpoint);
      write_losses_csv((seed_dir / "losses.csv").string(), run.dae_curve,
                       run.classifier_curve);
      outcome.ok = true;
      outcome.metrics = run.test_metrics;
      outcome.ordering_cost = run.checkpoint.permutation.cost;
      std::cerr << "[tabseq] seed " << seed << ": accuracy=" << fmt6(outcome.metrics.accuracy)
                << " auc=" << fmt6(outcome.metrics.auc) << "\n";
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
      std::cerr << "[tabseq] seed " << seed << " failed: " << e.what() << "\n";
    }
    result.seeds.push_back(std::move(outcome));
  }

  double acc_sum = 0.0, auc_sum = 0.0;
  for (const auto& s : result.seeds) {
    if (!s.ok) continue;
    ++result.succeeded;
    acc_sum += s.metrics.accuracy;
    auc_sum += s.metrics.auc;
  }
  if (result.succeeded > 0) {
    result.mean_accuracy = acc_sum / result.succeeded;
    result.mean_auc = auc_sum / result.succeeded;
    double acc_var = 0.0, auc_var = 0.0;
    for (const auto& s : result.seeds) {
      if (!s.ok) continue;
      acc_var += (s.metrics.accuracy - result.mean_accuracy) *
                 (s.metrics.accuracy - result.mean_accuracy);
      auc_var += (s.metrics.auc - result.mean_auc) * (s.metrics.auc - result.mean_auc);
    }
    result.stddev_accuracy = std::sqrt(acc_var / result.succeeded);
    result.stddev_auc = std::sqrt(auc_var / result.succeeded);
  }

  write_metrics_csv((fs::path(cfg.output_dir) / "metrics.csv").string(), result);
  return result;
}

void write_metrics_csv(const std::string& path, const ExperimentResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "seed,status,accuracy,auc\n";
  for (const auto& s : result.seeds) {
    if (s.ok)
      out << s.seed << ",ok," << fmt6(s.metrics.accuracy) << "," << fmt6(s.metrics.auc) << "\n";
    else
      out << s.seed << ",failed,,\n";
  }
  if (result.succeeded > 0) {
    out << "mean,," << fmt6(result.mean_accuracy) << "," << fmt6(result.mean_auc) << "\n";
    out << "stddev,," << fmt6(result.stddev_accuracy) << "," << fmt6(result.stddev_auc) << "\n";
  }
}

std::vector<AblationRow> ablate(const ExperimentConfig& cfg, const AblationGrid& grid) {
  if (grid.algorithms.empty() || grid.directions.empty() ||
      grid.min_clusters > grid.max_clusters)
    throw ConfigError("ablate: empty grid");
  fs::create_directories(cfg.output_dir);

  std::vector<AblationRow> rows;
  for (ClusterAlgorithm algo : grid.algorithms) {
    const bool sweep_k = algo == ClusterAlgorithm::kmeans;
    const int k_lo = sweep_k ? grid.min_clusters : 1;
    const int k_hi = sweep_k ? grid.max_clusters : 1;
    for (int k = k_lo; k <= k_hi; ++k) {
      for (SortDirection dir : grid.directions) {
        AblationRow row;
        row.algorithm = algorithm_name(algo);
        row.num_clusters = sweep_k ? k : 0;
        row.direction = direction_name(dir);
        row.mode = cfg.ordering.mode == OrderingMode::variance ? "variance" : "graph";

        ExperimentConfig cell = cfg;
        cell.ordering_enabled = true;
        cell.clustering.algorithm = algo;
        cell.clustering.kmeans.num_clusters = k;
        cell.ordering.direction = dir;
        cell.output_dir = (fs::path(cfg.output_dir) /
                           ("ablate_" + row.algorithm + "_k" + std::to_string(k) + "_" +
                            (dir == SortDirection::ascending ? "asc" : "desc")))
                              .string();
        try {
          ExperimentResult res = run_experiment(cell);
          if (res.succeeded == 0)
            throw TrainingError(res.seeds.empty() ? "no seeds" : res.seeds.front().error);
          row.ok = res.succeeded == static_cast<int>(res.seeds.size());
          if (!row.ok) {
            for (const auto& s : res.seeds)
              if (!s.ok) {
                row.error = s.error;
                break;
              }
          }
          row.accuracy = res.mean_accuracy;
          row.auc = res.mean_auc;
          double fg_sum = 0.0;
          int fg_count = 0;
          for (const auto& s : res.seeds)
            if (s.ok && s.ordering_cost) {
              fg_sum += *s.ordering_cost;
              ++fg_count;
            }
          if (fg_count > 0) row.f_g = fg_sum / fg_count;
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }

  write_ablation_csv((fs::path(cfg.output_dir) / "ablation.csv").string(), rows);
  return rows;
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "algorithm,num_clusters,direction,mode,f_g,accuracy,auc,status\n";
  for (const auto& r : rows) {
    out << r.algorithm << "," << r.num_clusters << "," << r.direction << "," << r.mode << ",";
    if (r.f_g) out << fmt17(*r.f_g);
    out << ",";
    if (r.ok || r.accuracy > 0.0 || r.auc > 0.0)
      out << fmt6(r.accuracy) << "," << fmt6(r.auc);
    else
      out << ",";
    out << "," << (r.ok ? "ok" : "failed: " + r.error) << "\n";
  }
}

Permutation order_only(const ExperimentConfig& cfg) {
  Dataset full = load_csv(cfg.dataset_path, cfg.target_column, cfg.drop_columns);
  const std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds.front();

  SplitSpec split_spec = cfg.split;
  split_spec.seed = seed;
  SplitResult split = stratified_split(full, split_spec);
  const ScalerParams scaler = fit_scaler(split.train, cfg.scaler_mode);
  const Dataset train = apply_scaler(split.train, scaler);

  ClusterConfig cc = cfg.clustering;
  cc.kmeans.seed = seed;
  const Permutation perm = order_features(train, cfg.ordering, cc);

  fs::create_directories(cfg.output_dir);
  write_ordering_file((fs::path(cfg.output_dir) / "ordering.txt").string(), perm,
                      full.feature_names, ordering_annotations(cfg, seed));

  // reordered copy of the ingested dataset (original values, target last)
  const Dataset reordered = apply_permutation(full, perm);
  const fs::path csv_path = fs::path(cfg.output_dir) / "reordered.csv";
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + csv_path.string() + "'");
  for (std::size_t j = 0; j < reordered.feature_names.size(); ++j)
    out << reordered.feature_names[j] << ",";
  out << cfg.target_column << "\n";
  for (Eigen::Index i = 0; i < reordered.rows(); ++i) {
    for (Eigen::Index j = 0; j < reordered.cols(); ++j) out << fmt17(reordered.values(i, j)) << ",";
    out << reordered.class_names[static_cast<std::size_t>(
               reordered.labels[static_cast<std::size_t>(i)])]
        << "\n";
  }
  return perm;
}

MetricReport evaluate_checkpoint(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Dataset full = load_csv(cfg.dataset_path, cfg.target_column, cfg.drop_columns);
  if (full.class_names != ckpt.class_names)
    throw DataError("evaluate: dataset classes do not match the checkpoint");
  if (full.cols() != ckpt.scaler.offset.size())
    throw DataError("evaluate: dataset feature count does not match the checkpoint");

  SplitSpec split_spec = cfg.split;
  split_spec.seed = ckpt.seed;  // replay the checkpoint's split
  SplitResult split = stratified_split(full, split_spec);
  Dataset test = apply_scaler(split.test, ckpt.scaler);
  test = apply_permutation(test, ckpt.permutation);

  const nn::MatrixXd prob = nn::predict(test.values, ckpt.model, ckpt.classifier);
  return evaluate_classification(test.labels, prob,
                                 static_cast<int>(ckpt.class_names.size()));
}

}  // namespace tabseq
