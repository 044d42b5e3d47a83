// Acceptance suite: runs every acceptance criterion end to end and prints
// one PASS/FAIL line each. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tabseq/cluster.hpp"
#include "tabseq/dataset.hpp"
#include "tabseq/experiment.hpp"
#include "tabseq/metrics.hpp"
#include "tabseq/nn.hpp"
#include "tabseq/ordering.hpp"

using namespace tabseq;
namespace fs = std::filesystem;
using Eigen::MatrixXd;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "tabseq_acceptance";
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig wdbc_config(const fs::path& out_dir) {
  ExperimentConfig cfg;
  cfg.dataset_path = std::string(TABSEQ_SOURCE_DIR) + "/data/wdbc.csv";
  cfg.target_column = "diagnosis";
  cfg.drop_columns = {"id"};
  cfg.clustering.kmeans.num_clusters = 3;
  cfg.ordering.direction = SortDirection::ascending;
  cfg.output_dir = out_dir.string();
  cfg.seeds = {1, 2, 3, 4, 5};
  return cfg;
}

// 316 x 393 synthetic stand-in for the restricted autoimmune dataset
fs::path write_synthetic_autoimmune(const fs::path& path) {
  std::mt19937_64 rng(2025);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 316, m = 393;
  std::ofstream out(path);
  for (int j = 0; j < m; ++j) out << "antibody_" << j << ",";
  out << "disease\n";
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    for (int j = 0; j < m; ++j) {
      double v = g(rng);
      if (j % 7 == 0) v += label * 1.2;  // a sprinkling of signal
      out << v << ",";
    }
    out << (label == 0 ? "healthy" : "disease") << "\n";
  }
  return path;
}

double brute_force_minla_cost(const FeatureGraph& g) {
  std::vector<int> order = g.vertices;
  std::sort(order.begin(), order.end());
  auto cost = [&](const std::vector<int>& o) {
    std::map<int, int> pos;
    for (std::size_t i = 0; i < o.size(); ++i) pos[o[i]] = static_cast<int>(i);
    double total = 0.0;
    for (const auto& e : g.edges) total += e.w * std::abs(pos.at(e.u) - pos.at(e.v));
    return total;
  };
  double best = cost(order);
  while (std::next_permutation(order.begin(), order.end())) best = std::min(best, cost(order));
  return best;
}

double auc_pair_oracle(const std::vector<int>& y, const std::vector<double>& s) {
  double concordant = 0.0, ties = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j])
        concordant += 1.0;
      else if (s[i] == s[j])
        ties += 1.0;
    }
  }
  return (concordant + 0.5 * ties) / static_cast<double>(pairs);
}

}  // namespace

int main() {
  const fs::path dir = work_dir();
  std::printf("tabseq acceptance suite\n");

  // results shared between criteria 1 and 7
  ExperimentResult wdbc_ordered;
  double seconds_per_seed = 0.0;

  criterion(1, "WDBC reproduction within the accuracy/AUC band", [&](std::string& detail) {
    ExperimentConfig cfg = wdbc_config(dir / "wdbc_ordered");
    const auto t0 = std::chrono::steady_clock::now();
    wdbc_ordered = run_experiment(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    seconds_per_seed =
        std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(cfg.seeds.size());

    ExperimentConfig plain = wdbc_config(dir / "wdbc_plain");
    plain.ordering_enabled = false;
    const ExperimentResult unordered = run_experiment(plain);

    std::ostringstream os;
    os << "ordered acc=" << wdbc_ordered.mean_accuracy << " auc=" << wdbc_ordered.mean_auc
       << "; unordered acc=" << unordered.mean_accuracy << " auc=" << unordered.mean_auc
       << "; " << seconds_per_seed << " s/seed";
    detail = os.str();

    return wdbc_ordered.succeeded == 5 && unordered.succeeded == 5 &&
           wdbc_ordered.mean_accuracy >= 0.90 && wdbc_ordered.mean_auc >= 0.93 &&
           unordered.mean_accuracy >= 0.90 && seconds_per_seed < 180.0;
  });

  criterion(2, "synthetic 316x393 pipeline with 5-cluster k-means", [&](std::string& detail) {
    const fs::path csv = write_synthetic_autoimmune(dir / "autoimmune.csv");
    ExperimentConfig cfg;
    cfg.dataset_path = csv.string();
    cfg.target_column = "disease";
    cfg.clustering.kmeans.num_clusters = 5;
    cfg.output_dir = (dir / "autoimmune_out").string();
    cfg.seeds = {11};
    const ExperimentResult res = run_experiment(cfg);
    if (res.succeeded != 1) {
      detail = res.seeds.front().error;
      return false;
    }
    const MetricReport& m = res.seeds.front().metrics;
    std::ostringstream os;
    os << "acc=" << m.accuracy << " auc=" << m.auc;
    detail = os.str();
    return m.accuracy >= 0.0 && m.accuracy <= 1.0 && m.auc >= 0.0 && m.auc <= 1.0 &&
           m.confusion.sum() > 0;
  });

  criterion(3, "analytic gradients match finite differences", [&](std::string& detail) {
    nn::NetworkConfig net;
    net.heads = 2;
    net.model_dim = 4;
    net.latent_dim = 4;
    const int m = 6;
    nn::DaeModel model = nn::init_dae(m, net, 77);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    MatrixXd x_clean(4, m), x_noisy(4, m);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        x_clean(i, j) = u(rng);
        x_noisy(i, j) = u(rng);
      }

    nn::DaeForward fwd = nn::dae_forward(x_noisy, x_clean, model.attn, model.dae, true);
    nn::DaeGrads grads = nn::dae_backward(fwd, model.attn, model.dae);

    std::vector<std::pair<MatrixXd*, const MatrixXd*>> entries = {
        {&model.attn.w_embed, &grads.attn.w_embed},
        {&model.attn.b_embed, &grads.attn.b_embed},
        {&model.attn.wq[0], &grads.attn.wq[0]},
        {&model.attn.wk[0], &grads.attn.wk[0]},
        {&model.attn.wv[0], &grads.attn.wv[0]},
        {&model.attn.wq[1], &grads.attn.wq[1]},
        {&model.attn.wk[1], &grads.attn.wk[1]},
        {&model.attn.wv[1], &grads.attn.wv[1]},
        {&model.attn.w_out, &grads.attn.w_out},
        {&model.dae.w_enc, &grads.w_enc},
        {&model.dae.b_enc, &grads.b_enc},
        {&model.dae.w_dec, &grads.w_dec},
        {&model.dae.b_dec, &grads.b_dec},
    };

    const double h = 1e-5;
    double worst = 0.0;
    for (auto& [param, grad] : entries) {
      for (Eigen::Index i = 0; i < param->rows(); ++i)
        for (Eigen::Index j = 0; j < param->cols(); ++j) {
          const double saved = (*param)(i, j);
          (*param)(i, j) = saved + h;
          const double up = nn::dae_forward(x_noisy, x_clean, model.attn, model.dae).loss;
          (*param)(i, j) = saved - h;
          const double down = nn::dae_forward(x_noisy, x_clean, model.attn, model.dae).loss;
          (*param)(i, j) = saved;
          const double fd = (up - down) / (2.0 * h);
          const double a = (*grad)(i, j);
          worst = std::max(worst,
                           std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8}));
        }
    }

    // classifier head parameters, binary loss
    nn::ClassifierParams clf = nn::init_classifier(4, 5, 1, 3);
    MatrixXd z = MatrixXd::Random(6, 4);
    std::vector<int> y = {0, 1, 0, 1, 1, 0};
    nn::ClassifierGrads cg;
    nn::classifier_loss_grads(clf, z, y, 2, &cg);
    std::vector<std::pair<MatrixXd*, const MatrixXd*>> centries = {
        {&clf.w1, &cg.w1}, {&clf.b1, &cg.b1}, {&clf.w2, &cg.w2}, {&clf.b2, &cg.b2}};
    for (auto& [param, grad] : centries) {
      for (Eigen::Index i = 0; i < param->rows(); ++i)
        for (Eigen::Index j = 0; j < param->cols(); ++j) {
          const double saved = (*param)(i, j);
          (*param)(i, j) = saved + h;
          const double up = nn::classifier_loss_grads(clf, z, y, 2, nullptr);
          (*param)(i, j) = saved - h;
          const double down = nn::classifier_loss_grads(clf, z, y, 2, nullptr);
          (*param)(i, j) = saved;
          const double fd = (up - down) / (2.0 * h);
          const double a = (*grad)(i, j);
          worst = std::max(worst,
                           std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8}));
        }
    }

    std::ostringstream os;
    os << "max relative error " << worst;
    detail = os.str();
    return worst < 1e-4;
  });

  criterion(4, "MinLA exactness and heuristic quality on 50 graphs", [&](std::string& detail) {
    std::mt19937_64 rng(4096);
    std::uniform_real_distribution<double> w(0.1, 2.0), coin(0.0, 1.0);
    double worst_ratio = 1.0;
    for (int trial = 0; trial < 50; ++trial) {
      FeatureGraph g;
      const int s = 2 + static_cast<int>(rng() % 7);  // up to 8 vertices
      for (int v = 0; v < s; ++v) g.vertices.push_back(v);
      for (int i = 0; i < s; ++i)
        for (int j = i + 1; j < s; ++j)
          if (coin(rng) < 0.5) g.edges.push_back({i, j, w(rng)});

      const double brute = brute_force_minla_cost(g);
      const double exact = *minla_exact(g).cost;
      if (std::abs(exact - brute) > 1e-9) {
        detail = "exact solver missed the optimum";
        return false;
      }
      const double heur = *minla_heuristic(g).cost;
      if (brute > 0.0) worst_ratio = std::max(worst_ratio, heur / brute);
      else if (heur != 0.0) {
        detail = "heuristic nonzero on a zero-cost graph";
        return false;
      }
    }
    std::ostringstream os;
    os << "worst heuristic/optimal ratio " << worst_ratio;
    detail = os.str();
    return worst_ratio <= 1.5;
  });

  criterion(5, "fast AUC equals the pairwise oracle on 100 instances", [&](std::string& detail) {
    std::mt19937_64 rng(31415);
    std::uniform_int_distribution<int> coarse(0, 8);
    std::uniform_real_distribution<double> fine(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 30 + rng() % 40;
      std::vector<int> y(n);
      std::vector<double> s(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(rng() % 2);
        s[i] = trial % 2 == 0 ? coarse(rng) / 8.0 : fine(rng);
      }
      y[0] = 1;
      y[1] = 0;
      if (std::abs(roc_auc_binary(y, s) - auc_pair_oracle(y, s)) > 1e-12) {
        detail = "mismatch at trial " + std::to_string(trial);
        return false;
      }
    }
    return true;
  });

  criterion(6, "Borda combine equals brute-force aggregation on 100 instances",
            [&](std::string& detail) {
    std::mt19937_64 rng(161803);
    for (int trial = 0; trial < 100; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 5);
      const int k = 1 + static_cast<int>(rng() % 3);
      std::vector<Permutation> locals;
      std::vector<double> weights;
      double total = 0.0;
      for (int c = 0; c < k; ++c) {
        Permutation p;
        p.order.resize(static_cast<std::size_t>(m));
        std::iota(p.order.begin(), p.order.end(), 0);
        std::shuffle(p.order.begin(), p.order.end(), rng);
        locals.push_back(p);
        const double w = 1.0 + static_cast<double>(rng() % 9);
        weights.push_back(w);
        total += w;
      }
      for (double& w : weights) w /= total;

      std::vector<double> score(static_cast<std::size_t>(m), 0.0);
      for (int f = 0; f < m; ++f)
        for (int c = 0; c < k; ++c)
          for (int pos = 0; pos < m; ++pos)
            if (locals[static_cast<std::size_t>(c)].order[static_cast<std::size_t>(pos)] == f)
              score[static_cast<std::size_t>(f)] += weights[static_cast<std::size_t>(c)] * pos;
      std::vector<int> expected;
      std::vector<bool> used(static_cast<std::size_t>(m), false);
      for (int step = 0; step < m; ++step) {
        int pick = -1;
        for (int f = 0; f < m; ++f) {
          if (used[static_cast<std::size_t>(f)]) continue;
          if (pick == -1 ||
              score[static_cast<std::size_t>(f)] < score[static_cast<std::size_t>(pick)])
            pick = f;
        }
        used[static_cast<std::size_t>(pick)] = true;
        expected.push_back(pick);
      }

      if (global_combine(locals, weights, OrderingMode::variance).order != expected) {
        detail = "mismatch at trial " + std::to_string(trial);
        return false;
      }
    }
    return true;
  });

  criterion(7, "ordering invariants on emitted permutations", [&](std::string& detail) {
    // permutations written by criterion 1's WDBC runs
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
      const fs::path f =
          dir / "wdbc_ordered" / ("seed_" + std::to_string(seed)) / "ordering.txt";
      Permutation p = read_ordering_file(f.string());
      if (!is_bijection(p.order)) {
        detail = "non-bijective permutation for seed " + std::to_string(seed);
        return false;
      }
      Permutation round = invert_permutation(invert_permutation(p));
      if (round.order != p.order) {
        detail = "invert round-trip failed";
        return false;
      }
    }

    // ascending variance order is non-decreasing per cluster
    Dataset wdbc = load_csv(std::string(TABSEQ_SOURCE_DIR) + "/data/wdbc.csv", "diagnosis",
                            {"id"});
    SplitSpec spec;
    spec.seed = 1;
    Dataset train = stratified_split(wdbc, spec).train;
    train = apply_scaler(train, fit_scaler(train, ScalerMode::minmax01));
    KMeansConfig km;
    km.num_clusters = 3;
    km.seed = 1;
    ClusteringResult clusters = kmeans_fit(train.values, km);
    LocalOrderResult local = variance_local_order(train, clusters, SortDirection::ascending);
    for (std::size_t c = 0; c < local.locals.size(); ++c) {
      const auto& order = local.locals[c].order;
      for (std::size_t j = 1; j < order.size(); ++j)
        if (local.variances.var(static_cast<int>(c), order[j - 1]) >
            local.variances.var(static_cast<int>(c), order[j]) + 1e-12) {
          detail = "variance sequence decreases in cluster " + std::to_string(c);
          return false;
        }
    }

    // apply/invert identity on data
    Permutation p = read_ordering_file((dir / "wdbc_ordered" / "seed_1" / "ordering.txt").string());
    Dataset moved = apply_permutation(wdbc, p);
    Dataset back = apply_permutation(moved, invert_permutation(p));
    if (back.values != wdbc.values || back.feature_names != wdbc.feature_names) {
      detail = "apply/invert is not the identity";
      return false;
    }
    return true;
  });

  criterion(8, "training progress on synthetic data", [&](std::string& detail) {
    std::mt19937_64 rng(515);
    std::normal_distribution<double> g(0.0, 1.0);
    MatrixXd basis(200, 3), mix(3, 20);
    for (Eigen::Index i = 0; i < basis.rows(); ++i)
      for (Eigen::Index j = 0; j < basis.cols(); ++j) basis(i, j) = g(rng);
    for (Eigen::Index i = 0; i < mix.rows(); ++i)
      for (Eigen::Index j = 0; j < mix.cols(); ++j) mix(i, j) = g(rng);
    MatrixXd data = basis * mix;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      for (Eigen::Index j = 0; j < data.cols(); ++j) data(i, j) += 0.05 * g(rng);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      const double lo = data.col(j).minCoeff(), hi = data.col(j).maxCoeff();
      data.col(j) = (data.col(j).array() - lo) / (hi - lo);
    }

    nn::NetworkConfig net;
    net.heads = 4;
    net.model_dim = 32;
    net.latent_dim = 32;
    nn::DaeModel model = nn::init_dae(20, net, 6);
    nn::TrainConfig cfg;
    cfg.seed = 6;
    nn::LossCurve curve = nn::train_dae(model, data, MatrixXd(0, 20), cfg);
    const bool dae_ok = !curve.train.empty() && curve.train.back() < curve.train.front();

    std::normal_distribution<double> blob(0.0, 0.5);
    MatrixXd z(200, 2);
    std::vector<int> y(200);
    for (int i = 0; i < 200; ++i) {
      const int label = i % 2;
      y[static_cast<std::size_t>(i)] = label;
      z(i, 0) = (label == 0 ? -3.0 : 3.0) + blob(rng);
      z(i, 1) = (label == 0 ? 2.0 : -2.0) + blob(rng);
    }
    nn::ClassifierParams clf = nn::init_classifier(2, 16, 1, 8);
    nn::ClassifierCurve cc = nn::train_classifier(clf, z, y, MatrixXd(0, 2), {}, 2, cfg);
    const bool clf_ok = !cc.train_accuracy.empty() && cc.train_accuracy.back() >= 0.99;

    std::ostringstream os;
    os << "DAE first=" << curve.train.front() << " last=" << curve.train.back()
       << "; classifier acc=" << cc.train_accuracy.back();
    detail = os.str();
    return dae_ok && clf_ok;
  });

  criterion(9, "byte-identical artifacts across repeated runs", [&](std::string& detail) {
    ExperimentConfig cfg = wdbc_config(dir / "det_a");
    cfg.seeds = {7};
    run_experiment(cfg);
    cfg.output_dir = (dir / "det_b").string();
    run_experiment(cfg);

    for (const char* name : {"metrics.csv"}) {
      if (slurp(dir / "det_a" / name) != slurp(dir / "det_b" / name)) {
        detail = std::string(name) + " differs";
        return false;
      }
    }
    for (const char* name : {"ordering.txt", "checkpoint.txt"}) {
      if (slurp(dir / "det_a" / "seed_7" / name) != slurp(dir / "det_b" / "seed_7" / name)) {
        detail = std::string(name) + " differs";
        return false;
      }
    }
    return true;
  });

  criterion(10, "WDBC ablation grid k=1..8 x {asc, desc} is complete", [&](std::string& detail) {
    ExperimentConfig cfg = wdbc_config(dir / "wdbc_ablate");
    cfg.seeds = {1};
    AblationGrid grid;  // kmeans, k 1..8, both directions
    const auto rows = ablate(cfg, grid);
    if (rows.size() != 16) {
      detail = "expected 16 rows, got " + std::to_string(rows.size());
      return false;
    }
    int ok = 0;
    for (const auto& r : rows) ok += r.ok;
    const std::string csv = slurp(dir / "wdbc_ablate" / "ablation.csv");
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    std::ostringstream os;
    os << ok << "/16 cells ok";
    detail = os.str();
    return ok == 16 && lines == 17;
  });

  std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "OK" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
