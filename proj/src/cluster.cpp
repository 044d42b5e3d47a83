#include "tabseq/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "tabseq/errors.hpp"

namespace tabseq {

namespace {

double sq_dist(const Eigen::MatrixXd& points, Eigen::Index i, const Eigen::RowVectorXd& c) {
  return (points.row(i) - c).squaredNorm();
}

// k-means++ seeding: first centroid uniform, subsequent ones sampled with
// probability proportional to squared distance from the nearest centroid.
Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));

  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), sq_dist(points, i, centroids.row(c - 1)));
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    }
    // total == 0: every remaining point duplicates a centroid, fall back to
    // the first point
    centroids.row(c) = points.row(pick);
  }
  return centroids;
}

struct LloydRun {
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> history;
};

LloydRun lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids, const KMeansConfig& cfg) {
  const Eigen::Index n = points.rows();
  const int k = cfg.num_clusters;
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(n), 0);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // assignment (ties to the lowest centroid index)
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(points, i, centroids.row(c));
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      run.labels[static_cast<std::size_t>(i)] = best_c;
      inertia += best;
    }
    run.inertia = inertia;
    run.history.push_back(inertia);

    // update
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(run.labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts(run.labels[static_cast<std::size_t>(i)]) += 1;
    }
    Eigen::MatrixXd next = centroids;
    for (int c = 0; c < k; ++c)
      if (counts(c) > 0) next.row(c) = sums.row(c) / counts(c);

    // re-seed empty clusters from the point farthest from its centroid
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = sq_dist(points, i, next.row(run.labels[static_cast<std::size_t>(i)]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      next.row(c) = points.row(far);
    }

    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = next;
    if (shift < cfg.tol) break;
  }

  // final assignment so labels match the converged centroids
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < k; ++c) {
      const double d = sq_dist(points, i, centroids.row(c));
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    run.labels[static_cast<std::size_t>(i)] = best_c;
    inertia += best;
  }
  run.inertia = inertia;
  run.history.push_back(inertia);
  return run;
}

std::vector<double> size_weights(const std::vector<int>& labels, int k) {
  std::vector<double> weights(static_cast<std::size_t>(k), 0.0);
  int total = 0;
  for (int l : labels) {
    if (l >= 0) {
      weights[static_cast<std::size_t>(l)] += 1.0;
      ++total;
    }
  }
  if (total > 0)
    for (double& w : weights) w /= total;
  return weights;
}

}  // namespace

int ClusteringResult::noise_count() const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), -1));
}

ClusteringResult kmeans_fit(const Eigen::MatrixXd& points, const KMeansConfig& cfg) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw std::invalid_argument("kmeans_fit: empty input");
  if (cfg.num_clusters < 1) throw std::invalid_argument("kmeans_fit: num_clusters must be >= 1");
  if (cfg.num_clusters > n)
    throw std::invalid_argument("kmeans_fit: num_clusters exceeds item count");

  std::mt19937_64 rng(cfg.seed);
  LloydRun best;
  best.inertia = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, cfg.restarts);
  for (int r = 0; r < restarts; ++r) {
    LloydRun run = lloyd(points, kmeanspp_seed(points, cfg.num_clusters, rng), cfg);
    if (run.inertia < best.inertia) best = std::move(run);
  }

  ClusteringResult result;
  result.labels = best.labels;
  result.num_clusters = cfg.num_clusters;
  result.weights = size_weights(result.labels, cfg.num_clusters);
  result.inertia_history = best.history;
  return result;
}

ClusteringResult dbscan_fit(const Eigen::MatrixXd& points, const DbscanConfig& cfg) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw std::invalid_argument("dbscan_fit: empty input");
  if (cfg.eps <= 0.0) throw std::invalid_argument("dbscan_fit: eps must be positive");
  if (cfg.min_pts < 1) throw std::invalid_argument("dbscan_fit: min_pts must be positive");

  const double eps2 = cfg.eps * cfg.eps;
  auto neighbors = [&](Eigen::Index i) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < n; ++j)
      if ((points.row(i) - points.row(j)).squaredNorm() <= eps2) out.push_back(j);
    return out;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> labels(static_cast<std::size_t>(n), kUnvisited);
  int next_cluster = 0;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != kUnvisited) continue;
    auto seed_neighbors = neighbors(i);
    if (static_cast<int>(seed_neighbors.size()) < cfg.min_pts) {
      labels[static_cast<std::size_t>(i)] = -1;
      continue;
    }
    const int cluster = next_cluster++;
    labels[static_cast<std::size_t>(i)] = cluster;
    std::deque<Eigen::Index> queue(seed_neighbors.begin(), seed_neighbors.end());
    while (!queue.empty()) {
      const Eigen::Index q = queue.front();
      queue.pop_front();
      int& ql = labels[static_cast<std::size_t>(q)];
      if (ql == -1) ql = cluster;  // border point previously marked noise
      if (ql != kUnvisited) continue;
      ql = cluster;
      auto q_neighbors = neighbors(q);
      if (static_cast<int>(q_neighbors.size()) >= cfg.min_pts)
        queue.insert(queue.end(), q_neighbors.begin(), q_neighbors.end());
    }
  }

  ClusteringResult result;
  result.labels = std::move(labels);
  result.num_clusters = next_cluster;
  result.weights = size_weights(result.labels, next_cluster);
  return result;
}

ClusteringResult clustering_from_labels(std::vector<int> labels) {
  int k = 0;
  for (int l : labels) {
    if (l < -1) throw std::invalid_argument("labels must be >= -1");
    k = std::max(k, l + 1);
  }
  ClusteringResult result;
  result.labels = std::move(labels);
  result.num_clusters = k;
  result.weights = size_weights(result.labels, k);
  return result;
}

std::vector<int> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file '" + path + "'");
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw DataError("labels file '" + path + "': bad line '" + line + "'");
    }
  }
  if (labels.empty()) throw DataError("labels file '" + path + "' is empty");
  return labels;
}

}  // namespace tabseq
