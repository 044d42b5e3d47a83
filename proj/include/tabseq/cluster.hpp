#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace tabseq {

// Labels per clustered item (-1 = DBSCAN noise), the number of non-noise
// clusters, and size-proportional weights alpha_c summing to 1 over
// non-noise clusters.
struct ClusteringResult {
  std::vector<int> labels;
  int num_clusters = 0;
  std::vector<double> weights;
  std::vector<double> inertia_history;  // k-means only, per Lloyd iteration

  int noise_count() const;
};

struct KMeansConfig {
  int num_clusters = 1;
  int max_iters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  int restarts = 10;  // k-means++ restarts, best inertia wins
};

struct DbscanConfig {
  double eps = 0.0;
  int min_pts = 1;
};

// Lloyd iterations with k-means++ seeding. Deterministic per seed; empty
// clusters are re-seeded from the point farthest from its centroid.
ClusteringResult kmeans_fit(const Eigen::MatrixXd& points, const KMeansConfig& cfg);

// Euclidean density clustering. Cluster ids follow first-discovery order;
// noise is labeled -1.
ClusteringResult dbscan_fit(const Eigen::MatrixXd& points, const DbscanConfig& cfg);

// Wraps externally supplied labels (any algorithm can be plugged in via
// file: one integer per line, -1 = noise).
ClusteringResult clustering_from_labels(std::vector<int> labels);
std::vector<int> read_labels_file(const std::string& path);

}  // namespace tabseq
