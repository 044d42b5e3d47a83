#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tabseq/cluster.hpp"
#include "tabseq/dataset.hpp"
#include "tabseq/permutation.hpp"

namespace tabseq {

// Weighted feature-relationship graph for one cluster. Edges satisfy u < v,
// no duplicates, w >= 0.
struct FeatureGraph {
  struct Edge {
    int u, v;
    double w;
  };
  std::vector<int> vertices;  // sorted feature indices
  std::vector<Edge> edges;
};

enum class SortDirection { ascending, descending };
enum class OrderingMode { variance, graph };
enum class ClusterTarget { samples, features };
enum class ClusterAlgorithm { kmeans, dbscan, external };

struct OrderingConfig {
  OrderingMode mode = OrderingMode::variance;
  ClusterTarget cluster_target = ClusterTarget::samples;
  SortDirection direction = SortDirection::ascending;
  double edge_threshold = 0.3;  // graph mode: |pearson| >= tau
};

struct ClusterConfig {
  ClusterAlgorithm algorithm = ClusterAlgorithm::kmeans;
  KMeansConfig kmeans;
  DbscanConfig dbscan;
  std::string external_labels_path;
};

// Population variance of every feature within every non-noise cluster;
// var(c, i) = Var_c(X_i).
struct ClusterVariances {
  Eigen::MatrixXd var;  // num_clusters x m
};

struct LocalOrderResult {
  std::vector<Permutation> locals;  // one per non-noise cluster
  ClusterVariances variances;
};

// Sum over edges of w_ij * |pos(i) - pos(j)| where pos is the rank of a
// vertex in p. p must cover exactly g's vertices.
double dispersion_cost(const FeatureGraph& g, const Permutation& p);

// Same with all weights treated as 1.
double local_cost_unit(const FeatureGraph& g, const Permutation& p);

// Edge (i, j) present iff |pearson(X_i, X_j)| >= tau over the training
// samples, weighted by |pearson|. Constant features produce no edges.
FeatureGraph build_feature_graph(const Dataset& train, const std::vector<int>& members,
                                 double tau);

// Exhaustive minimum-linear-arrangement search, |V| <= 10. Ties broken by
// lexicographically smallest order.
Permutation minla_exact(const FeatureGraph& g);

// Spectral seed (Fiedler vector of the weighted Laplacian) refined by
// pairwise-swap hill climbing; handles disconnected graphs per component.
Permutation minla_heuristic(const FeatureGraph& g);

// For each non-noise cluster, sorts all m features by within-cluster
// population variance in the given direction (ties: ascending index).
LocalOrderResult variance_local_order(const Dataset& train, const ClusteringResult& clusters,
                                      SortDirection direction);

// Variance mode: weighted Borda aggregation of full-length local orders.
// Graph mode: concatenates cluster blocks by descending alpha_c and records
// F_G = sum alpha_c * F_c.
Permutation global_combine(const std::vector<Permutation>& locals,
                           const std::vector<double>& weights, OrderingMode mode);

// Full pipeline on the training split: cluster -> local order -> combine.
Permutation order_features(const Dataset& train, const OrderingConfig& cfg,
                           const ClusterConfig& cluster_cfg);

// Text permutation file: config annotations plus one line per position with
// the source index and feature name. Byte-deterministic.
struct OrderingFileInfo {
  std::vector<std::string> annotations;  // "key=value" lines
};
void write_ordering_file(const std::string& path, const Permutation& perm,
                         const std::vector<std::string>& feature_names,
                         const OrderingFileInfo& info = {});
Permutation read_ordering_file(const std::string& path,
                               std::vector<std::string>* feature_names = nullptr);

}  // namespace tabseq
