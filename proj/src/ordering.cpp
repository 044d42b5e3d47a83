#include "tabseq/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tabseq/errors.hpp"

namespace tabseq {

namespace {

constexpr int kExactLimit = 10;

std::map<int, int> position_map(const Permutation& p) {
  std::map<int, int> pos;
  for (int j = 0; j < p.size(); ++j) pos[p.order[static_cast<std::size_t>(j)]] = j;
  return pos;
}

void check_coverage(const FeatureGraph& g, const Permutation& p, const char* op) {
  if (!is_bijection_over(p.order, g.vertices))
    throw std::invalid_argument(std::string(op) + ": permutation does not cover graph vertices");
}

double cost_with_positions(const FeatureGraph& g, const std::vector<int>& pos_of,
                           const std::vector<int>& vertex_slot, bool unit) {
  double cost = 0.0;
  for (const auto& e : g.edges) {
    const int pu = pos_of[static_cast<std::size_t>(vertex_slot[static_cast<std::size_t>(e.u)])];
    const int pv = pos_of[static_cast<std::size_t>(vertex_slot[static_cast<std::size_t>(e.v)])];
    cost += (unit ? 1.0 : e.w) * std::abs(pu - pv);
  }
  return cost;
}

double cost_generic(const FeatureGraph& g, const Permutation& p, bool unit) {
  auto pos = position_map(p);
  double cost = 0.0;
  for (const auto& e : g.edges)
    cost += (unit ? 1.0 : e.w) * std::abs(pos.at(e.u) - pos.at(e.v));
  return cost;
}

void validate_graph(const FeatureGraph& g) {
  std::set<int> verts(g.vertices.begin(), g.vertices.end());
  if (verts.size() != g.vertices.size())
    throw std::invalid_argument("feature graph: duplicate vertices");
  std::set<std::pair<int, int>> seen;
  for (const auto& e : g.edges) {
    if (e.u == e.v) throw std::invalid_argument("feature graph: self-loop");
    if (e.u > e.v) throw std::invalid_argument("feature graph: edge must have u < v");
    if (e.w < 0.0) throw std::invalid_argument("feature graph: negative weight");
    if (!verts.count(e.u) || !verts.count(e.v))
      throw std::invalid_argument("feature graph: edge references unknown vertex");
    if (!seen.insert({e.u, e.v}).second)
      throw std::invalid_argument("feature graph: duplicate edge");
  }
}

// connected components, each sorted, ordered by smallest vertex
std::vector<std::vector<int>> components_of(const FeatureGraph& g) {
  std::map<int, std::vector<int>> adj;
  for (int v : g.vertices) adj[v];
  for (const auto& e : g.edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::set<int> unseen(g.vertices.begin(), g.vertices.end());
  std::vector<std::vector<int>> comps;
  while (!unseen.empty()) {
    std::vector<int> comp;
    std::vector<int> stack = {*unseen.begin()};
    unseen.erase(unseen.begin());
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int w : adj[v]) {
        auto it = unseen.find(w);
        if (it != unseen.end()) {
          unseen.erase(it);
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

// Fiedler-vector ordering of one connected component (local vertex list,
// sorted ascending).
std::vector<int> spectral_order(const std::vector<int>& comp, const FeatureGraph& g) {
  const int s = static_cast<int>(comp.size());
  if (s <= 2) return comp;
  std::map<int, int> slot;
  for (int i = 0; i < s; ++i) slot[comp[static_cast<std::size_t>(i)]] = i;

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(s, s);
  for (const auto& e : g.edges) {
    auto iu = slot.find(e.u), iv = slot.find(e.v);
    if (iu == slot.end() || iv == slot.end()) continue;
    lap(iu->second, iv->second) -= e.w;
    lap(iv->second, iu->second) -= e.w;
    lap(iu->second, iu->second) += e.w;
    lap(iv->second, iv->second) += e.w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  Eigen::VectorXd fiedler = solver.eigenvectors().col(1);

  std::vector<int> idx(static_cast<std::size_t>(s));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (fiedler(a) != fiedler(b)) return fiedler(a) < fiedler(b);
    return comp[static_cast<std::size_t>(a)] < comp[static_cast<std::size_t>(b)];
  });
  std::vector<int> order(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i)
    order[static_cast<std::size_t>(i)] = comp[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
  return order;
}

// Pairwise-swap descent on one component's local order.
void hill_climb(std::vector<int>& order, const FeatureGraph& g) {
  const int s = static_cast<int>(order.size());
  if (s < 2) return;
  std::map<int, std::vector<std::pair<int, double>>> adj;
  for (const auto& e : g.edges) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  std::map<int, int> pos;
  for (int i = 0; i < s; ++i) pos[order[static_cast<std::size_t>(i)]] = i;

  auto swap_delta = [&](int a, int b) {
    const int u = order[static_cast<std::size_t>(a)];
    const int v = order[static_cast<std::size_t>(b)];
    double delta = 0.0;
    for (const auto& [x, w] : adj[u]) {
      if (x == v) continue;
      auto px = pos.find(x);
      if (px == pos.end()) continue;
      delta += w * (std::abs(b - px->second) - std::abs(a - px->second));
    }
    for (const auto& [x, w] : adj[v]) {
      if (x == u) continue;
      auto px = pos.find(x);
      if (px == pos.end()) continue;
      delta += w * (std::abs(a - px->second) - std::abs(b - px->second));
    }
    return delta;
  };

  bool improved = true;
  int guard = 0;
  while (improved && guard++ < 1000) {
    improved = false;
    for (int a = 0; a < s - 1; ++a) {
      for (int b = a + 1; b < s; ++b) {
        if (swap_delta(a, b) < -1e-12) {
          std::swap(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
          pos[order[static_cast<std::size_t>(a)]] = a;
          pos[order[static_cast<std::size_t>(b)]] = b;
          improved = true;
        }
      }
    }
  }
}

}  // namespace

double dispersion_cost(const FeatureGraph& g, const Permutation& p) {
  check_coverage(g, p, "dispersion_cost");
  return cost_generic(g, p, /*unit=*/false);
}

double local_cost_unit(const FeatureGraph& g, const Permutation& p) {
  check_coverage(g, p, "local_cost_unit");
  return cost_generic(g, p, /*unit=*/true);
}

FeatureGraph build_feature_graph(const Dataset& train, const std::vector<int>& members,
                                 double tau) {
  if (train.rows() < 2) throw std::invalid_argument("build_feature_graph: need >= 2 samples");
  if (members.empty()) throw std::invalid_argument("build_feature_graph: empty member list");

  FeatureGraph g;
  g.vertices = members;
  std::sort(g.vertices.begin(), g.vertices.end());

  const Eigen::Index n = train.rows();
  const int s = static_cast<int>(g.vertices.size());
  Eigen::MatrixXd cols(n, s);
  Eigen::VectorXd stddev(s);
  for (int i = 0; i < s; ++i) {
    Eigen::VectorXd c = train.values.col(g.vertices[static_cast<std::size_t>(i)]);
    const double mean = c.mean();
    cols.col(i) = c.array() - mean;
    stddev(i) = std::sqrt(cols.col(i).squaredNorm() / static_cast<double>(n));
  }
  for (int i = 0; i < s; ++i) {
    if (stddev(i) == 0.0) continue;  // constant feature: no edges
    for (int j = i + 1; j < s; ++j) {
      if (stddev(j) == 0.0) continue;
      const double cov = cols.col(i).dot(cols.col(j)) / static_cast<double>(n);
      const double r = std::abs(cov / (stddev(i) * stddev(j)));
      if (r >= tau)
        g.edges.push_back({g.vertices[static_cast<std::size_t>(i)],
                           g.vertices[static_cast<std::size_t>(j)], r});
    }
  }
  return g;
}

Permutation minla_exact(const FeatureGraph& g) {
  validate_graph(g);
  const int s = static_cast<int>(g.vertices.size());
  if (s > kExactLimit)
    throw std::invalid_argument("minla_exact: cluster too large for exact mode (" +
                                std::to_string(s) + " > " + std::to_string(kExactLimit) + ")");

  // slots follow ascending vertex id so the lexicographic tie-break is over
  // feature indices
  std::vector<int> verts = g.vertices;
  std::sort(verts.begin(), verts.end());
  std::vector<int> vertex_slot(
      verts.empty() ? 1 : static_cast<std::size_t>(verts.back()) + 1, -1);
  for (int i = 0; i < s; ++i) vertex_slot[static_cast<std::size_t>(verts[static_cast<std::size_t>(i)])] = i;

  std::vector<int> candidate(static_cast<std::size_t>(s));
  std::iota(candidate.begin(), candidate.end(), 0);
  std::vector<int> pos_of(static_cast<std::size_t>(s));

  std::vector<int> best = candidate;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    for (int i = 0; i < s; ++i) pos_of[static_cast<std::size_t>(candidate[static_cast<std::size_t>(i)])] = i;
    const double cost = cost_with_positions(g, pos_of, vertex_slot, /*unit=*/false);
    if (cost < best_cost) {
      best_cost = cost;
      best = candidate;
    }
  } while (std::next_permutation(candidate.begin(), candidate.end()));

  Permutation p;
  p.scope = PermScope::local;
  p.cost = best_cost;
  p.order.resize(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i)
    p.order[static_cast<std::size_t>(i)] = verts[static_cast<std::size_t>(best[static_cast<std::size_t>(i)])];
  return p;
}

Permutation minla_heuristic(const FeatureGraph& g) {
  validate_graph(g);
  Permutation p;
  p.scope = PermScope::local;
  for (const auto& comp : components_of(g)) {
    std::vector<int> order = spectral_order(comp, g);
    hill_climb(order, g);
    p.order.insert(p.order.end(), order.begin(), order.end());
  }
  p.cost = cost_generic(g, p, /*unit=*/false);
  return p;
}

LocalOrderResult variance_local_order(const Dataset& train, const ClusteringResult& clusters,
                                      SortDirection direction) {
  const Eigen::Index m = train.cols();
  const int k = clusters.num_clusters;
  if (static_cast<Eigen::Index>(clusters.labels.size()) != train.rows())
    throw std::invalid_argument("variance_local_order: label count mismatch");
  if (k == 0 || clusters.noise_count() == static_cast<int>(clusters.labels.size()))
    throw std::invalid_argument("variance_local_order: all samples are noise");

  LocalOrderResult result;
  result.variances.var = Eigen::MatrixXd::Zero(k, m);
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < train.rows(); ++i)
      if (clusters.labels[static_cast<std::size_t>(i)] == c) rows.push_back(i);
    if (rows.empty())
      throw std::invalid_argument("variance_local_order: empty cluster " + std::to_string(c));
    if (rows.size() == 1)
      std::cerr << "[tabseq] cluster " << c
                << " has a single sample; variances are all zero (tie-break order)\n";

    for (Eigen::Index j = 0; j < m; ++j) {
      double mean = 0.0;
      for (auto r : rows) mean += train.values(r, j);
      mean /= static_cast<double>(rows.size());
      double var = 0.0;
      for (auto r : rows) {
        const double dv = train.values(r, j) - mean;
        var += dv * dv;
      }
      result.variances.var(c, j) = var / static_cast<double>(rows.size());
    }

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    const auto& var_row = result.variances;
    std::sort(order.begin(), order.end(), [&, c, direction](int a, int b) {
      const double va = var_row.var(c, a), vb = var_row.var(c, b);
      if (va != vb) return direction == SortDirection::ascending ? va < vb : va > vb;
      return a < b;
    });
    Permutation p;
    p.scope = PermScope::local;
    p.cluster = c;
    p.order = std::move(order);
    result.locals.push_back(std::move(p));
  }
  return result;
}

Permutation global_combine(const std::vector<Permutation>& locals,
                           const std::vector<double>& weights, OrderingMode mode) {
  if (locals.empty()) throw std::invalid_argument("global_combine: no local permutations");
  if (locals.size() != weights.size())
    throw std::invalid_argument("global_combine: weight count mismatch");

  Permutation global;
  global.scope = PermScope::global;

  if (mode == OrderingMode::variance) {
    const std::size_t m = locals.front().order.size();
    std::vector<double> score(m, 0.0);
    for (std::size_t c = 0; c < locals.size(); ++c) {
      if (locals[c].order.size() != m || !is_bijection(locals[c].order))
        throw std::invalid_argument("global_combine: local permutation " + std::to_string(c) +
                                    " does not cover all features");
      for (std::size_t rank = 0; rank < m; ++rank)
        score[static_cast<std::size_t>(locals[c].order[rank])] +=
            weights[c] * static_cast<double>(rank);
    }
    global.order.resize(m);
    std::iota(global.order.begin(), global.order.end(), 0);
    std::sort(global.order.begin(), global.order.end(), [&](int a, int b) {
      if (score[static_cast<std::size_t>(a)] != score[static_cast<std::size_t>(b)])
        return score[static_cast<std::size_t>(a)] < score[static_cast<std::size_t>(b)];
      return a < b;
    });
  } else {
    // graph mode: blocks by descending weight, tie-break on the smallest
    // member feature index; F_G = sum of alpha_c * F_c
    std::vector<std::size_t> block(locals.size());
    std::iota(block.begin(), block.end(), 0);
    auto min_member = [&](std::size_t c) {
      return *std::min_element(locals[c].order.begin(), locals[c].order.end());
    };
    std::sort(block.begin(), block.end(), [&](std::size_t a, std::size_t b) {
      if (weights[a] != weights[b]) return weights[a] > weights[b];
      return min_member(a) < min_member(b);
    });
    double f_g = 0.0;
    std::set<int> seen;
    for (std::size_t c : block) {
      for (int v : locals[c].order) {
        if (!seen.insert(v).second)
          throw std::invalid_argument("global_combine: local permutations overlap");
        global.order.push_back(v);
      }
      f_g += weights[c] * locals[c].cost.value_or(0.0);
    }
    global.cost = f_g;
  }

  if (global.order.empty() ||
      (mode == OrderingMode::variance && !is_bijection(global.order)))
    throw std::logic_error("global_combine: result is not a permutation");
  return global;
}

Permutation order_features(const Dataset& train, const OrderingConfig& cfg,
                           const ClusterConfig& cluster_cfg) {
  if (train.rows() == 0 || train.cols() == 0)
    throw std::invalid_argument("order_features: empty training data");
  if (cfg.mode == OrderingMode::variance && cfg.cluster_target != ClusterTarget::samples)
    throw std::invalid_argument("order_features: variance mode requires cluster_target=samples");
  if (cfg.mode == OrderingMode::graph && cfg.cluster_target != ClusterTarget::features)
    throw std::invalid_argument("order_features: graph mode requires cluster_target=features");

  const Eigen::MatrixXd points = cfg.mode == OrderingMode::variance
                                     ? train.values
                                     : Eigen::MatrixXd(train.values.transpose());

  ClusteringResult clusters;
  switch (cluster_cfg.algorithm) {
    case ClusterAlgorithm::kmeans:
      clusters = kmeans_fit(points, cluster_cfg.kmeans);
      break;
    case ClusterAlgorithm::dbscan:
      clusters = dbscan_fit(points, cluster_cfg.dbscan);
      break;
    case ClusterAlgorithm::external: {
      auto labels = read_labels_file(cluster_cfg.external_labels_path);
      if (static_cast<Eigen::Index>(labels.size()) != points.rows())
        throw DataError("external labels: expected " + std::to_string(points.rows()) +
                        " entries, got " + std::to_string(labels.size()));
      clusters = clustering_from_labels(std::move(labels));
      break;
    }
  }

  if (cfg.mode == OrderingMode::variance) {
    auto local = variance_local_order(train, clusters, cfg.direction);
    std::vector<double> weights;
    for (int c = 0; c < clusters.num_clusters; ++c)
      weights.push_back(clusters.weights[static_cast<std::size_t>(c)]);
    return global_combine(local.locals, weights, OrderingMode::variance);
  }

  // graph mode over feature clusters
  const int m = static_cast<int>(train.cols());
  std::vector<Permutation> locals;
  std::vector<double> weights;
  for (int c = 0; c < clusters.num_clusters; ++c) {
    std::vector<int> members;
    for (int j = 0; j < m; ++j)
      if (clusters.labels[static_cast<std::size_t>(j)] == c) members.push_back(j);
    if (members.empty()) continue;
    FeatureGraph g = build_feature_graph(train, members, cfg.edge_threshold);
    Permutation p = static_cast<int>(members.size()) <= kExactLimit ? minla_exact(g)
                                                                    : minla_heuristic(g);
    p.cluster = c;
    p.cost = dispersion_cost(g, p);
    locals.push_back(std::move(p));
    weights.push_back(clusters.weights[static_cast<std::size_t>(c)]);
  }
  if (locals.empty()) throw std::invalid_argument("order_features: all features are noise");
  Permutation global = global_combine(locals, weights, OrderingMode::graph);

  // DBSCAN noise features keep their relative order in a trailing block
  for (int j = 0; j < m; ++j)
    if (clusters.labels[static_cast<std::size_t>(j)] == -1) global.order.push_back(j);
  if (!is_bijection(global.order))
    throw std::logic_error("order_features: result is not a permutation of all features");
  return global;
}

void write_ordering_file(const std::string& path, const Permutation& perm,
                         const std::vector<std::string>& feature_names,
                         const OrderingFileInfo& info) {
  if (perm.size() != static_cast<int>(feature_names.size()))
    throw std::invalid_argument("write_ordering_file: name count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "# tabseq-ordering v1\n";
  for (const auto& a : info.annotations) out << "# " << a << "\n";
  if (perm.cost) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *perm.cost);
    out << "# f_g=" << buf << "\n";
  }
  out << "# position\tsource_index\tfeature_name\n";
  for (int j = 0; j < perm.size(); ++j) {
    const int src = perm.order[static_cast<std::size_t>(j)];
    out << j << "\t" << src << "\t" << feature_names[static_cast<std::size_t>(src)] << "\n";
  }
}

Permutation read_ordering_file(const std::string& path, std::vector<std::string>* feature_names) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ordering file '" + path + "'");
  Permutation perm;
  std::vector<std::pair<int, std::string>> entries;  // source index, name
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto fg = line.find("f_g=");
      if (fg != std::string::npos) perm.cost = std::stod(line.substr(fg + 4));
      continue;
    }
    std::istringstream ls(line);
    int position, source;
    std::string name;
    if (!(ls >> position >> source)) throw DataError("ordering file: bad line '" + line + "'");
    std::getline(ls, name);
    const auto first = name.find_first_not_of(" \t");
    name = first == std::string::npos ? std::string() : name.substr(first);
    if (position != static_cast<int>(entries.size()))
      throw DataError("ordering file: positions out of sequence");
    entries.push_back({source, name});
  }
  if (entries.empty()) throw DataError("ordering file '" + path + "' has no entries");
  for (auto& [src, name] : entries) perm.order.push_back(src);
  if (!is_bijection(perm.order)) throw DataError("ordering file: not a permutation");
  if (feature_names) {
    feature_names->assign(entries.size(), "");
    for (std::size_t j = 0; j < entries.size(); ++j)
      (*feature_names)[static_cast<std::size_t>(entries[j].first)] = entries[j].second;
  }
  return perm;
}

}  // namespace tabseq
