#include "tabseq/permutation.hpp"

#include <algorithm>
#include <stdexcept>

namespace tabseq {

bool is_bijection_over(const std::vector<int>& order, const std::vector<int>& domain) {
  if (order.size() != domain.size()) return false;
  std::vector<int> a = order;
  std::vector<int> b = domain;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (std::adjacent_find(a.begin(), a.end()) != a.end()) return false;
  return a == b;
}

bool is_bijection(const std::vector<int>& order) {
  std::vector<int> domain(order.size());
  for (std::size_t i = 0; i < domain.size(); ++i) domain[i] = static_cast<int>(i);
  return is_bijection_over(order, domain);
}

Permutation invert_permutation(const Permutation& p) {
  if (!is_bijection(p.order))
    throw std::invalid_argument("invert_permutation: not a bijection over 0..m-1");
  Permutation inv;
  inv.scope = p.scope;
  inv.cluster = p.cluster;
  inv.order.assign(p.order.size(), 0);
  for (std::size_t j = 0; j < p.order.size(); ++j)
    inv.order[static_cast<std::size_t>(p.order[j])] = static_cast<int>(j);
  return inv;
}

Permutation identity_permutation(int m) {
  Permutation p;
  p.order.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) p.order[static_cast<std::size_t>(i)] = i;
  return p;
}

}  // namespace tabseq
