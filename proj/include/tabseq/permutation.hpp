#pragma once

#include <optional>
#include <vector>

namespace tabseq {

enum class PermScope { local, global };

// A bijective arrangement of feature indices. order[position] is the source
// feature index placed at that position. Local permutations cover one
// cluster's vertex set; global permutations cover all m features.
struct Permutation {
  std::vector<int> order;
  PermScope scope = PermScope::global;
  int cluster = -1;  // cluster id for local scope, -1 otherwise
  std::optional<double> cost;

  int size() const { return static_cast<int>(order.size()); }
};

// True iff `order` is a bijection over the exact index set `domain`.
bool is_bijection_over(const std::vector<int>& order, const std::vector<int>& domain);

// True iff `order` is a bijection over {0, ..., order.size()-1}.
bool is_bijection(const std::vector<int>& order);

// invert(p)[p.order[j]] = j. Throws std::invalid_argument if p is not a
// bijection over 0..size-1 (global permutations only).
Permutation invert_permutation(const Permutation& p);

Permutation identity_permutation(int m);

}  // namespace tabseq
