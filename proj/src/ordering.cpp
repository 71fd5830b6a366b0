#include <algorithm>
#include <vector>

#include "dfmg/saddle_solver.hpp"

namespace dfmg {

namespace {

constexpr std::size_t kLeafSize = 64;

class Dissector {
 public:
  explicit Dissector(const SparseMatrix& pattern)
      : pattern_(pattern), owner_(static_cast<std::size_t>(pattern.rows()), -1), level_(owner_.size(), -1) {}

  std::vector<int> run() {
    std::vector<int> all(owner_.size());
    for (std::size_t v = 0; v < all.size(); ++v) all[v] = static_cast<int>(v);
    dissect(std::move(all));
    return std::move(order_);
  }

 private:
  // BFS restricted to vertices owned by `id`; returns the vertices by level.
  std::vector<int> bfs(int root, int id, int& depth) {
    std::vector<int> queue{root};
    level_[root] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int v = queue[head];
      for (SparseMatrix::InnerIterator it(pattern_, v); it; ++it) {
        const auto w = static_cast<int>(it.row());
        if (owner_[w] == id && level_[w] < 0) {
          level_[w] = level_[v] + 1;
          queue.push_back(w);
        }
      }
    }
    depth = level_[queue.back()];
    return queue;
  }

  void reset_levels(const std::vector<int>& vertices) {
    for (const int v : vertices) level_[v] = -1;
  }

  void dissect(std::vector<int> vertices) {
    if (vertices.size() <= kLeafSize) {
      order_.insert(order_.end(), vertices.begin(), vertices.end());
      return;
    }
    const int id = next_id_++;
    for (const int v : vertices) owner_[v] = id;

    int depth = 0;
    std::vector<int> reached = bfs(vertices.front(), id, depth);
    const int far = reached.back();
    reset_levels(reached);
    reached = bfs(far, id, depth);

    if (reached.size() < vertices.size()) {
      // disconnected: the component and the rest are independent
      std::vector<int> rest;
      for (const int v : vertices) {
        if (level_[v] < 0) rest.push_back(v);
      }
      reset_levels(reached);
      for (const int v : vertices) owner_[v] = -1;
      dissect(std::move(reached));
      dissect(std::move(rest));
      return;
    }
    if (depth < 2) {
      reset_levels(reached);
      order_.insert(order_.end(), vertices.begin(), vertices.end());
      return;
    }

    // BFS order is sorted by level; split at the level holding the median
    const int split = std::clamp(level_[reached[reached.size() / 2]], 1, depth - 1);
    std::vector<int> first;
    std::vector<int> second;
    std::vector<int> separator;
    for (const int v : reached) {
      if (level_[v] < split) {
        first.push_back(v);
      } else if (level_[v] > split) {
        second.push_back(v);
      } else {
        separator.push_back(v);
      }
    }
    reset_levels(reached);
    for (const int v : vertices) owner_[v] = -1;
    dissect(std::move(first));
    dissect(std::move(second));
    order_.insert(order_.end(), separator.begin(), separator.end());
  }

  const SparseMatrix& pattern_;
  std::vector<int> owner_;
  std::vector<int> level_;
  std::vector<int> order_;
  int next_id_ = 0;
};

}  // namespace

std::vector<int> nested_dissection_order(const SparseMatrix& pattern) {
  return Dissector(pattern).run();
}

}  // namespace dfmg
