#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include "topiczero/error.hpp"
#include "topiczero/topic_model.hpp"

namespace topiczero::topic_model {
namespace {

// Upper-triangular distance matrix without the diagonal.
class CondensedMatrix {
 public:
  explicit CondensedMatrix(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}

  double& operator()(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return d_[i * n_ - i * (i + 1) / 2 + (j - i - 1)];
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Merge {
  std::size_t a, b;
  double height;
};

// Nearest-neighbour chain with Lance-Williams updates for average linkage.
// Average linkage is reducible, so the chain produces the same dendrogram
// as the naive closest-pair loop in O(n^2).
std::vector<Merge> average_linkage(std::span<const Embedding> e) {
  const std::size_t n = e.size();
  CondensedMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist(i, j) = std::clamp(1.0 - embedding::cosine_similarity(e[i], e[j]), 0.0, 2.0);
    }
  }

  std::vector<std::size_t> size(n, 1);
  std::vector<double> height(n, 0.0);
  std::vector<char> active(n, 1);
  std::vector<std::size_t> chain;
  std::vector<Merge> merges;
  merges.reserve(n - 1);
  constexpr auto none = std::numeric_limits<std::size_t>::max();

  std::size_t remaining = n;
  while (remaining > 1) {
    if (chain.empty()) {
      chain.push_back(static_cast<std::size_t>(std::find(active.begin(), active.end(), 1) -
                                               active.begin()));
    }
    const std::size_t a = chain.back();
    const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : none;
    std::size_t best = prev;
    double best_d = prev == none ? std::numeric_limits<double>::infinity() : dist(a, prev);
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      const double d = dist(a, c);
      if (d < best_d) {
        best = c;
        best_d = d;
      }
    }
    if (best != prev) {
      chain.push_back(best);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    const std::size_t x = std::min(a, prev);
    const std::size_t y = std::max(a, prev);
    const double sx = static_cast<double>(size[x]);
    const double sy = static_cast<double>(size[y]);
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == x || c == y) continue;
      dist(x, c) = (sx * dist(x, c) + sy * dist(y, c)) / (sx + sy);
    }
    // Cumulative max keeps heights monotone despite rounding, so any cut
    // selects whole subtrees.
    const double h = std::max({best_d, height[x], height[y]});
    height[x] = h;
    active[y] = 0;
    size[x] += size[y];
    merges.push_back({x, y, h});
    --remaining;
  }
  return merges;
}

struct Registry {
  std::mutex mutex;
  std::map<std::string, ClustererFactory> factories;

  Registry() {
    factories["threshold-agglomerative"] = [] { return std::make_unique<AgglomerativeClusterer>(); };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

std::vector<int> filter_small_clusters(std::span<const int> raw, std::size_t min_size) {
  std::map<int, std::size_t> counts;
  for (int c : raw) {
    if (c != kOutlier) ++counts[c];
  }
  std::map<int, int> renumber;
  std::vector<int> out(raw.size(), kOutlier);
  int next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int c = raw[i];
    if (c == kOutlier || counts[c] < min_size) continue;
    auto [it, inserted] = renumber.emplace(c, next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return out;
}

std::vector<int> AgglomerativeClusterer::cluster(std::span<const Embedding> embeddings,
                                                 const TopicModelConfig& config) const {
  const std::size_t n = embeddings.size();
  if (n == 0) throw InputError("cannot cluster an empty set of embeddings");
  for (const auto& e : embeddings) {
    if (e.dim() != embeddings[0].dim()) throw InputError("embeddings differ in dimension");
  }
  std::vector<int> raw(n, 0);
  if (n > 1) {
    DisjointSets sets(n);
    for (const auto& m : average_linkage(embeddings)) {
      if (m.height < config.distance_threshold) sets.unite(m.a, m.b);
    }
    for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(sets.find(i));
  }
  return filter_small_clusters(raw, config.min_topic_size);
}

void register_clusterer(const std::string& name, ClustererFactory factory) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.factories[name] = std::move(factory);
}

std::unique_ptr<Clusterer> make_clusterer(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.factories.find(name);
  if (it == r.factories.end()) throw InputError("unknown clustering method '" + name + "'");
  return it->second();
}

std::vector<int> cluster(std::span<const Embedding> embeddings, const TopicModelConfig& config) {
  return make_clusterer(config.clustering)->cluster(embeddings, config);
}

}  // namespace topiczero::topic_model
