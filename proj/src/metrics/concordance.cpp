#include "chainsurv/metrics/concordance.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "chainsurv/core/errors.hpp"

namespace chainsurv::metrics {

namespace {

class FenwickTree {
 public:
  explicit FenwickTree(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // count of inserted ranks < i
  std::uint64_t prefix(std::size_t i) const {
    std::uint64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::uint64_t> tree_;
};

}  // namespace

ConcordanceCounts concordance_counts(std::span<const double> scores, std::span<const double> times,
                                     std::span<const int> censorship) {
  const std::size_t n = scores.size();
  if (times.size() != n || censorship.size() != n) throw ContractViolation("c_index: input lengths differ");
  if (n < 2) throw ValidationError("c_index: need at least 2 samples");

  std::vector<double> levels(scores.begin(), scores.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    rank[i] = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), scores[i]) - levels.begin());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });

  // Walk from the latest time down; the tree holds every sample with a
  // strictly later time than the current group.
  FenwickTree later(levels.size());
  std::uint64_t inserted = 0;
  ConcordanceCounts counts;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    while (end < n && times[order[end]] == times[order[g]]) ++end;
    for (std::size_t k = g; k < end; ++k) {
      const std::size_t i = order[k];
      if (censorship[i] != 0) continue;
      const std::uint64_t below = later.prefix(rank[i]);
      const std::uint64_t tied = later.prefix(rank[i] + 1) - below;
      counts.comparable += inserted;
      counts.half_units += 2 * below + tied;
    }
    for (std::size_t k = g; k < end; ++k) later.add(rank[order[k]]);
    inserted += end - g;
    g = end;
  }
  if (counts.comparable == 0) throw ValidationError("c_index: no comparable pairs");
  return counts;
}

double c_index(std::span<const double> scores, std::span<const double> times, std::span<const int> censorship) {
  return concordance_counts(scores, times, censorship).value();
}

}  // namespace chainsurv::metrics
