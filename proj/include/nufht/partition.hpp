#ifndef NUFHT_PARTITION_HPP
#define NUFHT_PARTITION_HPP

// Adaptive subdivision of the m x n kernel matrix A(j, k) = J_nu(w_j r_k) into
// rectangles where every product w_j r_k lies on one side of the crossover z.
//
// With both inputs sorted ascending and nonnegative, the largest product in a
// rectangle sits at its lower-right corner and the smallest at its upper-left,
// so a block's kind is decided by two corner products. A mixed block is split
// at a pair (j, k) with w_j r_k <= z < w_j r_{k+1}: the upper-left quadrant is
// then entirely local, the lower-right entirely asymptotic, and the other two
// quadrants are queued for further splitting.
//
// Indices are 0-based and inclusive throughout.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <iterator>
#include <limits>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nufht {

enum class BlockKind { local, asymptotic, direct };

inline const char* block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::local:
      return "local";
    case BlockKind::asymptotic:
      return "asymptotic";
    case BlockKind::direct:
      return "direct";
  }
  return "unknown";
}

struct Block {
  std::size_t j0 = 0;
  std::size_t j1 = 0;
  std::size_t k0 = 0;
  std::size_t k1 = 0;
  BlockKind kind = BlockKind::direct;

  std::size_t rows() const { return j1 - j0 + 1; }
  std::size_t cols() const { return k1 - k0 + 1; }
  std::size_t area() const { return rows() * cols(); }
};

struct Partition {
  std::vector<Block> blocks;
  std::size_t m = 0;
  std::size_t n = 0;
  double z = 0.0;
  std::size_t min_size = 1024;
  std::size_t levels = 0;  // worklist generations used

  std::size_t area(BlockKind kind) const {
    std::size_t total = 0;
    for (const auto& b : blocks) {
      if (b.kind == kind) total += b.area();
    }
    return total;
  }
};

// Zero means an exhaustive scan over every feasible row.
inline constexpr std::size_t kDefaultSplitCandidates = 16;

namespace detail {

// First k in [k0, k1 + 1) with w r_k > z; products are nondecreasing in k.
inline std::size_t first_asymptotic_column(std::span<const double> points, std::size_t k0, std::size_t k1,
                                           double w, double z) {
  const auto begin = points.begin() + static_cast<std::ptrdiff_t>(k0);
  const auto end = points.begin() + static_cast<std::ptrdiff_t>(k1 + 1);
  const auto it = std::partition_point(begin, end, [&](double r) { return w * r <= z; });
  return static_cast<std::size_t>(it - points.begin());
}

inline bool block_is_local(std::span<const double> freqs, std::span<const double> points, const Block& b,
                           double z) {
  return freqs[b.j1] * points[b.k1] <= z;
}

inline bool block_is_asymptotic(std::span<const double> freqs, std::span<const double> points, const Block& b,
                                double z) {
  return freqs[b.j0] * points[b.k0] > z;
}

}  // namespace detail

// Number of cells in the two quadrants a split at (j, k) leaves mixed: the
// upper-right (j - j0 + 1)(k1 - k) plus the lower-left (j1 - j)(k - k0 + 1).
inline std::size_t mixed_area(std::size_t j0, std::size_t j1, std::size_t k0, std::size_t k1, std::size_t j,
                              std::size_t k) {
  return (j - j0 + 1) * (k1 - k) + (j1 - j) * (k - k0 + 1);
}

// Split point of a mixed block. For each candidate row j the column is the
// largest k with w_j r_k <= z, and the pair with the smallest mixed_area is
// returned, which leaves the most cells to the two expansions. Ties go to the
// smallest j. Candidates are equispaced over the rows that admit a feasible
// column; candidates == 0 scans all of them.
inline std::pair<std::size_t, std::size_t> split_indices(std::span<const double> freqs,
                                                         std::span<const double> points, std::size_t j0,
                                                         std::size_t j1, std::size_t k0, std::size_t k1, double z,
                                                         std::size_t candidates = kDefaultSplitCandidates) {
  if (j0 > j1 || k0 > k1 || j1 >= freqs.size() || k1 >= points.size()) {
    throw std::invalid_argument("split_indices: block bounds out of range");
  }
  // Rows j0..j_last have w_j r_k0 <= z.
  const auto row_begin = freqs.begin() + static_cast<std::ptrdiff_t>(j0);
  const auto row_end = freqs.begin() + static_cast<std::ptrdiff_t>(j1 + 1);
  const auto row_stop = std::partition_point(row_begin, row_end, [&](double w) { return w * points[k0] <= z; });
  if (row_stop == row_begin) throw std::invalid_argument("split_indices: block has no local entry");
  const std::size_t j_last = static_cast<std::size_t>(row_stop - freqs.begin()) - 1;

  const std::size_t feasible = j_last - j0 + 1;
  const std::size_t count = candidates == 0 ? feasible : std::min(candidates, feasible);

  std::pair<std::size_t, std::size_t> best{0, 0};
  auto best_score = std::numeric_limits<std::size_t>::max();
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = count == 1 ? j0 : j0 + (i * (feasible - 1) + (count - 1) / 2) / (count - 1);
    if (j == previous) continue;
    previous = j;
    const std::size_t k = detail::first_asymptotic_column(points, k0, k1, freqs[j], z) - 1;
    const std::size_t score = mixed_area(j0, j1, k0, k1, j, k);
    if (score < best_score) {
      best_score = score;
      best = {j, k};
    }
  }
  return best;
}

inline Partition subdivide(std::span<const double> freqs, std::span<const double> points, double z,
                           std::size_t min_size = 1024, std::size_t candidates = kDefaultSplitCandidates) {
  Partition p;
  p.m = freqs.size();
  p.n = points.size();
  p.z = z;
  p.min_size = min_size;
  if (p.m == 0 || p.n == 0) return p;

  struct Pending {
    Block block;
    std::size_t level;
  };
  std::deque<Pending> work;
  work.push_back({Block{0, p.m - 1, 0, p.n - 1, BlockKind::direct}, 1});
  while (!work.empty()) {
    auto [b, level] = work.front();
    work.pop_front();
    p.levels = std::max(p.levels, level);
    if (detail::block_is_local(freqs, points, b, z)) {
      b.kind = BlockKind::local;
      p.blocks.push_back(b);
      continue;
    }
    if (detail::block_is_asymptotic(freqs, points, b, z)) {
      b.kind = BlockKind::asymptotic;
      p.blocks.push_back(b);
      continue;
    }
    if (b.area() < min_size) {
      b.kind = BlockKind::direct;
      p.blocks.push_back(b);
      continue;
    }

    const auto [j, k] = split_indices(freqs, points, b.j0, b.j1, b.k0, b.k1, z, candidates);
    p.blocks.push_back(Block{b.j0, j, b.k0, k, BlockKind::local});
    if (j < b.j1 && k < b.k1) p.blocks.push_back(Block{j + 1, b.j1, k + 1, b.k1, BlockKind::asymptotic});
    if (k < b.k1) work.push_back({Block{b.j0, j, k + 1, b.k1, BlockKind::direct}, level + 1});
    if (j < b.j1) work.push_back({Block{j + 1, b.j1, b.k0, k, BlockKind::direct}, level + 1});
  }
  return p;
}

// True iff the blocks are in range, pairwise disjoint, cover the matrix, and
// each satisfies its kind's corner predicate. Disjointness is checked with a
// row sweep over the column intervals of the blocks active on each row.
inline bool validate_partition(const Partition& p, std::span<const double> freqs, std::span<const double> points) {
  if (p.m != freqs.size() || p.n != points.size()) return false;
  std::size_t covered = 0;
  for (const auto& b : p.blocks) {
    if (b.j0 > b.j1 || b.k0 > b.k1 || b.j1 >= p.m || b.k1 >= p.n) return false;
    switch (b.kind) {
      case BlockKind::local:
        if (!detail::block_is_local(freqs, points, b, p.z)) return false;
        break;
      case BlockKind::asymptotic:
        if (!detail::block_is_asymptotic(freqs, points, b, p.z)) return false;
        break;
      case BlockKind::direct:
        if (b.area() >= p.min_size) return false;
        break;
    }
    covered += b.area();
  }
  if (covered != p.m * p.n) return false;

  // Events sorted by row; removals at row r (blocks ending at r - 1) come first.
  struct Event {
    std::size_t row;
    bool insert;
    std::size_t k0;
    std::size_t k1;
  };
  std::vector<Event> events;
  events.reserve(2 * p.blocks.size());
  for (const auto& b : p.blocks) {
    events.push_back({b.j0, true, b.k0, b.k1});
    events.push_back({b.j1 + 1, false, b.k0, b.k1});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.row != b.row) return a.row < b.row;
    return a.insert < b.insert;
  });
  std::set<std::pair<std::size_t, std::size_t>> active;
  for (const auto& e : events) {
    const std::pair<std::size_t, std::size_t> interval{e.k0, e.k1};
    if (!e.insert) {
      active.erase(interval);
      continue;
    }
    const auto next = active.lower_bound(interval);
    if (next != active.end() && next->first <= e.k1) return false;
    if (next != active.begin() && std::prev(next)->second >= e.k0) return false;
    active.insert(interval);
  }
  // Disjoint blocks whose areas add up to m n cover every cell.
  return true;
}

// One "kind j0 j1 k0 k1" line per block.
inline void dump_partition(std::ostream& out, const Partition& p) {
  for (const auto& b : p.blocks) {
    out << block_kind_name(b.kind) << ' ' << b.j0 << ' ' << b.j1 << ' ' << b.k0 << ' ' << b.k1 << '\n';
  }
}

}  // namespace nufht

#endif  // NUFHT_PARTITION_HPP
