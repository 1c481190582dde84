#pragma once

#include <atomic>
#include <cstdint>
#include <functional>

#include "qvol/geometry.hpp"

namespace qvol::reduction {

using geometry::Vector;

// Bit-query oracle for a hidden string s in {0,1}^n of Hamming weight <= 1.
class SearchOracle {
 public:
  /// one_index: position of the single 1 bit, or -1 for the zero string.
  SearchOracle(int n, int one_index) : n_(n), one_(one_index) {
    if (n < 1 || one_index < -1 || one_index >= n)
      throw std::invalid_argument("SearchOracle: bad parameters");
  }
  int n() const { return n_; }
  int query(int i) const {
    if (i < 0 || i >= n_) throw std::invalid_argument("SearchOracle: index out of range");
    queries_.fetch_add(1, std::memory_order_relaxed);
    return i == one_ ? 1 : 0;
  }
  std::uint64_t query_count() const { return queries_.load(std::memory_order_relaxed); }
  int hamming_weight() const { return one_ >= 0 ? 1 : 0; }

 private:
  int n_;
  int one_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

// Membership in the hyper-rectangle X_i [0, 2^{s_i}] with at most one oracle
// query: reject coordinates outside [0,2]; y_i = 1 iff x_i > 1; reject
// |y| >= 2; query s at the single flagged index; accept when |y| = 0.
int mem_s(const Vector& x, const SearchOracle& oracle);

/// Runs a volume estimator against the mem_s body and rounds log2 of the
/// estimate to claim |s| (0 or 1). The estimator receives the membership
/// predicate and the dimension.
int volume_to_search(
    const SearchOracle& oracle,
    const std::function<double(const std::function<int(const Vector&)>&, int)>&
        volume_estimator);

}  // namespace qvol::reduction
