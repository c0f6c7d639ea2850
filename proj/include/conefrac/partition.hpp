#pragma once

#include <string>
#include <vector>

namespace conefrac {

// Integer partition K = (k1 >= k2 >= ... >= km > 0).  The empty partition
// (weight 0) is Partition{}.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> parts);

  const std::vector<int>& parts() const { return parts_; }
  int weight() const { return weight_; }
  int num_parts() const { return static_cast<int>(parts_.size()); }
  int part(int j) const;  // 1-based, 0 beyond the last part
  bool empty() const { return parts_.empty(); }

  // rho(K) = sum_i k_i (k_i - i); drives the Laplace-Beltrami recurrence.
  long long rho() const;

  // "(2,1)" style label used in reports and CSV dumps.
  std::string label() const;

  bool operator==(const Partition& o) const { return parts_ == o.parts_; }
  // Lexicographic, e.g. (3) > (2,1) > (1,1,1).
  bool lex_less(const Partition& o) const;

 private:
  std::vector<int> parts_;
  int weight_ = 0;
};

// All partitions of k with at most max_parts parts, in reverse-lexicographic
// order (largest first).  k = 0 yields the empty partition.
std::vector<Partition> enumerate_partitions(int k, int max_parts);

}  // namespace conefrac
