#include "conefrac/partition.hpp"

#include <sstream>
#include <stdexcept>

namespace conefrac {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
  for (size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] <= 0) throw std::invalid_argument("Partition: parts must be positive");
    if (i > 0 && parts_[i] > parts_[i - 1])
      throw std::invalid_argument("Partition: parts must be non-increasing");
    weight_ += parts_[i];
  }
}

int Partition::part(int j) const {
  return (j >= 1 && j <= num_parts()) ? parts_[j - 1] : 0;
}

long long Partition::rho() const {
  long long acc = 0;
  for (int i = 0; i < num_parts(); ++i)
    acc += static_cast<long long>(parts_[i]) * (parts_[i] - (i + 1));
  return acc;
}

std::string Partition::label() const {
  if (parts_.empty()) return "()";
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < parts_.size(); ++i) {
    if (i) os << ',';
    os << parts_[i];
  }
  os << ')';
  return os.str();
}

bool Partition::lex_less(const Partition& o) const {
  const int m = std::max(num_parts(), o.num_parts());
  for (int j = 1; j <= m; ++j) {
    if (part(j) != o.part(j)) return part(j) < o.part(j);
  }
  return false;
}

namespace {

void enumerate_rec(int remaining, int max_part, int max_parts, std::vector<int>& acc,
                   std::vector<Partition>& out) {
  if (remaining == 0) {
    out.emplace_back(acc);
    return;
  }
  if (max_parts == 0) return;
  for (int next = std::min(remaining, max_part); next >= 1; --next) {
    acc.push_back(next);
    enumerate_rec(remaining - next, next, max_parts - 1, acc, out);
    acc.pop_back();
  }
}

}  // namespace

std::vector<Partition> enumerate_partitions(int k, int max_parts) {
  if (k < 0) throw std::invalid_argument("enumerate_partitions: negative weight");
  std::vector<Partition> out;
  std::vector<int> acc;
  enumerate_rec(k, k, max_parts, acc, out);
  return out;  // descending first parts => reverse-lexicographic order
}

}  // namespace conefrac
