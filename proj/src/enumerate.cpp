// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/enumerate.hpp"

#include <fmt/format.h>

#include "pex/error.hpp"

namespace pex {

namespace {

// Appends every partition of `remaining` into parts <= `max_part` to `out`,
// on top of the multiplicities already collected in `prefix`.
void collect_partitions(std::uint64_t remaining, std::uint64_t max_part,
                        PartitionStat::Map& prefix, std::vector<PartitionStat>& out) {
  if (remaining == 0) {
    out.emplace_back(prefix);
    return;
  }
  for (std::uint64_t part = std::min(remaining, max_part); part >= 1; --part) {
    ++prefix[part];
    collect_partitions(remaining - part, part, prefix, out);
    if (--prefix[part] == 0) prefix.erase(part);
  }
}

}  // namespace

PartitionList enumerate_partitions(std::uint64_t n, std::uint64_t cap) {
  if (n > cap) {
    throw CapExceeded(fmt::format("partition enumeration of n={} exceeds cap {}", n, cap));
  }
  PartitionList list;
  list.n = n;
  PartitionStat::Map prefix;
  collect_partitions(n, n, prefix, list.partitions);
  return list;
}

LabelingSpace::LabelingSpace(std::size_t n, std::size_t k, std::uint64_t cap)
    : n_(n), k_(k), size_(1) {
  if (k == 0) throw DomainError("labelings need at least one class");
  for (std::size_t i = 0; i < n; ++i) {
    if (size_ > cap / k) {
      throw CapExceeded(
          fmt::format("{}^{} labelings exceed the enumeration cap {}", k, n, cap));
    }
    size_ *= k;
  }
  if (size_ > cap) {
    throw CapExceeded(fmt::format("{}^{} labelings exceed the enumeration cap {}", k, n, cap));
  }
}

Labeling LabelingSpace::at(std::uint64_t index) const {
  if (index >= size_) throw DomainError("labeling index out of range");
  Labeling out;
  out.classes.assign(n_, 0);
  for (std::size_t i = n_; i-- > 0;) {
    out.classes[i] = static_cast<std::size_t>(index % k_);
    index /= k_;
  }
  return out;
}

LabelingSpace::iterator::iterator(const LabelingSpace* space, std::uint64_t index)
    : space_(space), index_(index) {
  if (index_ < space_->size()) current_ = space_->at(index_);
}

LabelingSpace::iterator& LabelingSpace::iterator::operator++() {
  ++index_;
  if (index_ >= space_->size()) {
    current_.classes.clear();
    return *this;
  }
  for (std::size_t i = current_.classes.size(); i-- > 0;) {
    if (++current_.classes[i] < space_->classes()) break;
    current_.classes[i] = 0;
  }
  return *this;
}

LabelingSpace enumerate_labelings(std::size_t n, std::size_t k, std::uint64_t cap) {
  return LabelingSpace(n, k, cap);
}

}  // namespace pex
