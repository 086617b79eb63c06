// Apache License, Version 2.0, refer to LICENSE.txt

// Exhaustive enumeration of integer partitions and of joint test labelings.
// Both are guarded by caps: exceeding one throws CapExceeded instead of
// truncating.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <vector>

#include "pex/esf.hpp"

namespace pex {

inline constexpr std::uint64_t kDefaultPartitionCap = 40;
inline constexpr std::uint64_t kDefaultLabelingCap = 1'000'000;

struct PartitionList {
  std::uint64_t n = 0;
  std::vector<PartitionStat> partitions;
};

// Every rho with sum_t t * rho_t == n, largest part first: for n = 4 the
// order is 4, 3+1, 2+2, 2+1+1, 1+1+1+1.
PartitionList enumerate_partitions(std::uint64_t n, std::uint64_t cap = kDefaultPartitionCap);

// Assignment of each test item to a class, 0-based class indices.
struct Labeling {
  std::vector<std::size_t> classes;

  std::size_t size() const noexcept { return classes.size(); }
  std::size_t operator[](std::size_t i) const { return classes[i]; }

  friend bool operator==(const Labeling&, const Labeling&) = default;
  friend auto operator<=>(const Labeling&, const Labeling&) = default;
};

// All k^n labelings in lexicographic order (last item varies fastest).
// Index i maps to the labeling whose base-k digits spell i, which lets W
// workers shard the space deterministically by i mod W.
class LabelingSpace {
 public:
  LabelingSpace(std::size_t n, std::size_t k, std::uint64_t cap = kDefaultLabelingCap);

  std::size_t items() const noexcept { return n_; }
  std::size_t classes() const noexcept { return k_; }
  std::uint64_t size() const noexcept { return size_; }

  Labeling at(std::uint64_t index) const;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Labeling;
    using difference_type = std::ptrdiff_t;
    using pointer = const Labeling*;
    using reference = const Labeling&;

    iterator() = default;

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    std::uint64_t index() const noexcept { return index_; }

    friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

   private:
    friend class LabelingSpace;
    iterator(const LabelingSpace* space, std::uint64_t index);

    const LabelingSpace* space_ = nullptr;
    std::uint64_t index_ = 0;
    Labeling current_;
  };

  iterator begin() const { return iterator(this, 0); }
  iterator end() const { return iterator(this, size_); }

 private:
  std::size_t n_;
  std::size_t k_;
  std::uint64_t size_;
};

LabelingSpace enumerate_labelings(std::size_t n, std::size_t k,
                                  std::uint64_t cap = kDefaultLabelingCap);

}  // namespace pex
