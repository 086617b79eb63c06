// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/enumerate.hpp"

#include <doctest.h>

#include <functional>
#include <set>
#include <unordered_set>

#include "oracles.hpp"
#include "pex/error.hpp"

using namespace pex;

namespace {

// Every multiset of positive integers summing to n, by exhaustive search
// over non-increasing sequences written as sorted vectors.
std::set<std::vector<std::uint64_t>> brute_partitions(std::uint64_t n) {
  std::set<std::vector<std::uint64_t>> out;
  std::function<void(std::uint64_t, std::vector<std::uint64_t>&)> go =
      [&](std::uint64_t remaining, std::vector<std::uint64_t>& parts) {
        if (remaining == 0) {
          std::vector<std::uint64_t> sorted = parts;
          std::sort(sorted.begin(), sorted.end());
          out.insert(sorted);
          return;
        }
        for (std::uint64_t p = 1; p <= remaining; ++p) {
          parts.push_back(p);
          go(remaining - p, parts);
          parts.pop_back();
        }
      };
  std::vector<std::uint64_t> parts;
  go(n, parts);
  return out;
}

std::vector<std::uint64_t> parts_of(const PartitionStat& rho) {
  std::vector<std::uint64_t> out;
  for (const auto& [t, r] : rho.entries()) out.insert(out.end(), r, t);
  return out;
}

}  // namespace

TEST_CASE("small partition lists") {
  const PartitionList zero = enumerate_partitions(0);
  REQUIRE(zero.partitions.size() == 1);
  CHECK(zero.partitions[0] == PartitionStat{});
  const PartitionList one = enumerate_partitions(1);
  REQUIRE(one.partitions.size() == 1);
  CHECK(one.partitions[0] == PartitionStat{{1, 1}});

  const PartitionList four = enumerate_partitions(4);
  CHECK(four.partitions.size() == 5);
  std::set<std::vector<std::uint64_t>> seen;
  for (const auto& rho : four.partitions) seen.insert(parts_of(rho));
  CHECK(seen == brute_partitions(4));
  CHECK(four.partitions.front() == PartitionStat{{4, 1}});
  CHECK(four.partitions.back() == PartitionStat{{1, 4}});
}

TEST_CASE("partition counts follow the partition function") {
  const std::vector<std::uint64_t> expected{1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
  for (unsigned n = 1; n <= 10; ++n) {
    CHECK(enumerate_partitions(n).partitions.size() == expected[n - 1]);
    CHECK(oracle::partition_count(n) == expected[n - 1]);
  }
  for (unsigned n = 11; n <= 25; ++n) {
    CHECK(enumerate_partitions(n).partitions.size() == oracle::partition_count(n));
  }
}

TEST_CASE("every enumerated partition is valid and unique") {
  for (unsigned n = 0; n <= 12; ++n) {
    const PartitionList list = enumerate_partitions(n);
    std::set<std::vector<std::uint64_t>> seen;
    for (const auto& rho : list.partitions) {
      CHECK(rho.n() == n);
      CHECK(seen.insert(parts_of(rho)).second);
    }
    if (n <= 8) CHECK(seen == brute_partitions(n));
  }
}

TEST_CASE("partition cap") {
  CHECK(enumerate_partitions(40).partitions.size() == oracle::partition_count(40));
  CHECK_THROWS_AS(enumerate_partitions(41), CapExceeded);
  CHECK_THROWS_AS(enumerate_partitions(10, 9), CapExceeded);
}

TEST_CASE("labeling space examples") {
  CHECK(enumerate_labelings(3, 2).size() == 8);
  const LabelingSpace empty = enumerate_labelings(0, 5);
  CHECK(empty.size() == 1);
  CHECK(empty.begin()->size() == 0);
  CHECK(std::next(empty.begin()) == empty.end());

  const LabelingSpace space = enumerate_labelings(2, 3);
  CHECK(space.size() == 9);
  std::vector<Labeling> all(space.begin(), space.end());
  REQUIRE(all.size() == 9);
  CHECK(all.front() == Labeling{{0, 0}});
  CHECK(all[1] == Labeling{{0, 1}});
  CHECK(all.back() == Labeling{{2, 2}});
  CHECK(std::is_sorted(all.begin(), all.end()));
}

TEST_CASE("labeling iteration is exhaustive and duplicate free") {
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{4, 3}, {6, 4}, {13, 2}, {1, 7}}) {
    const LabelingSpace space(n, k);
    std::unordered_set<std::string> seen;
    std::uint64_t count = 0;
    for (auto it = space.begin(); it != space.end(); ++it) {
      CHECK(it.index() == count);
      CHECK(*it == space.at(count));
      std::string key;
      for (std::size_t c : it->classes) key += static_cast<char>('a' + c);
      CHECK(seen.insert(key).second);
      ++count;
    }
    CHECK(count == space.size());
  }
}

TEST_CASE("labeling cap") {
  CHECK_THROWS_AS(LabelingSpace(20, 2), CapExceeded);  // 2^20 > 10^6
  CHECK_NOTHROW(LabelingSpace(19, 2));
  CHECK_THROWS_AS(LabelingSpace(64, 3), CapExceeded);
  CHECK_THROWS_AS(LabelingSpace(3, 2, 7), CapExceeded);
  CHECK_THROWS_AS(LabelingSpace(1, 0), DomainError);
  CHECK_THROWS_AS(LabelingSpace(2, 2).at(4), DomainError);
}
