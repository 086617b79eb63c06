// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/classifiers.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "pex/error.hpp"

using namespace pex;

namespace {

Labeling labels(std::vector<std::size_t> v) { return Labeling{std::move(v)}; }

double exp_sum(const PosteriorTable& table) {
  long double sum = 0;
  for (const auto& e : table.entries) sum += std::exp(static_cast<long double>(e.log_posterior));
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("empty test set scores zero") {
  const auto train = LabeledDataset::single_feature({{{1, 2}}, {{2, 1}}});
  const TestSet test;
  const Labeling none;
  CHECK(simultaneous_log_pred(train, test, none, Psi(1)) == 0.0);
  CHECK(marginal_si_log_pred(train, test, none, Psi(1)) == 0.0);
  CHECK(marginal_se_log_pred(train, test, none, Psi(1)) == 0.0);
  CHECK(classify_marginal(train, test, Psi(1)).size() == 0);
  const PosteriorTable table = posterior_over_labelings(train, test, Psi(1), Predictive::simultaneous);
  REQUIRE(table.entries.size() == 1);
  CHECK(table.entries[0].log_posterior == doctest::Approx(0.0));
  const RatioDecomposition parts = decompose_ratio(train, test, none, Psi(1), MarginalKind::si);
  CHECK(parts.log_coeff == 0.0);
  CHECK(parts.log_suff == 0.0);
}

TEST_CASE("simultaneous score of a single new species") {
  const auto train = LabeledDataset::single_feature({{{1, 1}}});
  const auto test = TestSet::single_feature({7});
  CHECK(simultaneous_log_pred(train, test, labels({0}), Psi(1)) ==
        doctest::Approx(std::log(0.5)));
}

TEST_CASE("frozen two-class instance") {
  // Class 0 {1:2, 2:1}, class 1 {3:1}, test [1, 4, 1] labeled (0, 1, 0),
  // psi = 3/2. Values from exact rational chain-rule products.
  const auto train = LabeledDataset::single_feature({{{1, 2}, {2, 1}}, {{3, 1}}});
  const auto test = TestSet::single_feature({1, 4, 1});
  const Labeling s = labels({0, 1, 0});
  CHECK(simultaneous_log_pred(train, test, s, Psi(1.5)) ==
        doctest::Approx(-1.9278916435526349904).epsilon(1e-14));
  CHECK(marginal_si_log_pred(train, test, s, Psi(1.5)) ==
        doctest::Approx(-2.1326860561986482111).epsilon(1e-14));
}

TEST_CASE("simultaneous equals the per-class chain rule") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 3;
    const std::size_t n = rng() % 6;
    const auto inst = oracle::random_instance(rng, k, n, 12);
    const auto s = oracle::random_labels(rng, k, n);
    for (double psi : {0.1, 1.0, 5.0}) {
      CHECK(simultaneous_log_pred(inst.dataset(), inst.test_set(), labels(s), Psi(psi)) ==
            doctest::Approx(oracle::simultaneous_brute(inst.train, inst.test, s, psi))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("marginal examples") {
  const auto train = LabeledDataset::single_feature({{{1, 3}, {2, 2}}});
  const auto test = TestSet::single_feature({1, 9});
  CHECK(marginal_si_log_pred(train, test, labels({0, 0}), Psi(1)) ==
        doctest::Approx(std::log(3.0 / 6) + std::log(1.0 / 6)));

  const auto single = TestSet::single_feature({2});
  CHECK(marginal_si_log_pred(train, single, labels({0}), Psi(0.4)) ==
        simultaneous_log_pred(train, single, labels({0}), Psi(0.4)));
}

TEST_CASE("marginal scores match closed-form products and each other") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    const std::size_t n = rng() % 9;
    const auto inst = oracle::random_instance(rng, k, n, 30);
    const auto s = oracle::random_labels(rng, k, n);
    const double psi = std::vector<double>{0.1, 1.0, 5.0}[rng() % 3];
    const double si = marginal_si_log_pred(inst.dataset(), inst.test_set(), labels(s), Psi(psi));
    const double se = marginal_se_log_pred(inst.dataset(), inst.test_set(), labels(s), Psi(psi));
    CHECK(std::abs(si - se) <= 1e-12);
    CHECK(si == doctest::Approx(oracle::marginal_brute(inst.train, inst.test, s, psi)).epsilon(1e-12));
  }
}

TEST_CASE("marginal_se: unassigned classes contribute unit factors") {
  const auto train = LabeledDataset::single_feature({{{1, 4}}, {{1, 1}, {2, 3}}, {{3, 2}}});
  const auto test = TestSet::single_feature({2});
  const double expected = std::log(3.0 / (2.0 + 4.0));
  CHECK(marginal_se_log_pred(train, test, labels({1}), Psi(2)) == doctest::Approx(expected));
  const auto one_class = LabeledDataset::single_feature({{{1, 1}, {2, 3}}});
  CHECK(marginal_se_log_pred(train, test, labels({1}), Psi(2)) ==
        marginal_se_log_pred(one_class, test, labels({0}), Psi(2)));
}

TEST_CASE("input validation") {
  const auto train = LabeledDataset::single_feature({{{1, 1}}, {{2, 1}}});
  const auto test = TestSet::single_feature({1, 2});
  CHECK_THROWS_AS(simultaneous_log_pred(train, test, labels({0}), Psi(1)), DomainError);
  CHECK_THROWS_AS(simultaneous_log_pred(train, test, labels({0, 2}), Psi(1)), DomainError);
  CHECK_THROWS_AS(classify_marginal(train, test, ClassPsi(std::vector<Psi>{Psi(1)})), DomainError);
  CHECK_THROWS_AS(classify_marginal(train, TestSet(2), Psi(1)), DomainError);
}

TEST_CASE("posterior normalization and symmetry") {
  const auto twins = LabeledDataset::single_feature({{{1, 2}, {2, 1}}, {{1, 2}, {2, 1}}});
  const PosteriorTable sym = posterior_over_labelings(twins, TestSet::single_feature({1}), Psi(1),
                                                      Predictive::simultaneous);
  REQUIRE(sym.entries.size() == 2);
  CHECK(std::exp(sym.entries[0].log_posterior) == doctest::Approx(0.5));
  CHECK(std::exp(sym.entries[1].log_posterior) == doctest::Approx(0.5));

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng, 2, 3, 10);
    for (Predictive p : {Predictive::simultaneous, Predictive::marginal_si, Predictive::marginal_se}) {
      const PosteriorTable table =
          posterior_over_labelings(inst.dataset(), inst.test_set(), Psi(1.3), p);
      CHECK(table.entries.size() == 8);
      CHECK(std::abs(exp_sum(table) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("posterior does not depend on the worker count") {
  std::mt19937_64 rng(29);
  const auto inst = oracle::random_instance(rng, 3, 7, 20);
  const PosteriorTable one = posterior_over_labelings(inst.dataset(), inst.test_set(), Psi(0.8),
                                                      Predictive::simultaneous, kDefaultLabelingCap, 1);
  const PosteriorTable four = posterior_over_labelings(inst.dataset(), inst.test_set(), Psi(0.8),
                                                       Predictive::simultaneous, kDefaultLabelingCap, 4);
  REQUIRE(one.entries.size() == four.entries.size());
  for (std::size_t i = 0; i < one.entries.size(); ++i) {
    CHECK(one.entries[i].labeling == four.entries[i].labeling);
    CHECK(std::abs(one.entries[i].log_posterior - four.entries[i].log_posterior) <= 1e-12);
  }
}

TEST_CASE("posterior cap propagates") {
  const auto train = LabeledDataset::single_feature({{{1, 1}}, {{2, 1}}});
  const auto test = TestSet::single_feature(std::vector<SpeciesId>(21, 1));
  CHECK_THROWS_AS(posterior_over_labelings(train, test, Psi(1), Predictive::simultaneous),
                  CapExceeded);
  CHECK_THROWS_AS(classify_simultaneous(train, test, Psi(1), SearchMode::exact), CapExceeded);
  CHECK(classify_simultaneous(train, test, Psi(1), SearchMode::greedy).approximate);
}

TEST_CASE("classify_marginal") {
  const auto train = LabeledDataset::single_feature({{{1, 5}}, {{2, 5}}});
  CHECK(classify_marginal(train, TestSet::single_feature({1}), Psi(1)) == labels({0}));
  CHECK(classify_marginal(train, TestSet::single_feature({2}), Psi(1)) == labels({1}));
  // Unseen species: both classes give psi / (psi + 5); tie goes to class 0.
  CHECK(classify_marginal(train, TestSet::single_feature({3}), Psi(1)) == labels({0}));
}

TEST_CASE("classify_simultaneous single item agrees with marginal") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng, 3, 1, 15);
    const Labeling marginal = classify_marginal(inst.dataset(), inst.test_set(), Psi(1.1));
    CHECK(classify_simultaneous(inst.dataset(), inst.test_set(), Psi(1.1), SearchMode::exact)
              .labeling == marginal);
    CHECK(classify_simultaneous(inst.dataset(), inst.test_set(), Psi(1.1), SearchMode::greedy)
              .labeling == marginal);
  }
}

TEST_CASE("exact simultaneous dominates greedy and matches brute force") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 1 + rng() % 3;
    const std::size_t n = 1 + rng() % 5;
    const auto inst = oracle::random_instance(rng, k, n, 12);
    const double psi = 0.7;
    const auto exact = classify_simultaneous(inst.dataset(), inst.test_set(), Psi(psi), SearchMode::exact);
    const auto greedy = classify_simultaneous(inst.dataset(), inst.test_set(), Psi(psi), SearchMode::greedy);
    CHECK_FALSE(exact.approximate);
    CHECK(greedy.approximate);
    CHECK(greedy.log_predictive <= exact.log_predictive + 1e-12);

    // Brute force over base-k integers with the chain-rule oracle.
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= k;
    double best = -INFINITY;
    std::vector<std::size_t> best_labels;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      std::vector<std::size_t> s(n);
      std::uint64_t rem = idx;
      for (std::size_t i = n; i-- > 0;) {
        s[i] = rem % k;
        rem /= k;
      }
      const double v = oracle::simultaneous_brute(inst.train, inst.test, s, psi);
      if (best_labels.empty() || v > best + 1e-12 * std::max(1.0, std::abs(best))) {
        best = v;
        best_labels = s;
      }
    }
    CHECK(exact.labeling.classes == best_labels);
    CHECK(exact.log_predictive == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("symmetric instance returns the lexicographically smallest maximizer") {
  const auto train = LabeledDataset::single_feature({{{1, 3}}, {{1, 3}}});
  const auto test = TestSet::single_feature({1, 1});
  const auto exact = classify_simultaneous(train, test, Psi(1), SearchMode::exact);
  // (0,0) and (1,1) are tied maxima.
  CHECK(exact.labeling == labels({0, 0}));
}

TEST_CASE("label permutation equivariance") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    // Distinct class sizes rule out ties between classes.
    oracle::Instance inst;
    for (std::uint64_t c = 0; c < 3; ++c) {
      oracle::Table t;
      for (std::uint64_t j = 0; j < 3 + 4 * c; ++j) ++t[1 + rng() % 5];
      inst.train.push_back(t);
    }
    for (int i = 0; i < 4; ++i) inst.test.push_back(1 + rng() % 6);
    std::vector<std::size_t> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    oracle::Instance permuted = inst;
    for (std::size_t c = 0; c < 3; ++c) permuted.train[perm[c]] = inst.train[c];

    const Labeling a = classify_marginal(inst.dataset(), inst.test_set(), Psi(1.2));
    const Labeling b = classify_marginal(permuted.dataset(), permuted.test_set(), Psi(1.2));
    const auto sa = classify_simultaneous(inst.dataset(), inst.test_set(), Psi(1.2), SearchMode::exact);
    const auto sb = classify_simultaneous(permuted.dataset(), permuted.test_set(), Psi(1.2), SearchMode::exact);
    std::vector<std::size_t> mapped(4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(b[i] == perm[a[i]]);
      mapped[i] = perm[sa.labeling[i]];
    }
    // Simultaneous maxima can tie, so compare scores rather than labels.
    CHECK(sb.log_predictive == doctest::Approx(sa.log_predictive).epsilon(1e-12));
    CHECK(simultaneous_log_pred(permuted.dataset(), permuted.test_set(), labels(mapped), Psi(1.2)) ==
          doctest::Approx(sa.log_predictive).epsilon(1e-12));
  }
}

TEST_CASE("simultaneous factorizes over classes") {
  const auto train = LabeledDataset::single_feature({{{1, 3}, {2, 1}}, {{2, 2}}, {{3, 4}}});
  const auto test = TestSet::single_feature({1, 2, 2, 5});
  const Labeling s = labels({0, 1, 1, 2});
  const auto factors = simultaneous_class_log_factors(train, test, s, Psi(0.9));
  CHECK(std::accumulate(factors.begin(), factors.end(), 0.0) ==
        doctest::Approx(simultaneous_log_pred(train, test, s, Psi(0.9))));

  // Moving another item into class 1 only changes class 1's factor.
  const auto bigger = TestSet::single_feature({1, 2, 2, 5, 2});
  const auto after = simultaneous_class_log_factors(train, bigger, labels({0, 1, 1, 2, 1}), Psi(0.9));
  CHECK(after[0] == factors[0]);
  CHECK(after[2] == factors[2]);
  CHECK(after[1] != factors[1]);
}

TEST_CASE("coefficient ratio") {
  for (double psi : {0.1, 1.0, 5.0}) {
    CHECK(log_coefficient_ratio(50, 0, Psi(psi)) == 0.0);
    CHECK(log_coefficient_ratio(50, 1, Psi(psi)) == 0.0);
  }
  CHECK(log_coefficient_ratio(1000, 8, Psi(1)) == 0.0);
  // 50-digit evaluations of the two-fraction product.
  CHECK(log_coefficient_ratio(100, 8, Psi(5)) ==
        doctest::Approx(0.010074563397661721762).epsilon(1e-13));
  CHECK(log_coefficient_ratio(100, 8, Psi(0.1)) ==
        doctest::Approx(-0.0023751259270249719721).epsilon(1e-13));
  CHECK(log_coefficient_ratio(1000000, 8, Psi(5)) ==
        doctest::Approx(1.1199876801164789147e-10).epsilon(1e-9));
  CHECK(log_coefficient_ratio(1000000, 8, Psi(0.1)) ==
        doctest::Approx(-2.5199846280941465932e-11).epsilon(1e-9));
  CHECK(log_coefficient_ratio(3, 4, Psi(2)) == doctest::Approx(0.19942702469689371365).epsilon(1e-14));
  CHECK(log_coefficient_ratio(4, 6, Psi(0.5)) ==
        doctest::Approx(-0.19269299978070954444).epsilon(1e-14));
}

TEST_CASE("ratio decomposition identity") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 4;
    const std::size_t n = rng() % 8;
    const auto inst = oracle::random_instance(rng, k, n, 40);
    const auto s = oracle::random_labels(rng, k, n);
    const double psi = std::vector<double>{0.1, 1.0, 5.0}[rng() % 3];
    const auto train = inst.dataset();
    const auto test = inst.test_set();
    const double sim = simultaneous_log_pred(train, test, labels(s), Psi(psi));
    for (MarginalKind which : {MarginalKind::si, MarginalKind::se}) {
      const double marg = which == MarginalKind::si
                              ? marginal_si_log_pred(train, test, labels(s), Psi(psi))
                              : marginal_se_log_pred(train, test, labels(s), Psi(psi));
      const RatioDecomposition parts = decompose_ratio(train, test, labels(s), Psi(psi), which);
      CHECK(std::abs(parts.log_coeff + parts.log_suff - (sim - marg)) <= 1e-12);
      double coeff = 0.0, suff = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        coeff += parts.per_class[c].log_coeff;
        suff += parts.per_class[c].log_suff;
        CHECK(parts.per_class[c].train_size == train.class_size(c));
        if (parts.per_class[c].test_size <= 1) CHECK(parts.per_class[c].log_coeff == 0.0);
      }
      CHECK(coeff == doctest::Approx(parts.log_coeff));
      CHECK(suff == doctest::Approx(parts.log_suff));
    }
  }
}

TEST_CASE("coefficient vanishes monotonically as m_c grows") {
  for (double psi : {0.1, 0.5, 2.0, 5.0}) {
    for (std::uint64_t n = 2; n <= 8; ++n) {
      double prev = INFINITY;
      for (std::uint64_t m : {100ULL, 1000ULL, 10000ULL, 100000ULL, 1000000ULL}) {
        const double v = std::abs(log_coefficient_ratio(m, n, Psi(psi)));
        CHECK(v < prev);
        prev = v;
      }
      CHECK(prev < 1e-3);
    }
  }
}

TEST_CASE("multi-feature items multiply per-feature predictives") {
  LabeledDataset train(2, 2);
  const std::vector<std::vector<SpeciesId>> rows0{{1, 1}, {1, 2}, {2, 2}};
  const std::vector<std::vector<SpeciesId>> rows1{{3, 1}, {3, 1}};
  for (const auto& r : rows0) train.add(0, r);
  for (const auto& r : rows1) train.add(1, r);
  TestSet test(2);
  const std::vector<SpeciesId> a{1, 2}, b{3, 1};
  test.add(a);
  test.add(b);
  const Labeling s = labels({0, 1});

  const auto f0 = LabeledDataset::single_feature({train.counts(0, 0), train.counts(1, 0)});
  const auto f1 = LabeledDataset::single_feature({train.counts(0, 1), train.counts(1, 1)});
  const auto t0 = TestSet::single_feature({1, 3});
  const auto t1 = TestSet::single_feature({2, 1});
  CHECK(simultaneous_log_pred(train, test, s, Psi(1.4)) ==
        doctest::Approx(simultaneous_log_pred(f0, t0, s, Psi(1.4)) +
                        simultaneous_log_pred(f1, t1, s, Psi(1.4))));
  CHECK(marginal_si_log_pred(train, test, s, Psi(1.4)) ==
        doctest::Approx(marginal_si_log_pred(f0, t0, s, Psi(1.4)) +
                        marginal_si_log_pred(f1, t1, s, Psi(1.4))));
  const auto parts = decompose_ratio(train, test, s, Psi(1.4), MarginalKind::si);
  CHECK(parts.log_coeff + parts.log_suff ==
        doctest::Approx(simultaneous_log_pred(train, test, s, Psi(1.4)) -
                        marginal_si_log_pred(train, test, s, Psi(1.4))));
}

TEST_CASE("per-class psi") {
  const auto train = LabeledDataset::single_feature({{{1, 2}}, {{1, 2}}});
  const auto test = TestSet::single_feature({5});
  // New species: psi_c / (psi_c + 2), so the larger psi wins.
  const ClassPsi psi({Psi(0.5), Psi(4.0)});
  CHECK(classify_marginal(train, test, psi) == labels({1}));
  CHECK(marginal_si_log_pred(train, test, labels({1}), psi) == doctest::Approx(std::log(4.0 / 6.0)));
}
