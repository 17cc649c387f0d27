#include <cmath>
#include <vector>

#include "doctest.h"
#include "gevmiss/errors.hpp"
#include "gevmiss/weights.hpp"
#include "oracles.hpp"

using namespace gevmiss;

TEST_CASE("make_block infers the censoring status") {
  CHECK(make_block(3.0, 100, 0).delta == Censoring::kComplete);
  CHECK(make_block(3.0, 95, 5).delta == Censoring::kUnknown);
  const BlockRecord empty = make_block(std::nullopt, 0, 100);
  CHECK_FALSE(empty.max.has_value());
  CHECK_FALSE(empty.usable());
  CHECK(make_block(1.0, 0, 100).max.has_value() == false);
  CHECK(make_block(2.0, 60, 40).size() == 100);
}

TEST_CASE("unconditional weight") {
  CHECK(weight_unconditional(make_block(1.0, 95, 5)) == doctest::Approx(0.95));
  CHECK(weight_unconditional(make_block(1.0, 100, 0)) == 1.0);
  CHECK_THROWS_AS(weight_unconditional(BlockRecord{std::nullopt, 0, 0, Censoring::kComplete}), DomainError);
}

TEST_CASE("empirical cdf counts ties with <=") {
  const std::vector<double> pool{1.0, 2.0, 2.0, 3.0};
  EmpiricalCdf F(pool);
  CHECK(F(0.5) == 0.0);
  CHECK(F(1.0) == 0.25);
  CHECK(F(2.0) == 0.75);
  CHECK(F(3.0) == 1.0);
  CHECK(F.max() == 3.0);
  CHECK_THROWS_AS(EmpiricalCdf(std::span<const double>{}), DomainError);
}

TEST_CASE("conditional empirical weight") {
  std::vector<double> pool;
  for (int i = 1; i <= 100; ++i) pool.push_back(i);
  EmpiricalCdf F(pool);
  CHECK(weight_conditional_empirical(make_block(100.0, 50, 37), F) == 1.0);
  CHECK(weight_conditional_empirical(make_block(5.0, 100, 0), F) == 1.0);
  CHECK(weight_conditional_empirical(make_block(99.0, 90, 10), F) == doctest::Approx(0.90438207500880449).epsilon(1e-14));
  CHECK(weight_conditional_empirical(make_block(99.0, 90, 10), std::span<const double>(pool)) ==
        weight_conditional_empirical(make_block(99.0, 90, 10), F));
  CHECK_THROWS_AS(weight_conditional_empirical(make_block(99.0, 90, 10), std::span<const double>{}), DomainError);
}

TEST_CASE("conditional weight is monotone in the maximum and the missing count") {
  std::mt19937_64 rng(17);
  std::vector<double> pool(2000);
  for (double& v : pool) v = oracle::draw(oracle::Base::kExp1, rng);
  EmpiricalCdf F(pool);
  for (int miss = 1; miss <= 30; ++miss) {
    double prev = -1.0;
    for (double m = 0.0; m <= 8.0; m += 0.05) {
      const double w = weight_conditional_empirical(make_block(m, 100 - miss, miss), F);
      CHECK(w >= prev);
      CHECK(w <= weight_conditional_empirical(make_block(m, 100 - miss + 1, miss - 1), F));
      prev = w;
    }
  }
}

TEST_CASE("em weight") {
  const GevParamsd gum(0.0, 1.0, 0.0);
  CHECK(weight_em(make_block(2.0, 90, 10), gum) == doctest::Approx(0.87342301849311664299).epsilon(1e-14));
  CHECK(weight_em(make_block(-2.0, 90, 10), GevParamsd(0.0, 1.0, 0.5)) == 0.0);
  CHECK(weight_em(make_block(-50.0, 100, 0), gum) == 1.0);
  CHECK(weight_em(BlockRecord{1.0, 90, 10, Censoring::kCensored}, gum) == 0.0);
  CHECK(weight_em(BlockRecord{1.0, 90, 10, Censoring::kComplete}, gum) == 1.0);
}

TEST_CASE("every scheme gives a complete block weight one") {
  const std::vector<double> pool{0.1, 0.2, 5.0};
  const BlockRecord b = make_block(0.1, 100, 0);
  CHECK(weight_unconditional(b) == 1.0);
  CHECK(weight_conditional_empirical(b, pool) == 1.0);
  CHECK(weight_em(b, GevParamsd(3.0, 1.0, 0.2)) == 1.0);
  CHECK(label_weight(b) == 1.0);
  CHECK_FALSE(label_weight(make_block(0.1, 90, 10)).has_value());
}

TEST_CASE("exceedance probability of the missing draws") {
  for (auto base : {oracle::Base::kExp1, oracle::Base::kBeta25}) {
    for (int miss : {5, 20, 35}) {
      const double m = oracle::level_for(base, miss, 0.5);
      const auto f = oracle::exceedance_frequency(base, miss, m, 100000, 99 + miss);
      CAPTURE(oracle::base_name(base));
      CAPTURE(miss);
      CHECK(f.within(3.0));
    }
  }
}

TEST_CASE("probability that the observed part holds the block maximum") {
  for (auto base : {oracle::Base::kExp1, oracle::Base::kBeta25}) {
    for (auto [n, nm] : {std::pair{95, 5}, {80, 20}, {65, 35}}) {
      const auto f = oracle::observed_max_frequency(base, n, nm, 100000, 7 + nm);
      CAPTURE(oracle::base_name(base));
      CAPTURE(nm);
      CHECK(f.within(3.0));
      CHECK(weight_unconditional(make_block(1.0, n, nm)) == doctest::Approx(f.expected));
    }
  }
}
