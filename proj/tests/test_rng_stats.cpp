#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hprobit/rng.hpp"
#include "hprobit/stats.hpp"
#include "support.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <array>
#include <cmath>
#include <set>

using namespace hprobit;
using testing_support::iid_moment;

TEST_CASE("philox4x32-10 known answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and keyed") {
  IterationRng a{7, 0, 3};
  auto s1 = a.stream(Stage::theta, 11);
  auto s2 = a.stream(Stage::theta, 11);
  for (int i = 0; i < 100; ++i) CHECK(s1.next_u64() == s2.next_u64());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {1ULL, 2ULL})
    for (std::uint64_t chain : {0ULL, 1ULL})
      for (std::uint64_t it : {0ULL, 1ULL})
        for (auto stage : {Stage::omega, Stage::theta})
          for (std::uint64_t idx : {0ULL, 1ULL}) firsts.insert(IterationRng{seed, chain, it}.stream(stage, idx).next_u64());
  CHECK(firsts.size() == 32);
}

TEST_CASE("uniform and normal moments") {
  auto s = IterationRng{3, 0, 0}.stream(Stage::init);
  std::vector<double> u, z;
  for (int i = 0; i < 200000; ++i) {
    const double v = s.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    u.push_back(v);
    z.push_back(s.normal());
  }
  const auto mu = iid_moment(u);
  CHECK(std::abs(mu.mean - 0.5) < 4 * mu.se);
  const auto mz = iid_moment(z);
  CHECK(std::abs(mz.mean) < 4 * mz.se);
  std::vector<double> z2;
  for (double v : z) z2.push_back(v * v);
  const auto m2 = iid_moment(z2);
  CHECK(std::abs(m2.mean - 1.0) < 4 * m2.se);
}

TEST_CASE("normal cdf and quantile") {
  boost::math::normal n;
  for (double x : {-30.0, -8.0, -1.5, 0.0, 0.3, 2.0, 9.0}) {
    CHECK(std_normal_cdf(x) == doctest::Approx(boost::math::cdf(n, x)).epsilon(1e-13));
    CHECK(std_normal_pdf(x) == doctest::Approx(boost::math::pdf(n, x)).epsilon(1e-13));
  }
  CHECK(log_std_normal_cdf(-30.0) == doctest::Approx(std::log(boost::math::cdf(n, -30.0))).epsilon(1e-10));
  CHECK(log_std_normal_cdf(5.0) == doctest::Approx(std::log1p(-boost::math::cdf(n, -5.0))).epsilon(1e-12));
  for (double p : {1e-12, 0.01, 0.2, 0.5, 0.9, 1 - 1e-10}) {
    CHECK(std_normal_cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK_THROWS_AS(std_normal_cdf(std::nan("")), std::domain_error);
}

TEST_CASE("truncated normal matches closed-form moments") {
  boost::math::normal n;
  struct Case {
    double mean, sd;
    TruncationSide side;
  };
  for (const auto& c : {Case{0.3, 1.0, TruncationSide::positive}, Case{-2.0, 1.0, TruncationSide::positive},
                        Case{-8.0, 1.0, TruncationSide::positive}, Case{5.0, 2.0, TruncationSide::positive},
                        Case{0.3, 1.0, TruncationSide::nonpositive}, Case{6.5, 1.0, TruncationSide::nonpositive}}) {
    const double alpha = -c.mean / c.sd;
    double mean, var;
    if (c.side == TruncationSide::positive) {
      const double lambda = boost::math::pdf(n, alpha) / boost::math::cdf(boost::math::complement(n, alpha));
      mean = c.mean + c.sd * lambda;
      var = c.sd * c.sd * (1.0 + alpha * lambda - lambda * lambda);
    } else {
      const double lambda = boost::math::pdf(n, alpha) / boost::math::cdf(n, alpha);
      mean = c.mean - c.sd * lambda;
      var = c.sd * c.sd * (1.0 - alpha * lambda - lambda * lambda);
    }
    auto s = IterationRng{11, 0, 0}.stream(Stage::omega, static_cast<std::uint64_t>(c.mean * 100 + 1000));
    std::vector<double> x;
    for (int i = 0; i < 100000; ++i) {
      const double v = sample_truncated_normal(c.mean, c.sd, c.side, s);
      REQUIRE((c.side == TruncationSide::positive ? v > 0.0 : v <= 0.0));
      x.push_back(v);
    }
    const auto m = iid_moment(x);
    CAPTURE(c.mean);
    CHECK(std::abs(m.mean - mean) < 4.5 * m.se);
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    CHECK(ss / static_cast<double>(x.size() - 1) == doctest::Approx(var).epsilon(0.03));
  }
}

TEST_CASE("gamma, beta and dirichlet moments") {
  auto s = IterationRng{5, 0, 0}.stream(Stage::weights);
  for (double shape : {0.05, 0.5, 3.0}) {
    std::vector<double> g;
    for (int i = 0; i < 100000; ++i) g.push_back(sample_gamma(shape, s));
    const auto m = iid_moment(g);
    CAPTURE(shape);
    CHECK(std::abs(m.mean - shape) < 4.5 * m.se);
  }
  // log-gamma stays finite for tiny shapes where gamma underflows
  for (int i = 0; i < 1000; ++i) CHECK(std::isfinite(sample_log_gamma(1e-3, s)));

  std::vector<double> b;
  for (int i = 0; i < 100000; ++i) b.push_back(sample_beta(2.0, 5.0, s));
  const auto mb = iid_moment(b);
  CHECK(std::abs(mb.mean - 2.0 / 7.0) < 4.5 * mb.se);

  const std::vector<double> alpha{1.0 / 30, 2.0, 0.5};
  std::vector<std::vector<double>> cols(3);
  for (int i = 0; i < 50000; ++i) {
    const auto d = sample_dirichlet(alpha, s);
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      cols[k].push_back(d[k]);
      sum += d[k];
    }
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  const double total = 1.0 / 30 + 2.5;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto m = iid_moment(cols[k]);
    CHECK(std::abs(m.mean - alpha[k] / total) < 4.5 * m.se);
  }
}

TEST_CASE("categorical from log weights") {
  auto s = IterationRng{9, 0, 0}.stream(Stage::assignment);
  const std::vector<double> logw{std::log(0.2) - 800.0, std::log(0.5) - 800.0, std::log(0.3) - 800.0};
  std::array<int, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_categorical_from_logweights(logw, s)];
  const std::array<double, 3> p{0.2, 0.5, 0.3};
  for (std::size_t k = 0; k < 3; ++k) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / n);
    CHECK(std::abs(counts[k] / static_cast<double>(n) - p[k]) < 4.5 * se);
  }
  const std::vector<double> one_hot{0.0, -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < 100; ++i) CHECK(sample_categorical_from_logweights(one_hot, s) == 0);
}

TEST_CASE("special functions") {
  CHECK(log_beta_fn(2.5, 0.3) == doctest::Approx(std::log(boost::math::beta(2.5, 0.3))).epsilon(1e-12));
  CHECK(log_choose(40, 13) == doctest::Approx(std::log(boost::math::binomial_coefficient<double>(40, 13))).epsilon(1e-12));
  CHECK(log_choose(7, 0) == doctest::Approx(0.0));
  const std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
}
