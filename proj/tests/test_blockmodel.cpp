#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "hmmsbm/blockmodel.hpp"
#include "oracles.hpp"

using namespace hmmsbm;

TEST_CASE("stick breaking") {
  const double eps = 1e-3;
  std::vector<double> v1 = {1 - eps};
  auto s = stick_break(v1);
  CHECK(s.w[0] == doctest::Approx(1 - eps));
  CHECK(s.residual == doctest::Approx(eps));
  std::vector<double> v2 = {0.5, 0.5};
  s = stick_break(v2);
  CHECK(s.w[0] == 0.5);
  CHECK(s.w[1] == 0.25);
  CHECK(s.residual == 0.25);
  Rng rng(4);
  std::vector<double> v(10);
  for (double& x : v) x = runif(rng);
  s = stick_break(v);
  double sum = s.residual;
  for (double w : s.w) sum += w;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  for (std::size_t k = 0; k < v.size(); ++k) {
    double rest = 1.0;
    for (std::size_t j = 0; j < k; ++j) rest *= 1 - v[j];
    CHECK(s.w[k] == doctest::Approx(v[k] * rest).epsilon(1e-14));
  }
  std::vector<double> bad = {0.5, 1.0};
  CHECK_THROWS(stick_break(bad));
}

TEST_CASE("eppf closed forms") {
  Partition two(std::vector<int>{0, 0});
  for (double a : {0.0, 0.3, 0.8})
    for (double b : {-0.2, 0.5, 3.0}) {
      if (b <= -a) continue;
      CHECK(eppf_log_prob(two, {a, b}) == doctest::Approx(std::log((1 - a) / (1 + b))));
    }
  CHECK(std::exp(eppf_log_prob(two, {0.0, 1.0})) == doctest::Approx(0.5));
  CHECK(eppf_log_prob(Partition(std::vector<int>{0}), {0.4, 2.0}) == doctest::Approx(0.0));
  CHECK_THROWS(eppf_log_prob(two, {1.0, 1.0}));
  CHECK_THROWS(eppf_log_prob(two, {0.5, -0.6}));
}

TEST_CASE("eppf sums to one and matches sequential seating") {
  for (std::size_t n = 1; n <= 6; ++n)
    for (double a : {0.0, 0.3, 0.7})
      for (double b : {-0.2, 0.5, 1.0, 5.0}) {
        if (b <= -a) continue;
        double total = 0.0;
        for (const auto& lab : oracle::partitions(n)) {
          const double p = std::exp(eppf_log_prob(Partition(lab), {a, b}));
          CHECK(p == doctest::Approx(oracle::seating_prob(lab, a, b)).epsilon(1e-11));
          total += p;
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
      }
}

TEST_CASE("eppf is invariant to block relabeling") {
  Partition a(std::vector<int>{0, 0, 1, 2, 2, 2});
  Partition b(std::vector<int>{5, 5, 1, 3, 3, 3});
  CHECK(a == b);
  CHECK(eppf_log_prob(a, {0.3, 1.2}) == eppf_log_prob(b, {0.3, 1.2}));
}

TEST_CASE("partition canonical labels") {
  Partition p(std::vector<int>{7, 3, 7, 9});
  CHECK(p.labels() == std::vector<int>{0, 1, 0, 2});
  CHECK(p.sizes() == std::vector<std::size_t>{2, 1, 1});
  CHECK(Partition::singletons(3).blocks() == 3);
  CHECK(Partition::single_block(3).blocks() == 1);
}

TEST_CASE("sample_partition: pair co-clustering frequency") {
  Rng rng(10);
  const PYParams py{0.3, 1.5};
  const int N = 100000;
  int together = 0;
  for (int r = 0; r < N; ++r) together += sample_partition(2, py, rng).blocks() == 1;
  const double p = (1 - py.alpha) / (1 + py.beta);
  const double se = std::sqrt(p * (1 - p) / N);
  CHECK(std::abs(together / double(N) - p) < 3 * se);
}

TEST_CASE("sample_partition: huge concentration gives singletons") {
  Rng rng(11);
  int singles = 0;
  for (int r = 0; r < 2000; ++r) singles += sample_partition(5, {0.0, 1e4}, rng).blocks() == 5;
  CHECK(singles >= 1995);
}

TEST_CASE("sample_partition: n = 4 law matches the eppf") {
  Rng rng(12);
  const PYParams py{0.3, 1.0};
  const auto parts = oracle::partitions(4);
  std::map<std::vector<int>, int> counts;
  const int N = 100000;
  for (int r = 0; r < N; ++r) counts[sample_partition(4, py, rng).labels()]++;
  double chi2 = 0;
  for (const auto& lab : parts) {
    const double e = N * oracle::seating_prob(lab, py.alpha, py.beta);
    chi2 += (counts[lab] - e) * (counts[lab] - e) / e;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(14), chi2));
  CHECK(p > 0.001);
}

TEST_CASE("beta-bernoulli marginal") {
  const double a = 1.7, b = 0.6;
  CHECK(beta_bernoulli_marginal(1, 1, a, b) == doctest::Approx(std::log(a / (a + b))));
  CHECK(beta_bernoulli_marginal(0, 0, a, b) == 0.0);
  CHECK(beta_bernoulli_marginal(2, 2, a, b) == doctest::Approx(std::log(a * (a + 1) / ((a + b) * (a + b + 1)))));
  for (int total = 0; total < 12; ++total)
    for (int ones = 0; ones <= total; ++ones) {
      CHECK(beta_bernoulli_marginal(ones, total, a, b) ==
            doctest::Approx(oracle::bb_log_marginal(ones, total, a, b)).epsilon(1e-12));
      const double ratio = std::exp(beta_bernoulli_marginal(ones + 1, total + 1, a, b) -
                                    beta_bernoulli_marginal(ones, total, a, b));
      CHECK(ratio == doctest::Approx((ones + a) / (total + a + b)).epsilon(1e-12));
    }
  CHECK_THROWS(beta_bernoulli_marginal(3, 2, a, b));
  CHECK_THROWS(beta_bernoulli_marginal(1, 2, 0.0, b));
}

TEST_CASE("assortativity index") {
  CHECK(assortativity_index({1.3, 2.2, 1.3, 2.2}) == 0.0);
  CHECK(assortativity_index({1, 3, 2, 2}) == doctest::Approx(std::log(2.0)));
  CHECK(assortativity_index({2, 2, 1, 3}) == doctest::Approx(-std::log(2.0)));
  // equal means with different shapes still give zero
  CHECK(assortativity_index({1, 1, 5, 5}) == doctest::Approx(0.0));
}

TEST_CASE("transitivity index against the triad simulation") {
  struct Case {
    BetaHyper h;
    PYParams py;
  };
  const Case cases[] = {{{1, 1, 1, 1}, {0.0, 1.0}}, {{1, 3, 2, 2}, {0.5, 1.0}}, {{0.5, 2, 3, 1}, {0.2, 0.5}}};
  unsigned long long seed = 100;
  for (const auto& c : cases) {
    const auto ti = transitivity_index(c.h, c.py);
    CHECK(ti.denominator > 0);
    CHECK(ti.chi > 0);
    CHECK(ti.chi < 1);
    CHECK(ti.chi == doctest::Approx(ti.numerator / ti.denominator));
    const auto mc = oracle::triad_mc(c.h.a_off, c.h.b_off, c.h.a_diag, c.h.b_diag, c.py.alpha, c.py.beta, 300000, seed++);
    CHECK(std::abs(ti.chi - mc.chi) < 3 * mc.se);
  }
}

TEST_CASE("transitivity index: distinct-community limit") {
  const BetaHyper h{2, 5, 4, 1};
  const auto ti = transitivity_index(h, {0.0, 1e6});
  CHECK(std::abs(ti.chi - 2.0 / 7.0) < 1e-3);
}

TEST_CASE("sample_interactions means") {
  Rng rng(13);
  const BetaHyper h{1.0, 3.0, 4.0, 2.0};
  CHECK(sample_interactions(1, h, rng).blocks() == 1);
  double diag = 0, off = 0;
  const int N = 100000;
  for (int r = 0; r < N; ++r) {
    auto th = sample_interactions(2, h, rng);
    diag += th(0, 0);
    off += th(0, 1);
  }
  // Beta(4,2) sd = sqrt(8/252), Beta(1,3) sd = sqrt(3/80)
  CHECK(std::abs(diag / N - 4.0 / 6.0) < 3 * std::sqrt(8.0 / 252.0 / N));
  CHECK(std::abs(off / N - 0.25) < 3 * std::sqrt(3.0 / 80.0 / N));
}

TEST_CASE("generate_network") {
  Rng rng(14);
  Partition p(std::vector<int>{0, 0, 1, 1, 1});
  auto m = generate_network(p, InteractionMatrix(2, 1.0), rng);
  CHECK(m.link_count() == 20);
  m = generate_network(p, InteractionMatrix(2, 0.0), rng);
  CHECK(m.link_count() == 0);
  CHECK_THROWS(generate_network(p, InteractionMatrix(1, 0.5), rng));

  std::vector<int> lab(40);
  for (int i = 0; i < 40; ++i) lab[i] = i < 20 ? 0 : 1;
  Partition two(lab);
  InteractionMatrix th(2, 0.1);
  th(0, 0) = th(1, 1) = 0.9;
  double within = 0, between = 0, nw = 0, nb = 0;
  for (int r = 0; r < 1000; ++r) {
    auto y = generate_network(two, th, rng);
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 40; ++j) {
        if (i == j) continue;
        if (lab[i] == lab[j]) within += y(i, j), nw += 1;
        else between += y(i, j), nb += 1;
      }
  }
  CHECK(std::abs(within / nw - 0.9) < 3 * std::sqrt(0.09 / nw));
  CHECK(std::abs(between / nb - 0.1) < 3 * std::sqrt(0.09 / nb));
}
