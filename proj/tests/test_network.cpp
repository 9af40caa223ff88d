#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hmmsbm/network.hpp"

using namespace hmmsbm;

namespace {

EdgeRecord rec(const char* d, const char* s, const char* b) { return {parse_date(d), s, b}; }

double pearson_ref(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// brute force over all pairs and ordered triples
struct RefStats {
  double clustering, assort, corr;
  bool assort_defined, corr_defined;
};

RefStats brute_force(const Sociomatrix& m) {
  const std::size_t n = m.size();
  auto u = [&](std::size_t i, std::size_t j) { return i != j && (m(i, j) || m(j, i)); };
  double closed = 0, connected = 0;
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b || a == c || b == c) continue;
        if (u(c, a) && u(c, b)) {
          connected += 1;
          if (u(a, b)) closed += 1;
        }
      }
  RefStats r{};
  r.clustering = connected > 0 ? closed / connected : 0.0;
  std::vector<double> deg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += u(i, j) ? 1 : 0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (u(i, j)) {
        x.push_back(deg[i]);
        y.push_back(deg[j]);
      }
  double vx = 0, mx = 0;
  for (double v : x) mx += v / x.size();
  for (double v : x) vx += (v - mx) * (v - mx);
  r.assort_defined = !x.empty() && vx > 1e-9;
  if (r.assort_defined) r.assort = pearson_ref(x, y);
  std::vector<double> in(n, 0), out(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (m(i, j)) out[i] += 1, in[j] += 1;
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double q) { return q == v[0]; });
  };
  r.corr_defined = !constant(in) && !constant(out);
  if (r.corr_defined) r.corr = pearson_ref(in, out);
  return r;
}

Sociomatrix random_matrix(std::size_t n, double p, std::mt19937& g) {
  std::bernoulli_distribution b(p);
  Sociomatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && b(g)) m.set(i, j, true);
  return m;
}

}  // namespace

TEST_CASE("roster rejects duplicates and tiny rosters") {
  CHECK_THROWS_AS(TraderRoster({"A", "A"}), std::invalid_argument);
  CHECK_THROWS_AS(TraderRoster({"A"}), std::invalid_argument);
  TraderRoster r({"B", "A", "C"});
  CHECK(r.index_of("A").value() == 1);
  CHECK_FALSE(r.index_of("Z").has_value());
}

TEST_CASE("sociomatrix keeps a zero diagonal") {
  Sociomatrix m(3);
  CHECK_THROWS(m.set(1, 1, true));
  CHECK_THROWS(Sociomatrix::from_rows({{1, 0}, {0, 0}}));
  m.set(0, 2, true);
  CHECK(m.link_count() == 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK_FALSE(m(i, i));
}

TEST_CASE("dates and ISO weeks") {
  CHECK(format_date(parse_date("2008-02-29")) == "2008-02-29");
  CHECK_THROWS(parse_date("2007-02-29"));
  CHECK_THROWS(parse_date("2007/01/01"));
  // 2024-01-03 is a Wednesday; its week starts on Monday 2024-01-01
  CHECK(format_date(iso_week_start(parse_date("2024-01-03"))) == "2024-01-01");
  CHECK(format_date(iso_week_start(parse_date("2024-01-07"))) == "2024-01-01");
  CHECK(format_date(iso_week_start(parse_date("2024-01-08"))) == "2024-01-08");
}

TEST_CASE("ingest: single record") {
  TraderRoster r({"A", "B"});
  auto res = ingest_edge_list({rec("2024-01-03", "A", "B")}, r);
  REQUIRE(res.series.size() == 1);
  CHECK(res.series.matrices[0](0, 1));
  CHECK_FALSE(res.series.matrices[0](1, 0));
}

TEST_CASE("ingest: self trade dropped") {
  TraderRoster r({"A", "B"});
  auto res = ingest_edge_list({rec("2024-01-03", "A", "A")}, r);
  CHECK(res.dropped_self_trades == 1);
  CHECK(res.series.matrices[0].link_count() == 0);
}

TEST_CASE("ingest: five records over two weeks with a duplicate") {
  TraderRoster r({"A", "B", "C"});
  std::vector<EdgeRecord> recs = {rec("2024-01-01", "A", "B"), rec("2024-01-05", "A", "B"), rec("2024-01-07", "C", "A"),
                                  rec("2024-01-08", "B", "C"), rec("2024-01-14", "C", "B")};
  auto res = ingest_edge_list(recs, r);
  REQUIRE(res.series.size() == 2);
  CHECK(res.series.periods == std::vector<std::string>{"2024-01-01", "2024-01-08"});
  auto w1 = Sociomatrix::from_rows({{0, 1, 0}, {0, 0, 0}, {1, 0, 0}});
  auto w2 = Sociomatrix::from_rows({{0, 0, 0}, {0, 0, 1}, {0, 1, 0}});
  CHECK(res.series.matrices[0] == w1);
  CHECK(res.series.matrices[1] == w2);
  // duplicating every record changes nothing
  auto doubled = recs;
  doubled.insert(doubled.end(), recs.begin(), recs.end());
  CHECK(ingest_edge_list(doubled, r).series == res.series);
}

TEST_CASE("ingest: gap weeks, off-roster records, errors") {
  TraderRoster r({"A", "B"});
  auto res = ingest_edge_list({rec("2024-01-01", "A", "B"), rec("2024-01-22", "B", "A"), rec("2024-01-10", "A", "Z")}, r);
  CHECK(res.series.size() == 4);
  CHECK(res.skipped_off_roster == 1);
  CHECK(res.series.matrices[1].link_count() == 0);
  CHECK(res.series.matrices[2].link_count() == 0);
  CHECK_THROWS(ingest_edge_list({}, r));
}

TEST_CASE("summary: empty graph") {
  auto s = network_summary(Sociomatrix(5));
  CHECK(s.active_traders == 0);
  CHECK(s.link_probability == 0.0);
  CHECK_FALSE(s.degree_correlation.has_value());
  CHECK(s.clustering_coefficient == 0.0);
}

TEST_CASE("summary: complete digraph") {
  Sociomatrix m(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) m.set(i, j, true);
  auto s = network_summary(m);
  CHECK(s.link_probability == 1.0);
  CHECK(s.clustering_coefficient == doctest::Approx(1.0));
  CHECK(s.mean_degree == 6.0);
  // every degree equal: the Pearson correlation is undefined
  CHECK_FALSE(s.degree_correlation.has_value());
}

TEST_CASE("summary: in/out degree correlation of a perfectly matched graph") {
  // 0<->1, 0<->2: in-degree equals out-degree for every node and varies
  auto m = Sociomatrix::from_rows({{0, 1, 1}, {1, 0, 0}, {1, 0, 0}});
  auto s = network_summary(m);
  REQUIRE(s.degree_correlation.has_value());
  CHECK(*s.degree_correlation == doctest::Approx(1.0));
}

TEST_CASE("summary: fixture graphs against brute force") {
  std::mt19937 g(11);
  auto fixture = Sociomatrix::from_rows(
      {{0, 1, 0, 0, 1}, {0, 0, 1, 0, 0}, {1, 0, 0, 1, 0}, {0, 0, 0, 0, 1}, {0, 1, 0, 0, 0}});
  std::vector<Sociomatrix> cases = {fixture};
  for (int k = 0; k < 30; ++k) cases.push_back(random_matrix(5 + k % 4, 0.1 + 0.02 * k, g));
  for (const auto& m : cases) {
    auto s = network_summary(m);
    auto r = brute_force(m);
    CHECK(s.clustering_coefficient == doctest::Approx(r.clustering).epsilon(1e-12));
    CHECK(s.assortativity_by_degree.has_value() == r.assort_defined);
    if (r.assort_defined) CHECK(*s.assortativity_by_degree == doctest::Approx(r.assort).epsilon(1e-9));
    CHECK(s.degree_correlation.has_value() == r.corr_defined);
    if (r.corr_defined) CHECK(*s.degree_correlation == doctest::Approx(r.corr).epsilon(1e-9));
    const double n = static_cast<double>(m.size());
    CHECK(s.link_probability == static_cast<double>(m.link_count()) / (n * (n - 1)));
    CHECK(s.mean_degree == doctest::Approx(2.0 * m.link_count() / n));
  }
}

TEST_CASE("summary: triangle-free graph has zero clustering") {
  // a directed 4-cycle is triangle free once symmetrized
  auto m = Sociomatrix::from_rows({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}});
  CHECK(network_summary(m).clustering_coefficient == 0.0);
}

TEST_CASE("summary: invariant under node relabeling") {
  std::mt19937 g(5);
  auto m = random_matrix(7, 0.3, g);
  std::vector<std::size_t> perm = {3, 0, 6, 1, 5, 2, 4};
  Sociomatrix p(7);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      if (m(i, j)) p.set(perm[i], perm[j], true);
  auto a = network_summary(m), b = network_summary(p);
  CHECK(a.clustering_coefficient == doctest::Approx(b.clustering_coefficient));
  CHECK(a.mean_degree == b.mean_degree);
  CHECK(a.max_in_degree == b.max_in_degree);
  CHECK(a.link_probability == b.link_probability);
}

TEST_CASE("summary_series") {
  std::mt19937 g(3);
  NetworkSeries s;
  s.roster = TraderRoster::numbered(6);
  s.periods = {"a", "b", "c"};
  for (int t = 0; t < 3; ++t) s.matrices.push_back(random_matrix(6, 0.3, g));
  auto out = summary_series(s);
  REQUIRE(out.size() == 3);
  for (int t = 0; t < 3; ++t) CHECK(out[t] == network_summary(s.matrices[t]));
  NetworkSeries one = s.prefix(1);
  CHECK(summary_series(one).size() == 1);
  s.matrices = {s.matrices[0], s.matrices[0], s.matrices[0]};
  out = summary_series(s);
  CHECK(out[0] == out[1]);
  CHECK(out[1] == out[2]);
}

TEST_CASE("series validation") {
  NetworkSeries s;
  s.roster = TraderRoster::numbered(3);
  s.periods = {"b", "a"};
  s.matrices = {Sociomatrix(3), Sociomatrix(3)};
  CHECK_THROWS(s.validate());
  s.periods = {"a", "b"};
  CHECK_NOTHROW(s.validate());
  s.matrices.push_back(Sociomatrix(4));
  CHECK_THROWS(s.validate());
}
