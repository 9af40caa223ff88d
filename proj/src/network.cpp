#include "hmmsbm/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace hmmsbm {

TraderRoster::TraderRoster(std::vector<std::string> ids) : ids_(std::move(ids)) {
  if (ids_.size() < 2) throw std::invalid_argument("roster needs at least two traders");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw std::invalid_argument("empty trader identifier");
    if (!index_.emplace(ids_[i], i).second)
      throw std::invalid_argument("duplicate trader identifier: " + ids_[i]);
  }
}

std::optional<std::size_t> TraderRoster::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TraderRoster TraderRoster::numbered(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) ids.push_back(std::to_string(i));
  return TraderRoster(std::move(ids));
}

Sociomatrix Sociomatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  Sociomatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw std::invalid_argument("sociomatrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const int v = rows[i][j];
      if (v != 0 && v != 1) throw std::invalid_argument("sociomatrix entries must be 0 or 1");
      if (i == j && v != 0) throw std::invalid_argument("sociomatrix diagonal must be zero");
      m.bits_[i * m.n_ + j] = static_cast<std::uint8_t>(v);
    }
  }
  return m;
}

void Sociomatrix::set(std::size_t i, std::size_t j, bool value) {
  if (i >= n_ || j >= n_) throw std::out_of_range("sociomatrix index");
  if (i == j && value) throw std::invalid_argument("sociomatrix diagonal must be zero");
  bits_[i * n_ + j] = value ? 1 : 0;
}

std::size_t Sociomatrix::link_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> Sociomatrix::out_degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) d[i] += bits_[i * n_ + j];
  return d;
}

std::vector<std::size_t> Sociomatrix::in_degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) d[j] += bits_[i * n_ + j];
  return d;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Sociomatrix::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (bits_[i * n_ + j]) out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  return out;
}

void NetworkSeries::validate() const {
  if (matrices.empty()) throw std::invalid_argument("series must contain at least one period");
  if (periods.size() != matrices.size())
    throw std::invalid_argument("period labels and matrices differ in length");
  for (const auto& m : matrices)
    if (m.size() != roster.size()) throw std::invalid_argument("matrix dimension differs from roster size");
  for (std::size_t t = 1; t < periods.size(); ++t)
    if (!(periods[t - 1] < periods[t]))
      throw std::invalid_argument("period labels must be strictly increasing");
}

NetworkSeries NetworkSeries::prefix(std::size_t t) const {
  if (t == 0 || t > matrices.size()) throw std::out_of_range("series prefix length");
  NetworkSeries out;
  out.roster = roster;
  out.periods.assign(periods.begin(), periods.begin() + static_cast<std::ptrdiff_t>(t));
  out.matrices.assign(matrices.begin(), matrices.begin() + static_cast<std::ptrdiff_t>(t));
  return out;
}

namespace {

int parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad date field");
  return v;
}

}  // namespace

std::chrono::sys_days parse_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw std::invalid_argument("unparseable date (expected YYYY-MM-DD): " + std::string(text));
  year_month_day ymd;
  try {
    ymd = year_month_day{year{parse_int(text.substr(0, 4))},
                         month{static_cast<unsigned>(parse_int(text.substr(5, 2)))},
                         day{static_cast<unsigned>(parse_int(text.substr(8, 2)))}};
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("unparseable date (expected YYYY-MM-DD): " + std::string(text));
  }
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date: " + std::string(text));
  return sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::chrono::sys_days iso_week_start(std::chrono::sys_days day) {
  const std::chrono::weekday wd{day};
  return day - (wd - std::chrono::Monday);
}

IngestResult ingest_edge_list(const std::vector<EdgeRecord>& records, const TraderRoster& roster) {
  if (roster.size() == 0) throw std::invalid_argument("empty roster");
  if (records.empty()) throw std::invalid_argument("no transaction records");

  auto first = iso_week_start(records.front().date);
  auto last = first;
  for (const auto& r : records) {
    const auto w = iso_week_start(r.date);
    first = std::min(first, w);
    last = std::max(last, w);
  }
  const auto weeks = static_cast<std::size_t>((last - first).count() / 7 + 1);

  IngestResult out;
  out.series.roster = roster;
  out.series.matrices.assign(weeks, Sociomatrix(roster.size()));
  for (std::size_t k = 0; k < weeks; ++k)
    out.series.periods.push_back(format_date(first + std::chrono::days{7 * static_cast<int>(k)}));

  for (const auto& r : records) {
    const auto seller = roster.index_of(r.seller);
    const auto buyer = roster.index_of(r.buyer);
    if (!seller || !buyer) {
      ++out.skipped_off_roster;
      continue;
    }
    if (*seller == *buyer) {
      ++out.dropped_self_trades;
      continue;
    }
    const auto k = static_cast<std::size_t>((iso_week_start(r.date) - first).count() / 7);
    out.series.matrices[k].set(*seller, *buyer, true);
  }
  return out;
}

namespace {

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n == 0) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

NetworkSummary network_summary(const Sociomatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw std::invalid_argument("network_summary requires n >= 2");
  NetworkSummary s;

  const auto out = m.out_degrees();
  const auto in = m.in_degrees();
  std::vector<double> outd(out.begin(), out.end()), ind(in.begin(), in.end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out[i] + in[i] > 0) ++s.active_traders;
    total += static_cast<double>(out[i] + in[i]);
    s.max_in_degree = std::max(s.max_in_degree, in[i]);
    s.max_out_degree = std::max(s.max_out_degree, out[i]);
  }
  s.mean_degree = total / static_cast<double>(n);
  s.link_probability = static_cast<double>(m.link_count()) / static_cast<double>(n * (n - 1));
  s.degree_correlation = pearson(ind, outd);

  // symmetrized undirected graph
  std::vector<std::vector<std::uint32_t>> adj(n);
  std::vector<std::uint8_t> sym(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (m(i, j) || m(j, i)) {
        adj[i].push_back(static_cast<std::uint32_t>(j));
        adj[j].push_back(static_cast<std::uint32_t>(i));
        sym[i * n + j] = sym[j * n + i] = 1;
      }

  double triangles_x3 = 0.0, triples = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double d = static_cast<double>(adj[v].size());
    triples += d * (d - 1.0) / 2.0;
    for (std::size_t a = 0; a < adj[v].size(); ++a)
      for (std::size_t b = a + 1; b < adj[v].size(); ++b)
        if (sym[adj[v][a] * n + adj[v][b]]) triangles_x3 += 1.0;
  }
  // each triangle is counted once per vertex, i.e. three times
  s.clustering_coefficient = triples > 0.0 ? triangles_x3 / triples : 0.0;

  double m_edges = 0, sum_prod = 0, sum_half = 0, sum_sq_half = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t j : adj[i]) {
      if (j <= i) continue;
      const double di = static_cast<double>(adj[i].size());
      const double dj = static_cast<double>(adj[j].size());
      m_edges += 1;
      sum_prod += di * dj;
      sum_half += 0.5 * (di + dj);
      sum_sq_half += 0.5 * (di * di + dj * dj);
    }
  if (m_edges > 0) {
    const double mean = sum_half / m_edges;
    const double num = sum_prod / m_edges - mean * mean;
    const double den = sum_sq_half / m_edges - mean * mean;
    if (den > 1e-12 * std::max(1.0, sum_sq_half / m_edges)) s.assortativity_by_degree = num / den;
  }
  return s;
}

std::vector<NetworkSummary> summary_series(const NetworkSeries& s) {
  std::vector<NetworkSummary> out;
  out.reserve(s.size());
  for (const auto& m : s.matrices) out.push_back(network_summary(m));
  return out;
}

const std::vector<std::string>& summary_column_names() {
  static const std::vector<std::string> names = {
      "active_traders",      "mean_degree",           "max_in_degree",
      "max_out_degree",      "degree_correlation",    "clustering_coefficient",
      "link_probability",    "assortativity_by_degree"};
  return names;
}

double summary_column(const NetworkSummary& s, std::string_view name) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (name == "active_traders") return static_cast<double>(s.active_traders);
  if (name == "mean_degree") return s.mean_degree;
  if (name == "max_in_degree") return static_cast<double>(s.max_in_degree);
  if (name == "max_out_degree") return static_cast<double>(s.max_out_degree);
  if (name == "degree_correlation") return s.degree_correlation.value_or(nan);
  if (name == "clustering_coefficient") return s.clustering_coefficient;
  if (name == "link_probability") return s.link_probability;
  if (name == "assortativity_by_degree") return s.assortativity_by_degree.value_or(nan);
  throw std::invalid_argument("unknown summary column: " + std::string(name));
}

}  // namespace hmmsbm
