#include "hmmsbm/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hmmsbm/blockmodel.hpp"

namespace hmmsbm {

std::vector<std::vector<double>> CoClusteringMatrix::rows() const {
  std::vector<std::vector<double>> out(dim, std::vector<double>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) out[i][j] = omega[i * dim + j];
  return out;
}

CoClusteringMatrix CoClusteringMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  CoClusteringMatrix m;
  m.dim = rows.size();
  m.omega.reserve(m.dim * m.dim);
  for (const auto& r : rows) {
    if (r.size() != m.dim) throw std::invalid_argument("co-clustering matrix must be square");
    m.omega.insert(m.omega.end(), r.begin(), r.end());
  }
  return m;
}

CoClusteringMatrix coclustering(const std::vector<std::vector<int>>& label_samples) {
  if (label_samples.empty()) throw std::invalid_argument("coclustering: no samples");
  const std::size_t d = label_samples.front().size();
  CoClusteringMatrix m;
  m.dim = d;
  m.omega.assign(d * d, 0.0);
  std::vector<std::size_t> same(d * d, 0);
  for (const auto& lab : label_samples) {
    if (lab.size() != d) throw std::invalid_argument("coclustering: label vectors differ in length");
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j)
        if (lab[i] == lab[j]) ++same[i * d + j];
  }
  const double B = static_cast<double>(label_samples.size());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) m.omega[i * d + j] = m.omega[j * d + i] = static_cast<double>(same[i * d + j]) / B;
  return m;
}

double binder_loss(std::span<const int> labels, const CoClusteringMatrix& omega) {
  if (labels.size() != omega.dim) throw std::invalid_argument("binder_loss: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < omega.dim; ++i)
    for (std::size_t j = i + 1; j < omega.dim; ++j)
      loss += std::abs((labels[i] == labels[j] ? 1.0 : 0.0) - omega(i, j));
  return loss;
}

std::vector<std::vector<int>> enumerate_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  if (n == 0) return {{}};
  std::vector<int> a(n, 0), maxp(n, 0);
  // restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1])
  while (true) {
    out.push_back(a);
    std::size_t i = n - 1;
    while (i > 0 && a[i] == maxp[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    maxp[i] = std::max(maxp[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      maxp[j] = maxp[i];
    }
  }
  return out;
}

std::vector<int> point_partition(const CoClusteringMatrix& omega) {
  const std::size_t d = omega.dim;
  if (d == 0) return {};
  // cost of putting i and j together rather than apart
  auto cost = [&](std::size_t i, std::size_t j) { return 1.0 - 2.0 * omega(i, j); };

  std::vector<std::vector<std::size_t>> clusters(d);
  for (std::size_t i = 0; i < d; ++i) clusters[i] = {i};
  while (clusters.size() > 1) {
    double best = 0.0;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double g = 0.0;
        for (auto i : clusters[a])
          for (auto j : clusters[b]) g += cost(i, j);
        if (g < best - 1e-12) {
          best = g;
          ba = a;
          bb = b;
        }
      }
    if (!(best < 0.0)) break;
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  std::vector<int> labels(d);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (auto i : clusters[c]) labels[i] = static_cast<int>(c);

  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t i = 0; i < d; ++i) {
      const int K = *std::max_element(labels.begin(), labels.end()) + 1;
      // change in loss when i joins block k, relative to i alone
      std::vector<double> delta(static_cast<std::size_t>(K) + 1, 0.0);
      for (std::size_t j = 0; j < d; ++j)
        if (j != i) delta[static_cast<std::size_t>(labels[j])] += cost(i, j);
      std::size_t best = static_cast<std::size_t>(labels[i]);
      for (std::size_t k = 0; k <= static_cast<std::size_t>(K); ++k) {
        bool empty = true;
        for (std::size_t j = 0; j < d && empty; ++j)
          if (j != i && labels[j] == static_cast<int>(k)) empty = false;
        const double dk = empty ? 0.0 : delta[k];
        const double db = delta[best];
        if (dk < db - 1e-12) best = k;
      }
      if (best != static_cast<std::size_t>(labels[i])) {
        labels[i] = static_cast<int>(best);
        moved = true;
      }
    }
    labels = Partition(labels).labels();
  }
  labels = Partition(labels).labels();

  if (d <= 9) {
    double best_loss = binder_loss(labels, omega);
    for (const auto& cand : enumerate_partitions(d)) {
      const double l = binder_loss(cand, omega);
      if (l < best_loss - 1e-12) {
        best_loss = l;
        labels = cand;
      }
    }
  }
  return labels;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double idx = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, v] : table) idx += c2(v);
  for (const auto& [k, v] : ra) sa += c2(v);
  for (const auto& [k, v] : rb) sb += c2(v);
  const double expected = n > 1 ? sa * sb / c2(n) : 0.0;
  const double maxi = 0.5 * (sa + sb);
  if (maxi - expected == 0.0) return ra.size() == table.size() && rb.size() == table.size() ? 1.0 : 0.0;
  return (idx - expected) / (maxi - expected);
}

std::vector<std::size_t> change_points(std::span<const int> labels) {
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t < labels.size(); ++t)
    if (labels[t] != labels[t - 1]) out.push_back(t);
  return out;
}

double spectral_variance(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("spectral_variance: need at least 2 values");
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const auto w = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  auto acov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = k; t < n; ++t) s += (x[t] - m) * (x[t - k] - m);
    return s / static_cast<double>(n);
  };
  double v = acov(0);
  for (std::size_t k = 1; k <= w && k < n; ++k)
    v += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(w + 1)) * acov(k);
  return std::max(v, 0.0);
}

GewekeResult geweke(std::span<const double> x, double frac_a, double frac_b) {
  if (x.size() < 100) throw std::invalid_argument("geweke: series must hold at least 100 values");
  if (!(frac_a > 0 && frac_b > 0 && frac_a + frac_b <= 1.0)) throw std::invalid_argument("geweke: bad fractions");
  const std::size_t n = x.size();
  const auto na = static_cast<std::size_t>(std::floor(frac_a * static_cast<double>(n)));
  const auto nb = static_cast<std::size_t>(std::floor(frac_b * static_cast<double>(n)));
  const auto A = x.subspan(0, na), B = x.subspan(n - nb, nb);
  GewekeResult r;
  r.mean_a = std::accumulate(A.begin(), A.end(), 0.0) / static_cast<double>(na);
  r.mean_b = std::accumulate(B.begin(), B.end(), 0.0) / static_cast<double>(nb);
  r.var_a = spectral_variance(A) / static_cast<double>(na);
  r.var_b = spectral_variance(B) / static_cast<double>(nb);
  const double se = std::sqrt(r.var_a + r.var_b);
  const double diff = r.mean_a - r.mean_b;
  r.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  return r;
}

double geweke_z(std::span<const double> x, double frac_a, double frac_b) { return geweke(x, frac_a, frac_b).z; }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

IndexSeries index_series(const std::vector<ModelState>& samples) {
  if (samples.empty()) throw std::invalid_argument("index_series: no samples");
  const std::size_t T = samples.front().zeta.size();
  std::vector<std::vector<double>> ups(T), chis(T);
  for (const auto& ms : samples) {
    if (ms.zeta.size() != T) throw std::invalid_argument("index_series: samples differ in length");
    std::vector<double> u(ms.max_states()), c(ms.max_states());
    const auto occ = ms.occupied();
    for (std::size_t s = 0; s < ms.max_states(); ++s)
      if (occ[s]) {
        u[s] = assortativity_index(ms.states[s].bh);
        c[s] = transitivity_index(ms.states[s].bh, ms.states[s].py).chi;
      }
    for (std::size_t t = 0; t < T; ++t) {
      ups[t].push_back(u[static_cast<std::size_t>(ms.zeta[t])]);
      chis[t].push_back(c[static_cast<std::size_t>(ms.zeta[t])]);
    }
  }
  auto point = [](const std::vector<double>& v) {
    return IndexPoint{std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()), quantile(v, 0.025),
                      quantile(v, 0.975)};
  };
  IndexSeries out;
  for (std::size_t t = 0; t < T; ++t) {
    out.upsilon.push_back(point(ups[t]));
    out.chi.push_back(point(chis[t]));
  }
  return out;
}

CoClusteringMatrix trader_coclustering(const std::vector<ModelState>& samples, std::size_t t) {
  std::vector<std::vector<int>> labels;
  labels.reserve(samples.size());
  for (const auto& ms : samples) labels.push_back(ms.states.at(static_cast<std::size_t>(ms.zeta.at(t))).xi.labels());
  return coclustering(labels);
}

CoClusteringMatrix state_coclustering(const std::vector<ModelState>& samples) {
  std::vector<std::vector<int>> labels;
  labels.reserve(samples.size());
  for (const auto& ms : samples) labels.push_back(ms.zeta);
  return coclustering(labels);
}

double PriorSpec::mean() const {
  switch (kind) {
    case Kind::Exponential: return p1;
    case Kind::Uniform01: return 0.5;
    case Kind::Beta: return p1 / (p1 + p2);
  }
  return 0.0;
}

double PriorSpec::quantile(double q) const {
  switch (kind) {
    case Kind::Exponential: return boost::math::quantile(boost::math::exponential_distribution<>(1.0 / p1), q);
    case Kind::Uniform01: return q;
    case Kind::Beta: return boost::math::quantile(boost::math::beta_distribution<>(p1, p2), q);
  }
  return 0.0;
}

namespace {

// "alpha@12" -> ("alpha", 12)
bool split_at(std::string_view name, std::string_view& head, std::size_t& t) {
  const auto pos = name.find('@');
  if (pos == std::string_view::npos) return false;
  head = name.substr(0, pos);
  const auto tail = name.substr(pos + 1);
  const auto r = std::from_chars(tail.data(), tail.data() + tail.size(), t);
  return r.ec == std::errc() && r.ptr == tail.data() + tail.size() && !tail.empty();
}

}  // namespace

std::vector<double> hyper_values(const std::vector<ModelState>& samples, std::string_view name) {
  std::vector<double> v;
  v.reserve(samples.size());
  std::string_view head;
  std::size_t t = 0;
  if (split_at(name, head, t) && (head == "alpha" || head == "beta")) {
    for (const auto& ms : samples) {
      if (t >= ms.zeta.size()) throw std::invalid_argument("hyper_values: period out of range");
      const auto& py = ms.states[static_cast<std::size_t>(ms.zeta[t])].py;
      v.push_back(head == "alpha" ? py.alpha : py.beta);
    }
    return v;
  }
  double RateHypers::*field = nullptr;
  if (name == "d_O") field = &RateHypers::d_off;
  else if (name == "e_O") field = &RateHypers::e_off;
  else if (name == "d_D") field = &RateHypers::d_diag;
  else if (name == "e_D") field = &RateHypers::e_diag;
  if (field) {
    for (const auto& ms : samples) v.push_back(ms.rates.*field);
    return v;
  }
  if (name == "gamma") {
    for (const auto& ms : samples) v.push_back(ms.gamma);
    return v;
  }
  throw std::invalid_argument("unknown hyperparameter name: " + std::string(name));
}

PriorSpec hyper_prior(std::string_view name, const HyperConfig& cfg) {
  std::string_view head = name;
  std::size_t t = 0;
  split_at(name, head, t);
  if (head == "gamma") return PriorSpec::exponential(cfg.gamma_prior_mean);
  if (head == "beta") return PriorSpec::exponential(cfg.beta_prior_mean);
  if (head == "alpha")
    return cfg.alpha_prior_a == 1.0 && cfg.alpha_prior_b == 1.0 ? PriorSpec::uniform01()
                                                                   : PriorSpec::beta(cfg.alpha_prior_a, cfg.alpha_prior_b);
  if (head == "d_O" || head == "d_D") return PriorSpec::exponential(cfg.lambda_d);
  if (head == "e_O" || head == "e_D") return PriorSpec::exponential(cfg.lambda_e);
  throw std::invalid_argument("unknown hyperparameter name: " + std::string(name));
}

HyperSummary hyper_summary(const std::vector<ModelState>& samples, std::string_view name, const PriorSpec& prior) {
  const auto v = hyper_values(samples, name);
  if (v.empty()) throw std::invalid_argument("hyper_summary: no samples");
  HyperSummary h;
  h.name = std::string(name);
  h.post_mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  h.post_lo = quantile(v, 0.025);
  h.post_hi = quantile(v, 0.975);
  h.prior_mean = prior.mean();
  h.prior_lo = prior.quantile(0.025);
  h.prior_hi = prior.quantile(0.975);
  return h;
}

std::string format_interval(double lo, double hi, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << '(' << lo << ", " << hi << ')';
  return os.str();
}

std::vector<HyperSummary> hyper_table(const std::vector<ModelState>& samples, const HyperConfig& cfg,
                                      const std::vector<std::size_t>& periods) {
  std::vector<std::string> names;
  for (auto t : periods) names.push_back("alpha@" + std::to_string(t));
  for (auto t : periods) names.push_back("beta@" + std::to_string(t));
  names.insert(names.end(), {"gamma", "d_O", "e_O", "d_D", "e_D"});
  std::vector<HyperSummary> out;
  for (const auto& nm : names) out.push_back(hyper_summary(samples, nm, hyper_prior(nm, cfg)));
  return out;
}

}  // namespace hmmsbm
