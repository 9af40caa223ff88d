#include "hmmsbm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hmmsbm {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double runif(Rng& rng) {
  // 53 random bits, strictly inside (0,1)
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double rnorm(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double rexp(Rng& rng, double rate) { return -std::log(runif(rng)) / rate; }

double log_rgamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("log_rgamma: shape must be positive");
  if (shape < 1.0) {
    const double g = log_rgamma(rng, shape + 1.0);
    return g + std::log(runif(rng)) / shape;
  }
  std::gamma_distribution<double> dist(shape, 1.0);
  return std::log(dist(rng));
}

double rgamma(Rng& rng, double shape, double rate) {
  return std::exp(log_rgamma(rng, shape)) / rate;
}

double rbeta(Rng& rng, double a, double b) {
  const double la = log_rgamma(rng, a);
  const double lb = log_rgamma(rng, b);
  // a/(a+b) evaluated as a logistic of the log-ratio
  const double d = lb - la;
  return d > 0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
}

std::vector<double> rdirichlet(Rng& rng, std::span<const double> alpha) {
  std::vector<double> lg(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) lg[k] = log_rgamma(rng, alpha[k]);
  const double norm = log_sum_exp(lg);
  std::vector<double> out(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) out[k] = std::exp(lg[k] - norm);
  return out;
}

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

std::size_t sample_log_weights(Rng& rng, std::span<const double> logw) {
  const double m = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(m)) throw std::domain_error("sample_log_weights: no finite weight");
  double total = 0.0;
  for (double v : logw) total += std::exp(v - m);
  double u = runif(rng) * total;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    u -= std::exp(logw[k] - m);
    if (u <= 0.0) return k;
  }
  // rounding: return the last index with positive weight
  for (std::size_t k = logw.size(); k-- > 0;)
    if (std::isfinite(logw[k])) return k;
  return logw.size() - 1;
}

std::size_t sample_weights(Rng& rng, std::span<const double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw std::domain_error("sample_weights: weights sum to zero");
  double u = runif(rng) * total;
  for (std::size_t k = 0; k < w.size(); ++k) {
    u -= w[k];
    if (u <= 0.0) return k;
  }
  for (std::size_t k = w.size(); k-- > 0;)
    if (w[k] > 0.0) return k;
  return w.size() - 1;
}

}  // namespace hmmsbm
