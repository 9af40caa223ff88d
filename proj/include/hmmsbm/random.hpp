#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hmmsbm {

// Every sampler takes the generator by reference; callers own the stream.
using Rng = std::mt19937_64;

// Mixes a base seed with a stream index (splitmix64 finalizer), used to derive
// independent streams for backtest folds and parallel chains.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

double runif(Rng& rng);
double rnorm(Rng& rng);
double rexp(Rng& rng, double rate);

// log of a Gamma(shape, 1) variate. Small shapes are handled through
// G(a) = G(a+1) U^{1/a} so the result never underflows.
double log_rgamma(Rng& rng, double shape);
double rgamma(Rng& rng, double shape, double rate);
double rbeta(Rng& rng, double a, double b);
std::vector<double> rdirichlet(Rng& rng, std::span<const double> alpha);

// Draws an index with probability proportional to exp(logw[k]).
std::size_t sample_log_weights(Rng& rng, std::span<const double> logw);
std::size_t sample_weights(Rng& rng, std::span<const double> w);

double log_sum_exp(std::span<const double> x);

}  // namespace hmmsbm
