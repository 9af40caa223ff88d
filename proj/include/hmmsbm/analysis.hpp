#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmmsbm/model.hpp"

namespace hmmsbm {

/// Symmetric matrix of pairwise co-clustering probabilities, row-major.
struct CoClusteringMatrix {
  std::size_t dim = 0;
  std::vector<double> omega;

  double operator()(std::size_t i, std::size_t j) const { return omega[i * dim + j]; }
  std::vector<std::vector<double>> rows() const;
  static CoClusteringMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

/// Fraction of label vectors in which each pair of positions agrees.
/// Throws std::invalid_argument on empty input or unequal lengths.
CoClusteringMatrix coclustering(const std::vector<std::vector<int>>& label_samples);

/// Sum over i < j of |1{same block} - omega_ij|.
double binder_loss(std::span<const int> labels, const CoClusteringMatrix& omega);

/// Binder-loss point partition: greedy agglomeration of the pair with the
/// most negative merge cost, then single-element moves until no move lowers
/// the loss (lowest index wins ties). Up to 9 items the search is exhaustive.
/// Labels are canonical (first appearance, 0-based).
std::vector<int> point_partition(const CoClusteringMatrix& omega);

/// Every set partition of n items as canonical label vectors (restricted
/// growth strings), in lexicographic order.
std::vector<std::vector<int>> enumerate_partitions(std::size_t n);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Positions t >= 1 with labels[t] != labels[t-1].
std::vector<std::size_t> change_points(std::span<const int> labels);

/// Long-run variance of a series: autocovariances with modified Bartlett
/// weights 1 - k/(w+1), k = 1..w, w = floor(sqrt(length)).
double spectral_variance(std::span<const double> x);

struct GewekeResult {
  double z = 0.0;
  double mean_a = 0.0, mean_b = 0.0;
  double var_a = 0.0, var_b = 0.0;  // variances of the segment means
};

/// Compares the first frac_a of the series with the last frac_b. Throws
/// std::invalid_argument for fewer than 100 values or bad fractions.
GewekeResult geweke(std::span<const double> x, double frac_a = 0.1, double frac_b = 0.5);
double geweke_z(std::span<const double> x, double frac_a = 0.1, double frac_b = 0.5);

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct IndexPoint {
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

struct IndexSeries {
  std::vector<IndexPoint> upsilon;
  std::vector<IndexPoint> chi;
};

/// Per-period posterior mean and central 95% interval of the assortativity
/// and transitivity indices of the state occupied at each period.
IndexSeries index_series(const std::vector<ModelState>& samples);

/// Trader co-clustering at period t, each sample using the partition of its
/// own state at t.
CoClusteringMatrix trader_coclustering(const std::vector<ModelState>& samples, std::size_t t);
CoClusteringMatrix state_coclustering(const std::vector<ModelState>& samples);

struct PriorSpec {
  enum class Kind { Exponential, Uniform01, Beta };
  Kind kind = Kind::Exponential;
  double p1 = 1.0;  // exponential mean, or Beta a
  double p2 = 1.0;  // Beta b

  static PriorSpec exponential(double mean) { return {Kind::Exponential, mean, 1.0}; }
  static PriorSpec uniform01() { return {Kind::Uniform01, 0.0, 1.0}; }
  static PriorSpec beta(double a, double b) { return {Kind::Beta, a, b}; }

  double mean() const;
  double quantile(double q) const;
};

struct HyperSummary {
  std::string name;
  double post_mean = 0.0, post_lo = 0.0, post_hi = 0.0;
  double prior_mean = 0.0, prior_lo = 0.0, prior_hi = 0.0;
};

/// Scalar draws of a named hyperparameter: "gamma", "d_O", "e_O", "d_D",
/// "e_D", or "alpha@t" / "beta@t" for the state occupied at 0-based period t.
/// Throws std::invalid_argument for an unknown name.
std::vector<double> hyper_values(const std::vector<ModelState>& samples, std::string_view name);
/// Prior of a named hyperparameter under cfg.
PriorSpec hyper_prior(std::string_view name, const HyperConfig& cfg);
HyperSummary hyper_summary(const std::vector<ModelState>& samples, std::string_view name, const PriorSpec& prior);
/// "(lo, hi)" with fixed decimals, as printed in summary tables.
std::string format_interval(double lo, double hi, int digits = 3);

/// alpha@t for each requested period, then beta@t, then gamma and the four rates.
std::vector<HyperSummary> hyper_table(const std::vector<ModelState>& samples, const HyperConfig& cfg,
                                      const std::vector<std::size_t>& periods);

}  // namespace hmmsbm
