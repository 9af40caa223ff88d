#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "hmmsbm/random.hpp"

namespace hmmsbm {

/// Pairs of weekly summary statistics.
struct BivariateSeries {
  std::vector<std::string> periods;
  std::vector<Eigen::Vector2d> x;

  std::size_t size() const { return x.size(); }
  /// Throws std::invalid_argument on non-finite entries, T < 2 or a period
  /// count that differs from the data length.
  void validate() const;
};

/// CSV with header `period,x1,x2`.
BivariateSeries read_bivariate_csv(const std::filesystem::path& path);
void write_bivariate_csv(const BivariateSeries& s, const std::filesystem::path& path);

struct GaussHMMConfig {
  std::size_t states = 15;
  double gamma_star = 1.0;
  Eigen::Vector2d d_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d D_cov = Eigen::Matrix2d::Identity();
  double iw_df = 4.0;
  Eigen::Matrix2d iw_scale = Eigen::Matrix2d::Identity();
  std::size_t iters = 10000;
  std::size_t burnin = 1000;
  std::size_t thin = 1;

  /// Throws std::invalid_argument unless D_cov and iw_scale are symmetric
  /// positive definite, iw_df > 3 and states >= 1.
  void validate() const;
};

/// d = sample mean, D = B = sample covariance. A singular covariance (T = 2,
/// collinear or constant columns) is replaced by the diagonal of the sample
/// variances, with 1 for a constant column.
GaussHMMConfig default_config_from_data(const BivariateSeries& series);

struct GaussHMMState {
  std::vector<int> zeta;
  std::vector<Eigen::Vector2d> mu;
  std::vector<Eigen::Matrix2d> omega;
  std::vector<double> pi;  // R x R row-major
};

struct GaussHMMTrace {
  std::vector<GaussHMMState> samples;
};

struct NormalParams {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
};

/// Inverse-Wishart with density proportional to
/// |Omega|^{-(df+3)/2} exp(-tr(scale Omega^{-1}) / 2).
struct IWParams {
  double df;
  Eigen::Matrix2d scale;
};

/// mu | Omega, x ~ N(V (D^{-1} d + Omega^{-1} sum x), V), V = (D^{-1} + n Omega^{-1})^{-1}.
NormalParams mu_conditional(const std::vector<Eigen::Vector2d>& xs, const Eigen::Matrix2d& omega,
                            const GaussHMMConfig& cfg);
/// Omega | mu, x ~ IW(df + n, scale + sum (x - mu)(x - mu)').
IWParams omega_conditional(const std::vector<Eigen::Vector2d>& xs, const Eigen::Vector2d& mu,
                           const GaussHMMConfig& cfg);

double mvn_log_density(const Eigen::Vector2d& x, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov);
double iw_log_density(const Eigen::Matrix2d& omega, const IWParams& p);
Eigen::Vector2d sample_mvn(const NormalParams& p, Rng& rng);
Eigen::Matrix2d sample_iw(const IWParams& p, Rng& rng);

/// Gibbs sampler: mu then Omega for each occupied state, prior draws for the
/// others, FFBS for the path, then transition rows from Dirichlet(gamma*/R + counts).
/// Throws NumericalError on a non-finite emission.
GaussHMMTrace run_gauss_hmm(const BivariateSeries& series, const GaussHMMConfig& cfg, std::uint64_t seed);

/// T x T fraction of samples in which periods t and t' share a state.
std::vector<std::vector<double>> pairwise_incidence(const GaussHMMTrace& trace);

}  // namespace hmmsbm
