#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hmmsbm/blockmodel.hpp"

namespace hmmsbm {

/// 2x2 covariance of a bivariate random-walk proposal.
struct Cov2 {
  double var1 = 0.25;
  double var2 = 0.25;
  double cov = 0.0;
};

struct MhTuning {
  double kappa_gamma = 0.5;  // proposal sd on log(gamma)
  Cov2 sigma_ab_diag;        // on (log a_D, log b_D)
  Cov2 sigma_ab_off;         // on (log a_O, log b_O)
  Cov2 sigma_py{0.5, 0.5, 0.0};  // on (logit alpha, log(beta + alpha))
};

/// Prior and run settings of the blockmodel HMM.
struct HyperConfig {
  std::size_t max_states = 30;
  double c = 1.0;              // gamma shape of a_{s,.} and b_{s,.}
  double lambda_d = 2.0;       // prior mean of d_O and d_D (exponential)
  double lambda_e = 2.0;       // prior mean of e_O and e_D (exponential)
  double gamma_prior_mean = 1.0;
  double beta_prior_mean = 1.0;
  double alpha_prior_a = 1.0;  // alpha_s ~ Beta(a, b); (1,1) is uniform
  double alpha_prior_b = 1.0;
  MhTuning tuning;
  bool adapt = true;           // Robbins-Monro tuning during burn-in
  double target_acceptance = 0.35;

  std::size_t iters = 100000;  // post-burn-in iterations
  std::size_t burnin = 10000;
  std::size_t thin = 10;
  std::size_t init_segments = 10;  // contiguous blocks used to initialize the state path
  std::size_t fixed_path_sweeps = 100;  // first burn-in sweeps keep the initial path

  /// Throws std::invalid_argument on non-positive priors or max_states < 2.
  void validate() const;
};

struct StateParams {
  Partition xi;
  InteractionMatrix theta;
  PYParams py;
  BetaHyper bh;

  bool operator==(const StateParams& other) const = default;
};

/// Gamma rates of the a/b hyperpriors.
struct RateHypers {
  double d_off = 2.0;
  double e_off = 2.0;
  double d_diag = 2.0;
  double e_diag = 2.0;

  bool operator==(const RateHypers& other) const = default;
};

/// One MCMC iterate. States are 0-based; `states` and `pi` always cover all
/// max_states states, unoccupied ones carrying prior draws.
struct ModelState {
  std::vector<int> zeta;
  std::vector<StateParams> states;
  std::vector<double> pi;  // S x S row-major
  double gamma = 1.0;
  RateHypers rates;

  std::size_t max_states() const { return states.size(); }
  double transition(std::size_t r, std::size_t s) const { return pi[r * states.size() + s]; }
  std::vector<bool> occupied() const;
  std::size_t occupied_count() const;
  /// Weeks assigned to state s.
  std::vector<std::size_t> weeks_in(std::size_t s) const;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate(std::size_t n) const;

  bool operator==(const ModelState& other) const = default;
};

struct AcceptanceCounter {
  std::size_t proposed = 0;
  std::size_t accepted = 0;

  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct TraceScalars {
  std::size_t iteration = 0;
  double loglik = 0.0;
  std::size_t occupied_states = 0;
  double upsilon_mean = 0.0;
  double upsilon_var = 0.0;
  double chi_mean = 0.0;
  double chi_var = 0.0;
  // cumulative acceptance rates up to this iteration
  double acc_gamma = 0.0;
  double acc_ab_diag = 0.0;
  double acc_ab_off = 0.0;
  double acc_py = 0.0;
};

struct ChainTrace {
  std::vector<std::size_t> sample_iterations;
  std::vector<ModelState> samples;  // post-burn-in, thinned
  std::vector<double> sample_loglik;
  std::vector<TraceScalars> scalars;  // one per iteration, burn-in included
  AcceptanceCounter acc_gamma, acc_ab_diag, acc_ab_off, acc_py;  // post-burn-in only
  MhTuning final_tuning;
};

}  // namespace hmmsbm
