#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hmmsbm/model.hpp"
#include "hmmsbm/network.hpp"
#include "hmmsbm/random.hpp"

namespace hmmsbm {

/// Network series preprocessed for the sampler: per-week edge lists plus a
/// dense bit lookup.
class Observations {
 public:
  explicit Observations(const NetworkSeries& series);

  std::size_t nodes() const { return n_; }
  std::size_t periods() const { return edges_.size(); }
  bool y(std::size_t t, std::size_t i, std::size_t j) const { return bits_[(t * n_ + i) * n_ + j] != 0; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges(std::size_t t) const { return edges_[t]; }
  /// n x n counts of links summed over the given weeks.
  std::vector<int> aggregate(const std::vector<std::size_t>& weeks) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> edges_;
  std::vector<std::uint8_t> bits_;
};

/// Link counts over the blocks A_{k,l,s}: ones and trials, K x K row-major.
struct BlockCounts {
  std::size_t blocks = 0;
  std::vector<double> ones;
  std::vector<double> trials;
};

BlockCounts block_counts(const Partition& xi, const std::vector<std::size_t>& weeks, const Observations& obs);

/// Entrywise Bernoulli log-likelihood over all (i != j, t).
double log_likelihood(const ModelState& ms, const Observations& obs);
/// Same quantity accumulated block by block over A_{k,l,s}.
double log_likelihood_blocked(const ModelState& ms, const Observations& obs);

/// T x S emission log-likelihoods log p(Y_t | state s).
std::vector<double> emission_log_likelihoods(const ModelState& ms, const Observations& obs);

/// Joint draw of the state path given every other parameter. Initial state
/// distribution is uniform.
std::vector<int> ffbs_zeta(const ModelState& ms, const Observations& obs, Rng& rng);

struct XiUpdate {
  Partition xi;
  InteractionMatrix theta;
};

/// One collapsed Gibbs sweep over the community labels of occupied state s,
/// with Theta_s integrated out, followed by a fresh Theta_s draw.
/// Throws std::invalid_argument when s is unoccupied.
XiUpdate collapsed_gibbs_xi(const ModelState& ms, std::size_t s, const Observations& obs, Rng& rng);

/// Posterior Beta parameters of every block of state s (first = a, second = b).
std::vector<std::pair<double, double>> theta_conditional(const ModelState& ms, std::size_t s,
                                                         const Observations& obs);
InteractionMatrix gibbs_update_theta(const ModelState& ms, std::size_t s, const Observations& obs, Rng& rng);

/// S x S transition counts n_rs over t >= 2.
std::vector<double> transition_counts(const std::vector<int>& zeta, std::size_t states);
/// Dirichlet parameters gamma/S + n_rs of every row.
std::vector<double> pi_conditional(const ModelState& ms);
std::vector<double> gibbs_update_pi(const ModelState& ms, Rng& rng);

template <class T>
struct MhStep {
  T value;
  bool accepted = false;
};

/// Log density of gamma given the state path, transition rows integrated out,
/// in the gamma scale (no Jacobian).
double log_gamma_target(double gamma, const std::vector<int>& zeta, std::size_t states, const HyperConfig& cfg);
/// Random walk on log(gamma) with standard deviation `kappa`.
MhStep<double> mh_update_gamma(const ModelState& ms, const HyperConfig& cfg, double kappa, Rng& rng);

enum class BlockKind { Diagonal, OffDiagonal };

/// Log density of one (a, b) pair of state s in the natural scale: gamma
/// hyperpriors times Beta-Bernoulli marginals of the blocks of that kind.
double log_beta_hyper_target(double a, double b, const ModelState& ms, std::size_t s, BlockKind kind,
                             const HyperConfig& cfg, const BlockCounts& counts);
/// Bivariate random walk on (log a, log b).
MhStep<std::pair<double, double>> mh_update_beta_hypers(const ModelState& ms, std::size_t s, BlockKind kind,
                                                        const HyperConfig& cfg, const Cov2& sigma,
                                                        const BlockCounts& counts, Rng& rng);

/// Log density of (alpha, beta) for partition xi in the natural scale:
/// priors times the EPPF.
double log_py_target(const PYParams& py, const Partition& xi, const HyperConfig& cfg);
/// Bivariate random walk on (logit alpha, log(beta + alpha)).
MhStep<PYParams> update_py_params(const Partition& xi, const PYParams& current, const HyperConfig& cfg,
                                  const Cov2& sigma, Rng& rng);

/// Gamma(shape, rate) conditionals of the four rate hyperparameters.
struct RateConditional {
  double shape = 1.0;
  RateHypers rate;
};
RateConditional rate_conditional(const ModelState& ms, const HyperConfig& cfg);
RateHypers gibbs_update_rate_hypers(const ModelState& ms, const HyperConfig& cfg, Rng& rng);

/// Draws every parameter of state s from the prior given the rate hypers.
StateParams draw_state_from_prior(std::size_t n, const RateHypers& rates, const HyperConfig& cfg, Rng& rng);

/// Single-chain sampler. A sweep runs, in order: collapsed xi + Theta updates
/// for occupied states, FFBS for zeta, gamma (Pi integrated out) then Pi,
/// (a, b) pairs with a Theta refresh and (alpha, beta) for occupied states,
/// rate hypers, and finally prior refresh of unoccupied states.
class Sampler {
 public:
  Sampler(const NetworkSeries& data, HyperConfig cfg, std::uint64_t seed);
  Sampler(const NetworkSeries& data, HyperConfig cfg, ModelState init, std::uint64_t seed);

  /// One full sweep. `adapt` enables Robbins-Monro tuning of the MH scales;
  /// with `update_path` false the state path is left as it is.
  void sweep(bool adapt, bool update_path = true);
  /// Replaces the observations (successive-conditional testing).
  void set_data(const NetworkSeries& data);

  const ModelState& state() const { return state_; }
  const HyperConfig& config() const { return cfg_; }
  const MhTuning& tuning() const { return tuning_; }
  const Observations& observations() const { return obs_; }
  Rng& rng() { return rng_; }

  AcceptanceCounter acc_gamma, acc_ab_diag, acc_ab_off, acc_py;

 private:
  void initialize();
  void adapt_scale(double& log_scale, bool accepted);

  Observations obs_;
  HyperConfig cfg_;
  MhTuning tuning_;
  ModelState state_;
  Rng rng_;
  std::size_t sweeps_ = 0;
  double log_scale_gamma_ = 0.0, log_scale_diag_ = 0.0, log_scale_off_ = 0.0, log_scale_py_ = 0.0;
};

/// Runs burn-in followed by cfg.iters iterations, storing every cfg.thin-th
/// post-burn-in state. Deterministic given the seed. Throws NumericalError
/// with a state dump when the log-likelihood becomes non-finite.
ChainTrace run_chain(const NetworkSeries& data, const HyperConfig& cfg, std::uint64_t seed);
ChainTrace run_chain(const NetworkSeries& data, HyperConfig cfg, std::size_t iters, std::size_t burnin,
                     std::size_t thin, std::uint64_t seed);

}  // namespace hmmsbm
