#include "hmmsbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hmmsbm/errors.hpp"
#include "hmmsbm/ffbs.hpp"

namespace hmmsbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kThetaFloor = 1e-12;

double clamp_theta(double th) { return std::clamp(th, kThetaFloor, 1.0 - kThetaFloor); }

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// Lower Cholesky factor of a 2x2 covariance applied to two standard normals.
std::pair<double, double> correlated_step(const Cov2& c, double scale, Rng& rng) {
  const double z1 = rnorm(rng), z2 = rnorm(rng);
  const double l11 = std::sqrt(std::max(c.var1, 0.0));
  const double l21 = l11 > 0.0 ? c.cov / l11 : 0.0;
  const double l22 = std::sqrt(std::max(c.var2 - l21 * l21, 0.0));
  return {scale * l11 * z1, scale * (l21 * z1 + l22 * z2)};
}

bool metropolis_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  return log_ratio >= 0.0 || std::log(runif(rng)) < log_ratio;
}

InteractionMatrix draw_theta(const BlockCounts& counts, const BetaHyper& bh, Rng& rng) {
  const std::size_t K = counts.blocks;
  InteractionMatrix th(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) {
      const double a = k == l ? bh.a_diag : bh.a_off;
      const double b = k == l ? bh.b_diag : bh.b_off;
      const double ones = counts.ones[k * K + l];
      th(k, l) = rbeta(rng, ones + a, counts.trials[k * K + l] - ones + b);
    }
  return th;
}

// log theta and log(1 - theta) tables of one state.
struct LogTheta {
  std::size_t K = 0;
  std::vector<double> log_on, log_off;
};

LogTheta log_tables(const InteractionMatrix& th) {
  LogTheta lt;
  lt.K = th.blocks();
  lt.log_on.resize(lt.K * lt.K);
  lt.log_off.resize(lt.K * lt.K);
  for (std::size_t k = 0; k < lt.K; ++k)
    for (std::size_t l = 0; l < lt.K; ++l) {
      const double q = clamp_theta(th(k, l));
      lt.log_on[k * lt.K + l] = std::log(q);
      lt.log_off[k * lt.K + l] = std::log1p(-q);
    }
  return lt;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration and state checks

void HyperConfig::validate() const {
  if (max_states < 2) throw std::invalid_argument("max_states must be at least 2");
  if (!(c > 0 && lambda_d > 0 && lambda_e > 0 && gamma_prior_mean > 0 && beta_prior_mean > 0 &&
        alpha_prior_a > 0 && alpha_prior_b > 0))
    throw std::invalid_argument("prior hyperparameters must be positive");
  if (!(tuning.kappa_gamma >= 0)) throw std::invalid_argument("kappa_gamma must be non-negative");
  if (thin == 0) throw std::invalid_argument("thin must be positive");
  if (!(target_acceptance > 0 && target_acceptance < 1))
    throw std::invalid_argument("target_acceptance must lie in (0,1)");
}

std::vector<bool> ModelState::occupied() const {
  std::vector<bool> occ(states.size(), false);
  for (int z : zeta) occ[static_cast<std::size_t>(z)] = true;
  return occ;
}

std::size_t ModelState::occupied_count() const {
  const auto occ = occupied();
  return static_cast<std::size_t>(std::count(occ.begin(), occ.end(), true));
}

std::vector<std::size_t> ModelState::weeks_in(std::size_t s) const {
  std::vector<std::size_t> w;
  for (std::size_t t = 0; t < zeta.size(); ++t)
    if (static_cast<std::size_t>(zeta[t]) == s) w.push_back(t);
  return w;
}

void ModelState::validate(std::size_t n) const {
  const std::size_t S = states.size();
  if (S < 1 || pi.size() != S * S) throw std::invalid_argument("transition matrix has wrong size");
  for (int z : zeta)
    if (z < 0 || static_cast<std::size_t>(z) >= S) throw std::invalid_argument("state label out of range");
  for (std::size_t r = 0; r < S; ++r) {
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      if (pi[r * S + s] < 0) throw std::invalid_argument("negative transition probability");
      sum += pi[r * S + s];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("transition row does not sum to 1");
  }
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (!(rates.d_off > 0 && rates.e_off > 0 && rates.d_diag > 0 && rates.e_diag > 0))
    throw std::invalid_argument("rate hyperparameters must be positive");
  for (const auto& st : states) {
    if (st.xi.size() != n) throw std::invalid_argument("partition size differs from node count");
    if (st.theta.blocks() != st.xi.blocks()) throw std::invalid_argument("theta dimension differs from block count");
    for (double q : st.theta.values())
      if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("theta outside [0,1]");
    st.py.check();
    st.bh.check();
  }
}

// ---------------------------------------------------------------------------
// data and likelihood

Observations::Observations(const NetworkSeries& series) {
  series.validate();
  n_ = series.nodes();
  edges_.resize(series.size());
  bits_.assign(series.size() * n_ * n_, 0);
  for (std::size_t t = 0; t < series.size(); ++t) {
    edges_[t] = series.matrices[t].edges();
    for (auto [i, j] : edges_[t]) bits_[(t * n_ + i) * n_ + j] = 1;
  }
}

std::vector<int> Observations::aggregate(const std::vector<std::size_t>& weeks) const {
  std::vector<int> y(n_ * n_, 0);
  for (std::size_t t : weeks)
    for (auto [i, j] : edges_[t]) ++y[i * n_ + j];
  return y;
}

BlockCounts block_counts(const Partition& xi, const std::vector<std::size_t>& weeks, const Observations& obs) {
  BlockCounts bc;
  const std::size_t K = xi.blocks();
  bc.blocks = K;
  bc.ones.assign(K * K, 0.0);
  bc.trials.assign(K * K, 0.0);
  for (std::size_t t : weeks)
    for (auto [i, j] : obs.edges(t))
      bc.ones[static_cast<std::size_t>(xi.label(i)) * K + static_cast<std::size_t>(xi.label(j))] += 1.0;
  const double nw = static_cast<double>(weeks.size());
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) {
      const double mk = static_cast<double>(xi.sizes()[k]), ml = static_cast<double>(xi.sizes()[l]);
      bc.trials[k * K + l] = nw * (k == l ? mk * (mk - 1.0) : mk * ml);
    }
  return bc;
}

double log_likelihood(const ModelState& ms, const Observations& obs) {
  const std::size_t n = obs.nodes();
  if (ms.zeta.size() != obs.periods()) throw std::invalid_argument("state path length differs from T");
  double ll = 0.0;
  for (std::size_t t = 0; t < obs.periods(); ++t) {
    const auto& st = ms.states.at(static_cast<std::size_t>(ms.zeta[t]));
    if (st.xi.size() != n) throw std::invalid_argument("partition size differs from node count");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = clamp_theta(st.theta(static_cast<std::size_t>(st.xi.label(i)),
                                              static_cast<std::size_t>(st.xi.label(j))));
        ll += obs.y(t, i, j) ? std::log(q) : std::log1p(-q);
      }
  }
  return ll;
}

double log_likelihood_blocked(const ModelState& ms, const Observations& obs) {
  if (ms.zeta.size() != obs.periods()) throw std::invalid_argument("state path length differs from T");
  const auto occ = ms.occupied();
  double ll = 0.0;
  for (std::size_t s = 0; s < ms.max_states(); ++s) {
    if (!occ[s]) continue;
    const auto& st = ms.states[s];
    if (st.xi.size() != obs.nodes()) throw std::invalid_argument("partition size differs from node count");
    const auto bc = block_counts(st.xi, ms.weeks_in(s), obs);
    const auto lt = log_tables(st.theta);
    for (std::size_t b = 0; b < bc.blocks * bc.blocks; ++b)
      ll += bc.ones[b] * lt.log_on[b] + (bc.trials[b] - bc.ones[b]) * lt.log_off[b];
  }
  return ll;
}

std::vector<double> emission_log_likelihoods(const ModelState& ms, const Observations& obs) {
  const std::size_t S = ms.max_states(), T = obs.periods(), n = obs.nodes();
  std::vector<double> e(T * S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& st = ms.states[s];
    if (st.xi.size() != n) throw std::invalid_argument("partition size differs from node count");
    const auto lt = log_tables(st.theta);
    const std::size_t K = lt.K;
    // log-likelihood of an empty week, then a per-edge correction
    double empty = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < K; ++l) {
        const double mk = static_cast<double>(st.xi.sizes()[k]), ml = static_cast<double>(st.xi.sizes()[l]);
        empty += (k == l ? mk * (mk - 1.0) : mk * ml) * lt.log_off[k * K + l];
      }
    for (std::size_t t = 0; t < T; ++t) {
      double v = empty;
      for (auto [i, j] : obs.edges(t)) {
        const std::size_t b = static_cast<std::size_t>(st.xi.label(i)) * K + static_cast<std::size_t>(st.xi.label(j));
        v += lt.log_on[b] - lt.log_off[b];
      }
      e[t * S + s] = v;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// state path

std::vector<int> ffbs_zeta(const ModelState& ms, const Observations& obs, Rng& rng) {
  const std::size_t S = ms.max_states();
  HmmLogTerms hmm;
  hmm.states = S;
  hmm.periods = obs.periods();
  hmm.log_initial.assign(S, -std::log(static_cast<double>(S)));
  hmm.log_transition.resize(S * S);
  for (std::size_t k = 0; k < S * S; ++k) hmm.log_transition[k] = safe_log(ms.pi[k]);
  hmm.log_emission = emission_log_likelihoods(ms, obs);
  return ffbs_sample(hmm, rng);
}

// ---------------------------------------------------------------------------
// community labels, step (a)

XiUpdate collapsed_gibbs_xi(const ModelState& ms, std::size_t s, const Observations& obs, Rng& rng) {
  const auto weeks = ms.weeks_in(s);
  if (weeks.empty()) throw std::invalid_argument("collapsed_gibbs_xi: state is unoccupied");
  const std::size_t n = obs.nodes();
  const auto& st = ms.states[s];
  if (st.xi.size() != n) throw std::invalid_argument("partition size differs from node count");
  const auto y = obs.aggregate(weeks);
  const double nw = static_cast<double>(weeks.size());
  const BetaHyper& h = st.bh;
  const double alpha = st.py.alpha, beta = st.py.beta;

  std::vector<int> labels = st.xi.labels();
  std::vector<double> sizes(st.xi.sizes().begin(), st.xi.sizes().end());
  std::size_t K = sizes.size();
  // ones per block, stored with capacity n x n so blocks can be added in place
  std::vector<double> ones(n * n, 0.0);
  auto at = [&](std::size_t k, std::size_t l) -> double& { return ones[k * n + l]; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (y[i * n + j]) at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(labels[j])) += y[i * n + j];

  auto trials = [&](std::size_t k, std::size_t l) {
    return nw * (k == l ? sizes[k] * (sizes[k] - 1.0) : sizes[k] * sizes[l]);
  };
  auto marginal = [&](double o, double tot, bool diag) {
    return diag ? beta_bernoulli_marginal(o, tot, h.a_diag, h.b_diag)
                : beta_bernoulli_marginal(o, tot, h.a_off, h.b_off);
  };

  std::vector<double> out_to(n), in_from(n), logw(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k0 = static_cast<std::size_t>(labels[i]);
    // links between i and each block, excluding i itself
    std::fill(out_to.begin(), out_to.begin() + static_cast<std::ptrdiff_t>(K), 0.0);
    std::fill(in_from.begin(), in_from.begin() + static_cast<std::ptrdiff_t>(K), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto l = static_cast<std::size_t>(labels[j]);
      out_to[l] += y[i * n + j];
      in_from[l] += y[j * n + i];
    }
    // remove i
    for (std::size_t l = 0; l < K; ++l) {
      at(k0, l) -= out_to[l];
      at(l, k0) -= in_from[l];
    }
    sizes[k0] -= 1.0;
    if (sizes[k0] == 0.0) {
      // close the empty block by moving the last block into its slot
      const std::size_t last = K - 1;
      if (k0 != last) {
        for (std::size_t l = 0; l < K; ++l) {
          at(k0, l) = at(last, l);
          at(l, k0) = at(l, last);
        }
        at(k0, k0) = at(last, last);
        sizes[k0] = sizes[last];
        out_to[k0] = out_to[last];
        in_from[k0] = in_from[last];
        for (auto& lab : labels)
          if (static_cast<std::size_t>(lab) == last) lab = static_cast<int>(k0);
      }
      for (std::size_t l = 0; l < K; ++l) at(last, l) = at(l, last) = 0.0;
      sizes.pop_back();
      --K;
    }

    for (std::size_t k = 0; k < K; ++k) {
      double lw = std::log(sizes[k] - alpha);
      for (std::size_t l = 0; l < K; ++l) {
        if (l == k) {
          const double o = at(k, k), tot = trials(k, k);
          lw += marginal(o + out_to[k] + in_from[k], tot + 2.0 * nw * sizes[k], true) - marginal(o, tot, true);
        } else {
          const double add = nw * sizes[l];
          lw += marginal(at(k, l) + out_to[l], trials(k, l) + add, false) - marginal(at(k, l), trials(k, l), false);
          lw += marginal(at(l, k) + in_from[l], trials(l, k) + add, false) - marginal(at(l, k), trials(l, k), false);
        }
      }
      logw[k] = lw;
    }
    {
      double lw = std::log(beta + alpha * static_cast<double>(K));
      for (std::size_t l = 0; l < K; ++l) {
        lw += marginal(out_to[l], nw * sizes[l], false);
        lw += marginal(in_from[l], nw * sizes[l], false);
      }
      logw[K] = lw;
    }
    const std::size_t k = sample_log_weights(rng, std::span<const double>(logw.data(), K + 1));
    if (k == K) {
      sizes.push_back(0.0);
      out_to[K] = in_from[K] = 0.0;
      ++K;
    }
    labels[i] = static_cast<int>(k);
    for (std::size_t l = 0; l < K; ++l) {
      at(k, l) += out_to[l];
      at(l, k) += in_from[l];
    }
    sizes[k] += 1.0;
  }

  XiUpdate up{Partition(labels), {}};
  up.theta = draw_theta(block_counts(up.xi, weeks, obs), h, rng);
  return up;
}

// ---------------------------------------------------------------------------
// conjugate steps (b), (c), (g)

std::vector<std::pair<double, double>> theta_conditional(const ModelState& ms, std::size_t s,
                                                         const Observations& obs) {
  const auto& st = ms.states.at(s);
  const auto bc = block_counts(st.xi, ms.weeks_in(s), obs);
  const std::size_t K = bc.blocks;
  std::vector<std::pair<double, double>> out(K * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) {
      const double a = k == l ? st.bh.a_diag : st.bh.a_off;
      const double b = k == l ? st.bh.b_diag : st.bh.b_off;
      const double o = bc.ones[k * K + l];
      out[k * K + l] = {o + a, bc.trials[k * K + l] - o + b};
    }
  return out;
}

InteractionMatrix gibbs_update_theta(const ModelState& ms, std::size_t s, const Observations& obs, Rng& rng) {
  const auto& st = ms.states.at(s);
  return draw_theta(block_counts(st.xi, ms.weeks_in(s), obs), st.bh, rng);
}

std::vector<double> transition_counts(const std::vector<int>& zeta, std::size_t states) {
  std::vector<double> c(states * states, 0.0);
  for (std::size_t t = 1; t < zeta.size(); ++t)
    c[static_cast<std::size_t>(zeta[t - 1]) * states + static_cast<std::size_t>(zeta[t])] += 1.0;
  return c;
}

std::vector<double> pi_conditional(const ModelState& ms) {
  const std::size_t S = ms.max_states();
  auto c = transition_counts(ms.zeta, S);
  const double base = ms.gamma / static_cast<double>(S);
  for (double& v : c) v += base;
  return c;
}

std::vector<double> gibbs_update_pi(const ModelState& ms, Rng& rng) {
  const std::size_t S = ms.max_states();
  const auto par = pi_conditional(ms);
  std::vector<double> pi(S * S);
  for (std::size_t r = 0; r < S; ++r) {
    const auto row = rdirichlet(rng, std::span<const double>(par.data() + r * S, S));
    std::copy(row.begin(), row.end(), pi.begin() + static_cast<std::ptrdiff_t>(r * S));
  }
  return pi;
}

RateConditional rate_conditional(const ModelState& ms, const HyperConfig& cfg) {
  const auto occ = ms.occupied();
  RateConditional rc;
  rc.rate = {1.0 / cfg.lambda_d, 1.0 / cfg.lambda_e, 1.0 / cfg.lambda_d, 1.0 / cfg.lambda_e};
  double occupied = 0.0;
  for (std::size_t s = 0; s < ms.max_states(); ++s) {
    if (!occ[s]) continue;
    occupied += 1.0;
    const auto& bh = ms.states[s].bh;
    rc.rate.d_off += bh.a_off;
    rc.rate.e_off += bh.b_off;
    rc.rate.d_diag += bh.a_diag;
    rc.rate.e_diag += bh.b_diag;
  }
  rc.shape = cfg.c * occupied + 1.0;
  return rc;
}

RateHypers gibbs_update_rate_hypers(const ModelState& ms, const HyperConfig& cfg, Rng& rng) {
  const auto rc = rate_conditional(ms, cfg);
  return {rgamma(rng, rc.shape, rc.rate.d_off), rgamma(rng, rc.shape, rc.rate.e_off),
          rgamma(rng, rc.shape, rc.rate.d_diag), rgamma(rng, rc.shape, rc.rate.e_diag)};
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings steps (d), (e), (f)

double log_gamma_target(double gamma, const std::vector<int>& zeta, std::size_t states, const HyperConfig& cfg) {
  if (!(gamma > 0.0)) return kNegInf;
  const double S = static_cast<double>(states);
  const auto c = transition_counts(zeta, states);
  double lp = -gamma / cfg.gamma_prior_mean;
  const double g0 = gamma / S;
  const double lg0 = std::lgamma(g0);
  for (std::size_t r = 0; r < states; ++r) {
    double nr = 0.0;
    for (std::size_t s = 0; s < states; ++s) nr += c[r * states + s];
    if (nr == 0.0) continue;
    lp += std::lgamma(gamma) - std::lgamma(gamma + nr);
    for (std::size_t s = 0; s < states; ++s)
      if (c[r * states + s] > 0.0) lp += std::lgamma(g0 + c[r * states + s]) - lg0;
  }
  return lp;
}

MhStep<double> mh_update_gamma(const ModelState& ms, const HyperConfig& cfg, double kappa, Rng& rng) {
  const double cur = ms.gamma;
  const double prop = cur * std::exp(kappa * rnorm(rng));
  const std::size_t S = ms.max_states();
  // log-scale random walk: the Jacobian adds log(gamma) to each side
  const double lr = log_gamma_target(prop, ms.zeta, S, cfg) + std::log(prop) -
                    log_gamma_target(cur, ms.zeta, S, cfg) - std::log(cur);
  if (metropolis_accept(lr, rng)) return {prop, true};
  return {cur, false};
}

double log_beta_hyper_target(double a, double b, const ModelState& ms, std::size_t /*s*/, BlockKind kind,
                             const HyperConfig& cfg, const BlockCounts& counts) {
  if (!(a > 0.0 && b > 0.0)) return kNegInf;
  const bool diag = kind == BlockKind::Diagonal;
  const double d = diag ? ms.rates.d_diag : ms.rates.d_off;
  const double e = diag ? ms.rates.e_diag : ms.rates.e_off;
  double lp = (cfg.c - 1.0) * std::log(a) - d * a + (cfg.c - 1.0) * std::log(b) - e * b;
  const std::size_t K = counts.blocks;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) {
      if ((k == l) != diag) continue;
      lp += beta_bernoulli_marginal(counts.ones[k * K + l], counts.trials[k * K + l], a, b);
    }
  return lp;
}

MhStep<std::pair<double, double>> mh_update_beta_hypers(const ModelState& ms, std::size_t s, BlockKind kind,
                                                        const HyperConfig& cfg, const Cov2& sigma,
                                                        const BlockCounts& counts, Rng& rng) {
  const auto& bh = ms.states.at(s).bh;
  const bool diag = kind == BlockKind::Diagonal;
  const double a = diag ? bh.a_diag : bh.a_off;
  const double b = diag ? bh.b_diag : bh.b_off;
  const auto [da, db] = correlated_step(sigma, 1.0, rng);
  const double ap = a * std::exp(da), bp = b * std::exp(db);
  const double lr = log_beta_hyper_target(ap, bp, ms, s, kind, cfg, counts) + std::log(ap) + std::log(bp) -
                    log_beta_hyper_target(a, b, ms, s, kind, cfg, counts) - std::log(a) - std::log(b);
  if (metropolis_accept(lr, rng)) return {{ap, bp}, true};
  return {{a, b}, false};
}

double log_py_target(const PYParams& py, const Partition& xi, const HyperConfig& cfg) {
  if (!py.valid() || py.beta < 0.0) return kNegInf;
  double lp = 0.0;
  if (cfg.alpha_prior_a != 1.0) lp += (cfg.alpha_prior_a - 1.0) * std::log(py.alpha);
  if (cfg.alpha_prior_b != 1.0) lp += (cfg.alpha_prior_b - 1.0) * std::log1p(-py.alpha);
  lp += -py.beta / cfg.beta_prior_mean;
  return lp + eppf_log_prob(xi, py);
}

MhStep<PYParams> update_py_params(const Partition& xi, const PYParams& current, const HyperConfig& cfg,
                                  const Cov2& sigma, Rng& rng) {
  const double a = std::clamp(current.alpha, 1e-12, 1.0 - 1e-12);
  const PYParams cur{a, std::max(current.beta, -a + 1e-300)};
  // coordinates u = logit(alpha), v = log(beta + alpha)
  const double u = std::log(cur.alpha) - std::log1p(-cur.alpha);
  const double v = std::log(cur.beta + cur.alpha);
  const auto [du, dv] = correlated_step(sigma, 1.0, rng);
  const double up = u + du, vp = v + dv;
  PYParams prop;
  prop.alpha = 1.0 / (1.0 + std::exp(-up));
  prop.beta = std::exp(vp) - prop.alpha;
  if (!(prop.alpha > 0.0 && prop.alpha < 1.0)) return {current, false};
  // |d(alpha, beta)/d(u, v)| = alpha (1 - alpha) (beta + alpha)
  auto log_jac = [](const PYParams& p) { return std::log(p.alpha) + std::log1p(-p.alpha) + std::log(p.beta + p.alpha); };
  const double lt_prop = log_py_target(prop, xi, cfg);
  if (!std::isfinite(lt_prop)) {
    runif(rng);  // keep the stream aligned with an evaluated proposal
    return {current, false};
  }
  const double lr = lt_prop + log_jac(prop) - log_py_target(cur, xi, cfg) - log_jac(cur);
  if (metropolis_accept(lr, rng)) return {prop, true};
  return {current, false};
}

// ---------------------------------------------------------------------------
// prior draws

StateParams draw_state_from_prior(std::size_t n, const RateHypers& rates, const HyperConfig& cfg, Rng& rng) {
  StateParams st;
  st.py.alpha = std::min(rbeta(rng, cfg.alpha_prior_a, cfg.alpha_prior_b), 1.0 - 1e-12);
  st.py.beta = rexp(rng, 1.0 / cfg.beta_prior_mean);
  st.xi = sample_partition(n, st.py, rng);
  st.bh.a_off = rgamma(rng, cfg.c, rates.d_off);
  st.bh.b_off = rgamma(rng, cfg.c, rates.e_off);
  st.bh.a_diag = rgamma(rng, cfg.c, rates.d_diag);
  st.bh.b_diag = rgamma(rng, cfg.c, rates.e_diag);
  st.theta = sample_interactions(st.xi.blocks(), st.bh, rng);
  return st;
}

// ---------------------------------------------------------------------------
// sampler

Sampler::Sampler(const NetworkSeries& data, HyperConfig cfg, std::uint64_t seed)
    : obs_(data), cfg_(std::move(cfg)), tuning_(cfg_.tuning), rng_(seed) {
  cfg_.validate();
  initialize();
}

Sampler::Sampler(const NetworkSeries& data, HyperConfig cfg, ModelState init, std::uint64_t seed)
    : obs_(data), cfg_(std::move(cfg)), tuning_(cfg_.tuning), state_(std::move(init)), rng_(seed) {
  cfg_.validate();
  if (state_.max_states() != cfg_.max_states)
    throw std::invalid_argument("initial state has a different number of states than the config");
  if (state_.zeta.size() != obs_.periods()) throw std::invalid_argument("initial state path length differs from T");
  state_.validate(obs_.nodes());
}

void Sampler::set_data(const NetworkSeries& data) {
  Observations obs(data);
  if (obs.periods() != obs_.periods() || obs.nodes() != obs_.nodes())
    throw std::invalid_argument("replacement data must keep n and T");
  obs_ = std::move(obs);
}

void Sampler::initialize() {
  const std::size_t S = cfg_.max_states, T = obs_.periods(), n = obs_.nodes();
  state_.gamma = cfg_.gamma_prior_mean;
  state_.rates = {cfg_.lambda_d, cfg_.lambda_e, cfg_.lambda_d, cfg_.lambda_e};
  const std::size_t segments = std::clamp<std::size_t>(cfg_.init_segments, 1, std::min(S, T));
  state_.zeta.resize(T);
  for (std::size_t t = 0; t < T; ++t) state_.zeta[t] = static_cast<int>(t * segments / T);

  state_.states.resize(S);
  const auto occ = state_.occupied();
  for (std::size_t s = 0; s < S; ++s) {
    if (!occ[s]) {
      state_.states[s] = draw_state_from_prior(n, state_.rates, cfg_, rng_);
      continue;
    }
    auto& st = state_.states[s];
    st.py = {cfg_.alpha_prior_a / (cfg_.alpha_prior_a + cfg_.alpha_prior_b), cfg_.beta_prior_mean};
    st.bh = {1.0, 1.0, 1.0, 1.0};
    st.xi = Partition::singletons(n);
    st.theta = gibbs_update_theta(state_, s, obs_, rng_);
  }
  state_.pi = gibbs_update_pi(state_, rng_);
}

void Sampler::adapt_scale(double& log_scale, bool accepted) {
  const double step = 1.0 / std::pow(static_cast<double>(sweeps_) + 1.0, 0.6);
  log_scale += step * ((accepted ? 1.0 : 0.0) - cfg_.target_acceptance);
  log_scale = std::clamp(log_scale, -10.0, 5.0);
}

void Sampler::sweep(bool adapt, bool update_path) {
  const std::size_t S = state_.max_states(), n = obs_.nodes();

  auto occ = state_.occupied();
  for (std::size_t s = 0; s < S; ++s) {
    if (!occ[s]) continue;
    auto up = collapsed_gibbs_xi(state_, s, obs_, rng_);
    state_.states[s].xi = std::move(up.xi);
    state_.states[s].theta = std::move(up.theta);
  }

  if (update_path) state_.zeta = ffbs_zeta(state_, obs_, rng_);

  {
    const auto g = mh_update_gamma(state_, cfg_, cfg_.tuning.kappa_gamma * std::exp(log_scale_gamma_), rng_);
    state_.gamma = g.value;
    acc_gamma.record(g.accepted);
    if (adapt) adapt_scale(log_scale_gamma_, g.accepted);
  }
  state_.pi = gibbs_update_pi(state_, rng_);

  auto scaled = [](Cov2 c, double log_scale) {
    const double f = std::exp(2.0 * log_scale);
    return Cov2{c.var1 * f, c.var2 * f, c.cov * f};
  };
  const Cov2 sig_diag = scaled(cfg_.tuning.sigma_ab_diag, log_scale_diag_);
  const Cov2 sig_off = scaled(cfg_.tuning.sigma_ab_off, log_scale_off_);
  const Cov2 sig_py = scaled(cfg_.tuning.sigma_py, log_scale_py_);

  occ = state_.occupied();
  for (std::size_t s = 0; s < S; ++s) {
    if (!occ[s]) continue;
    const auto weeks = state_.weeks_in(s);
    const auto counts = block_counts(state_.states[s].xi, weeks, obs_);
    {
      const auto r = mh_update_beta_hypers(state_, s, BlockKind::Diagonal, cfg_, sig_diag, counts, rng_);
      state_.states[s].bh.a_diag = r.value.first;
      state_.states[s].bh.b_diag = r.value.second;
      acc_ab_diag.record(r.accepted);
      if (adapt) adapt_scale(log_scale_diag_, r.accepted);
    }
    {
      const auto r = mh_update_beta_hypers(state_, s, BlockKind::OffDiagonal, cfg_, sig_off, counts, rng_);
      state_.states[s].bh.a_off = r.value.first;
      state_.states[s].bh.b_off = r.value.second;
      acc_ab_off.record(r.accepted);
      if (adapt) adapt_scale(log_scale_off_, r.accepted);
    }
    // Theta was integrated out above; redraw it under the new hyperparameters
    state_.states[s].theta = draw_theta(counts, state_.states[s].bh, rng_);
    {
      const auto r = update_py_params(state_.states[s].xi, state_.states[s].py, cfg_, sig_py, rng_);
      state_.states[s].py = r.value;
      acc_py.record(r.accepted);
      if (adapt) adapt_scale(log_scale_py_, r.accepted);
    }
  }

  state_.rates = gibbs_update_rate_hypers(state_, cfg_, rng_);

  for (std::size_t s = 0; s < S; ++s)
    if (!occ[s]) state_.states[s] = draw_state_from_prior(n, state_.rates, cfg_, rng_);

  tuning_.kappa_gamma = cfg_.tuning.kappa_gamma * std::exp(log_scale_gamma_);
  tuning_.sigma_ab_diag = sig_diag;
  tuning_.sigma_ab_off = sig_off;
  tuning_.sigma_py = sig_py;
  ++sweeps_;
}

namespace {

std::string dump_state(const ModelState& ms, std::size_t iteration) {
  std::ostringstream os;
  os << "non-finite log-likelihood at iteration " << iteration << ": gamma=" << ms.gamma
     << " occupied=" << ms.occupied_count();
  const auto occ = ms.occupied();
  for (std::size_t s = 0; s < ms.max_states(); ++s) {
    if (!occ[s]) continue;
    const auto& st = ms.states[s];
    os << "\n  state " << s << ": K=" << st.xi.blocks() << " alpha=" << st.py.alpha << " beta=" << st.py.beta
       << " a_O=" << st.bh.a_off << " b_O=" << st.bh.b_off << " a_D=" << st.bh.a_diag << " b_D=" << st.bh.b_diag;
  }
  return os.str();
}

}  // namespace

ChainTrace run_chain(const NetworkSeries& data, const HyperConfig& cfg, std::uint64_t seed) {
  Sampler smp(data, cfg, seed);
  ChainTrace trace;
  const std::size_t total = cfg.burnin + cfg.iters;
  trace.scalars.reserve(total);
  AcceptanceCounter g0, d0, o0, p0;
  std::vector<double> ups, chis;
  for (std::size_t it = 0; it < total; ++it) {
    if (it == cfg.burnin) {
      g0 = smp.acc_gamma;
      d0 = smp.acc_ab_diag;
      o0 = smp.acc_ab_off;
      p0 = smp.acc_py;
    }
    smp.sweep(cfg.adapt && it < cfg.burnin, it >= std::min(cfg.fixed_path_sweeps, cfg.burnin));
    const auto& ms = smp.state();

    TraceScalars sc;
    sc.iteration = it + 1;
    sc.loglik = log_likelihood_blocked(ms, smp.observations());
    if (!std::isfinite(sc.loglik)) throw NumericalError(dump_state(ms, it + 1));
    sc.occupied_states = ms.occupied_count();
    ups.assign(ms.max_states(), 0.0);
    chis.assign(ms.max_states(), 0.0);
    const auto occ = ms.occupied();
    for (std::size_t s = 0; s < ms.max_states(); ++s)
      if (occ[s]) {
        ups[s] = assortativity_index(ms.states[s].bh);
        chis[s] = transitivity_index(ms.states[s].bh, ms.states[s].py).chi;
      }
    const double T = static_cast<double>(ms.zeta.size());
    for (int z : ms.zeta) {
      sc.upsilon_mean += ups[static_cast<std::size_t>(z)] / T;
      sc.chi_mean += chis[static_cast<std::size_t>(z)] / T;
    }
    for (int z : ms.zeta) {
      sc.upsilon_var += std::pow(ups[static_cast<std::size_t>(z)] - sc.upsilon_mean, 2) / T;
      sc.chi_var += std::pow(chis[static_cast<std::size_t>(z)] - sc.chi_mean, 2) / T;
    }
    sc.acc_gamma = smp.acc_gamma.rate();
    sc.acc_ab_diag = smp.acc_ab_diag.rate();
    sc.acc_ab_off = smp.acc_ab_off.rate();
    sc.acc_py = smp.acc_py.rate();
    trace.scalars.push_back(sc);

    if (it >= cfg.burnin && (it - cfg.burnin + 1) % cfg.thin == 0) {
      trace.samples.push_back(ms);
      trace.sample_iterations.push_back(it + 1);
      trace.sample_loglik.push_back(sc.loglik);
    }
  }
  auto diff = [](const AcceptanceCounter& a, const AcceptanceCounter& b) {
    return AcceptanceCounter{a.proposed - b.proposed, a.accepted - b.accepted};
  };
  if (cfg.iters > 0 || cfg.burnin == 0) {
    trace.acc_gamma = diff(smp.acc_gamma, g0);
    trace.acc_ab_diag = diff(smp.acc_ab_diag, d0);
    trace.acc_ab_off = diff(smp.acc_ab_off, o0);
    trace.acc_py = diff(smp.acc_py, p0);
  }
  trace.final_tuning = smp.tuning();
  return trace;
}

ChainTrace run_chain(const NetworkSeries& data, HyperConfig cfg, std::size_t iters, std::size_t burnin,
                     std::size_t thin, std::uint64_t seed) {
  cfg.iters = iters;
  cfg.burnin = burnin;
  cfg.thin = thin;
  return run_chain(data, cfg, seed);
}

}  // namespace hmmsbm
