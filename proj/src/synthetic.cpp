#include "hmmsbm/synthetic.hpp"

#include <algorithm>
#include <string>
#include <stdexcept>

#include "hmmsbm/sampler.hpp"

namespace hmmsbm {

std::vector<std::string> synthetic_period_labels(std::size_t T) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(T).size());
  std::vector<std::string> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::string num = std::to_string(t + 1);
    out[t] = "t" + std::string(width - num.size(), '0') + num;
  }
  return out;
}

SyntheticData generate_synthetic(const GeneratorSettings& settings, std::size_t n, std::size_t T, Rng& rng) {
  const HyperConfig& cfg = settings.prior;
  cfg.validate();
  if (n < 2 || T < 1) throw std::invalid_argument("generate_synthetic: need n >= 2 and T >= 1");
  const std::size_t S = cfg.max_states;

  ModelState ms;
  ms.gamma = settings.gamma ? *settings.gamma : rexp(rng, 1.0 / cfg.gamma_prior_mean);
  if (settings.rates) {
    ms.rates = *settings.rates;
  } else {
    ms.rates.d_off = rexp(rng, 1.0 / cfg.lambda_d);
    ms.rates.e_off = rexp(rng, 1.0 / cfg.lambda_e);
    ms.rates.d_diag = rexp(rng, 1.0 / cfg.lambda_d);
    ms.rates.e_diag = rexp(rng, 1.0 / cfg.lambda_e);
  }

  if (settings.pi) {
    if (settings.pi->size() != S * S) throw std::invalid_argument("generate_synthetic: pi has wrong size");
    ms.pi = *settings.pi;
  } else {
    ms.pi.resize(S * S);
    const std::vector<double> conc(S, ms.gamma / static_cast<double>(S));
    for (std::size_t r = 0; r < S; ++r) {
      const auto row = rdirichlet(rng, conc);
      std::copy(row.begin(), row.end(), ms.pi.begin() + static_cast<std::ptrdiff_t>(r * S));
    }
  }

  if (settings.zeta) {
    if (settings.zeta->size() != T) throw std::invalid_argument("generate_synthetic: zeta has wrong length");
    ms.zeta = *settings.zeta;
  } else {
    ms.zeta.resize(T);
    ms.zeta[0] = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, S - 1)(rng));
    for (std::size_t t = 1; t < T; ++t) {
      const auto r = static_cast<std::size_t>(ms.zeta[t - 1]);
      ms.zeta[t] = static_cast<int>(sample_weights(rng, std::span<const double>(ms.pi.data() + r * S, S)));
    }
  }

  if (settings.states) {
    if (settings.states->size() != S) throw std::invalid_argument("generate_synthetic: states has wrong size");
    ms.states = *settings.states;
  } else {
    ms.states.resize(S);
    for (auto& st : ms.states) st = draw_state_from_prior(n, ms.rates, cfg, rng);
  }
  ms.validate(n);

  SyntheticData out;
  out.series.roster = TraderRoster::numbered(n);
  out.series.periods = synthetic_period_labels(T);
  out.series.matrices.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& st = ms.states[static_cast<std::size_t>(ms.zeta[t])];
    out.series.matrices.push_back(generate_network(st.xi, st.theta, rng));
  }
  out.truth = std::move(ms);
  return out;
}

GeneratorSettings planted_regimes(std::size_t n, std::size_t T, Rng& rng) {
  if (n < 4 || T < 4) throw std::invalid_argument("planted_regimes: need n >= 4 and T >= 4");
  GeneratorSettings g;
  g.prior.max_states = 3;
  g.gamma = 1.0;
  g.rates = RateHypers{};

  const double stay = 0.95;
  std::vector<double> pi(9, (1.0 - stay) / 2.0);
  for (std::size_t s = 0; s < 3; ++s) pi[s * 3 + s] = stay;
  g.pi = pi;

  const int order[4] = {0, 1, 2, 0};
  std::vector<int> zeta(T);
  for (std::size_t t = 0; t < T; ++t) zeta[t] = order[t * 4 / T];
  g.zeta = zeta;

  std::vector<StateParams> states(3);
  std::uniform_real_distribution<double> diag(0.5, 0.8), off(0.02, 0.1);
  for (auto& st : states) {
    const std::size_t K = 3 + std::uniform_int_distribution<std::size_t>(0, 1)(rng);
    // every block non-empty: deal a shuffled deck of labels
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % K);
    std::shuffle(labels.begin(), labels.end(), rng);
    st.xi = Partition(labels);
    st.theta = InteractionMatrix(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < K; ++l) st.theta(k, l) = k == l ? diag(rng) : off(rng);
    st.py = PYParams{0.5, 1.0};
    st.bh = BetaHyper{1.0, 15.0, 6.5, 3.5};
  }
  g.states = states;
  return g;
}

}  // namespace hmmsbm
