#include "hmmsbm/ffbs.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hmmsbm/errors.hpp"

namespace hmmsbm {

ForwardPass forward_filter(const HmmLogTerms& hmm) {
  const std::size_t S = hmm.states, T = hmm.periods;
  if (hmm.log_initial.size() != S || hmm.log_transition.size() != S * S ||
      hmm.log_emission.size() != T * S || T == 0 || S == 0)
    throw std::invalid_argument("forward_filter: inconsistent HMM dimensions");
  for (double e : hmm.log_emission)
    if (!std::isfinite(e)) throw NumericalError("forward_filter: non-finite emission log-likelihood");

  ForwardPass fp;
  fp.log_filtered.assign(T * S, 0.0);
  std::vector<double> row(S), terms(S);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double pred;
      if (t == 0) {
        pred = hmm.log_initial[s];
      } else {
        for (std::size_t r = 0; r < S; ++r)
          terms[r] = fp.log_filtered[(t - 1) * S + r] + hmm.log_transition[r * S + s];
        pred = log_sum_exp(terms);
      }
      row[s] = pred + hmm.log_emission[t * S + s];
    }
    const double norm = log_sum_exp(row);
    if (!std::isfinite(norm))
      throw NumericalError("forward_filter: zero filtered mass at period " + std::to_string(t));
    fp.log_evidence += norm;
    for (std::size_t s = 0; s < S; ++s) fp.log_filtered[t * S + s] = row[s] - norm;
  }
  return fp;
}

std::vector<int> ffbs_sample(const HmmLogTerms& hmm, Rng& rng) {
  const auto fp = forward_filter(hmm);
  const std::size_t S = hmm.states, T = hmm.periods;
  std::vector<int> path(T);
  std::vector<double> w(S);
  for (std::size_t s = 0; s < S; ++s) w[s] = fp.log_filtered[(T - 1) * S + s];
  path[T - 1] = static_cast<int>(sample_log_weights(rng, w));
  for (std::size_t t = T - 1; t-- > 0;) {
    const auto next = static_cast<std::size_t>(path[t + 1]);
    for (std::size_t r = 0; r < S; ++r)
      w[r] = fp.log_filtered[t * S + r] + hmm.log_transition[r * S + next];
    path[t] = static_cast<int>(sample_log_weights(rng, w));
  }
  return path;
}

}  // namespace hmmsbm
