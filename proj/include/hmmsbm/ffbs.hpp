#pragma once

#include <span>
#include <vector>

#include "hmmsbm/random.hpp"

namespace hmmsbm {

/// Inputs of a discrete-state HMM in log space. Matrices are row-major:
/// transition is S x S (from, to), emission is T x S.
struct HmmLogTerms {
  std::size_t states = 0;
  std::size_t periods = 0;
  std::vector<double> log_initial;
  std::vector<double> log_transition;
  std::vector<double> log_emission;
};

struct ForwardPass {
  std::vector<double> log_filtered;  // T x S, each row normalized
  double log_evidence = 0.0;
};

/// Forward recursion with per-step normalization. Throws NumericalError on a
/// non-finite emission or when every state has zero filtered mass.
ForwardPass forward_filter(const HmmLogTerms& hmm);

/// Exact joint draw of the state path from its conditional given the
/// parameters (forward filtering, backward sampling). Labels are 0-based.
std::vector<int> ffbs_sample(const HmmLogTerms& hmm, Rng& rng);

}  // namespace hmmsbm
