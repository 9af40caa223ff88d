#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmmsbm/network.hpp"
#include "hmmsbm/random.hpp"

namespace hmmsbm {

/// Pitman-Yor parameters: discount in [0,1), concentration > -discount.
struct PYParams {
  double alpha = 0.5;
  double beta = 1.0;

  bool valid() const { return alpha >= 0.0 && alpha < 1.0 && beta > -alpha; }
  /// Throws std::domain_error when !valid().
  void check() const;

  bool operator==(const PYParams& other) const = default;
};

/// Canonical partition of n items: labels are 0-based block indices in order
/// of first appearance, every block is non-empty.
class Partition {
 public:
  Partition() = default;
  /// Accepts any non-negative labels and canonicalizes them.
  explicit Partition(std::span<const int> labels);
  explicit Partition(const std::vector<int>& labels) : Partition(std::span<const int>(labels)) {}

  static Partition single_block(std::size_t n);
  static Partition singletons(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  std::size_t blocks() const { return sizes_.size(); }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  bool operator==(const Partition& other) const { return labels_ == other.labels_; }

 private:
  std::vector<int> labels_;
  std::vector<std::size_t> sizes_;
};

/// Beta hyperparameters for off-diagonal (O) and diagonal (D) block probabilities.
struct BetaHyper {
  double a_off = 1.0;
  double b_off = 1.0;
  double a_diag = 1.0;
  double b_diag = 1.0;

  bool valid() const { return a_off > 0 && b_off > 0 && a_diag > 0 && b_diag > 0; }
  void check() const;

  bool operator==(const BetaHyper& other) const = default;
};

/// K x K block link probabilities, row-major; theta(k,l) is the probability
/// that a member of block k sells to a member of block l.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  InteractionMatrix(std::size_t k, double fill) : k_(k), theta_(k * k, fill) {}

  std::size_t blocks() const { return k_; }
  double operator()(std::size_t k, std::size_t l) const { return theta_[k * k_ + l]; }
  double& operator()(std::size_t k, std::size_t l) { return theta_[k * k_ + l]; }
  const std::vector<double>& values() const { return theta_; }

  bool operator==(const InteractionMatrix& other) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> theta_;
};

struct StickWeights {
  std::vector<double> v;
  std::vector<double> w;
  double residual = 1.0;  // 1 - sum(w)
};

/// w_k = v_k prod_{s<k} (1 - v_s). Throws std::domain_error for v_k outside (0,1).
StickWeights stick_break(std::span<const double> v);

/// Log exchangeable partition probability of a Pitman-Yor prior.
double eppf_log_prob(const Partition& p, const PYParams& py);

/// Sequential (Chinese restaurant) seating: item joins block k with weight
/// m_k - alpha, opens a new block with weight beta + alpha K.
Partition sample_partition(std::size_t n, const PYParams& py, Rng& rng);

/// Log Beta-Bernoulli marginal likelihood of `ones` successes in `total`
/// exchangeable trials under a Beta(a,b) prior.
double beta_bernoulli_marginal(double ones, double total, double a, double b);

/// Log ratio of expected diagonal to expected off-diagonal link probability.
double assortativity_index(const BetaHyper& h);

struct TransitivityIndex {
  double chi = 0.0;
  double numerator = 0.0;    // Pr(y_ij = 1, y_jk = 1, y_ki = 1)
  double denominator = 0.0;  // Pr(y_jk = 1, y_ki = 1)
};

/// Model-implied probability that a directed cycle triad closes.
TransitivityIndex transitivity_index(const BetaHyper& h, const PYParams& py);

/// Diagonal entries from Beta(a_diag, b_diag), off-diagonal from Beta(a_off, b_off).
InteractionMatrix sample_interactions(std::size_t k, const BetaHyper& h, Rng& rng);

/// Independent Bernoulli(theta(xi_i, xi_j)) links with a zero diagonal.
Sociomatrix generate_network(const Partition& p, const InteractionMatrix& theta, Rng& rng);

}  // namespace hmmsbm
