#include "hmmsbm/blockmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hmmsbm {

void PYParams::check() const {
  if (!valid())
    throw std::domain_error("Pitman-Yor parameters out of range: alpha=" + std::to_string(alpha) +
                            " beta=" + std::to_string(beta));
}

void BetaHyper::check() const {
  if (!valid()) throw std::domain_error("Beta hyperparameters must be positive");
}

Partition::Partition(std::span<const int> labels) {
  std::vector<int> remap;
  labels_.reserve(labels.size());
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("partition labels must be non-negative");
    if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(static_cast<std::size_t>(l) + 1, -1);
    if (remap[static_cast<std::size_t>(l)] < 0) {
      remap[static_cast<std::size_t>(l)] = static_cast<int>(sizes_.size());
      sizes_.push_back(0);
    }
    const int c = remap[static_cast<std::size_t>(l)];
    labels_.push_back(c);
    ++sizes_[static_cast<std::size_t>(c)];
  }
}

Partition Partition::single_block(std::size_t n) { return Partition(std::vector<int>(n, 0)); }

Partition Partition::singletons(std::size_t n) {
  std::vector<int> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<int>(i);
  return Partition(l);
}

StickWeights stick_break(std::span<const double> v) {
  StickWeights out;
  out.v.assign(v.begin(), v.end());
  double remaining = 1.0;
  for (double vk : v) {
    if (!(vk > 0.0 && vk < 1.0)) throw std::domain_error("stick fractions must lie in (0,1)");
    out.w.push_back(vk * remaining);
    remaining *= 1.0 - vk;
  }
  out.residual = remaining;
  return out;
}

double eppf_log_prob(const Partition& p, const PYParams& py) {
  py.check();
  const std::size_t n = p.size();
  if (n == 0) return 0.0;
  const double a = py.alpha, b = py.beta;
  // Gamma(b+1)/Gamma(b+n) prod_{k=1}^{K-1} (b + a k) prod_k Gamma(m_k - a)/Gamma(1 - a)
  double lp = std::lgamma(b + 1.0) - std::lgamma(b + static_cast<double>(n));
  for (std::size_t k = 1; k < p.blocks(); ++k) lp += std::log(b + a * static_cast<double>(k));
  const double lg1 = std::lgamma(1.0 - a);
  for (std::size_t m : p.sizes()) lp += std::lgamma(static_cast<double>(m) - a) - lg1;
  return lp;
}

Partition sample_partition(std::size_t n, const PYParams& py, Rng& rng) {
  py.check();
  std::vector<int> labels(n);
  std::vector<double> weights;
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = sizes.size();
    weights.assign(k + 1, 0.0);
    for (std::size_t c = 0; c < k; ++c) weights[c] = static_cast<double>(sizes[c]) - py.alpha;
    weights[k] = py.beta + py.alpha * static_cast<double>(k);
    // the first item always opens a block, whatever beta is
    const std::size_t c = (i == 0) ? 0 : sample_weights(rng, weights);
    if (c == k) sizes.push_back(0);
    ++sizes[c];
    labels[i] = static_cast<int>(c);
  }
  return Partition(labels);
}

double beta_bernoulli_marginal(double ones, double total, double a, double b) {
  if (!(a > 0 && b > 0)) throw std::domain_error("beta_bernoulli_marginal: a, b must be positive");
  if (ones < 0 || ones > total) throw std::domain_error("beta_bernoulli_marginal: need 0 <= ones <= total");
  if (total == 0) return 0.0;
  return std::lgamma(ones + a) + std::lgamma(total - ones + b) - std::lgamma(a + b + total) +
         std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

double assortativity_index(const BetaHyper& h) {
  h.check();
  return std::log(h.a_diag / (h.a_diag + h.b_diag)) - std::log(h.a_off / (h.a_off + h.b_off));
}

TransitivityIndex transitivity_index(const BetaHyper& h, const PYParams& py) {
  h.check();
  py.check();
  const double a = py.alpha, b = py.beta;
  const double norm = (b + 1.0) * (b + 2.0);
  // probabilities of the three-node partition patterns under the prior
  const double all_same = (1.0 - a) * (2.0 - a) / norm;
  const double one_pair = (1.0 - a) * (b + a) / norm;  // each of the three pairings
  const double all_apart = (b + a) * (b + 2.0 * a) / norm;

  const double sd = h.a_diag + h.b_diag;
  const double mean_d = h.a_diag / sd;
  const double mean_o = h.a_off / (h.a_off + h.b_off);
  const double m2_d = h.a_diag * (h.a_diag + 1.0) / (sd * (sd + 1.0));
  const double m3_d = m2_d * (h.a_diag + 2.0) / (sd + 2.0);

  TransitivityIndex out;
  out.numerator = all_same * m3_d + 3.0 * one_pair * mean_d * mean_o * mean_o +
                  all_apart * mean_o * mean_o * mean_o;
  // one_pair + all_apart = (b+a)(b+a+1)/norm
  out.denominator = all_same * m2_d + 2.0 * one_pair * mean_d * mean_o +
                    (one_pair + all_apart) * mean_o * mean_o;
  out.chi = out.numerator / out.denominator;
  return out;
}

InteractionMatrix sample_interactions(std::size_t k, const BetaHyper& h, Rng& rng) {
  h.check();
  InteractionMatrix th(k, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      th(r, c) = (r == c) ? rbeta(rng, h.a_diag, h.b_diag) : rbeta(rng, h.a_off, h.b_off);
  return th;
}

Sociomatrix generate_network(const Partition& p, const InteractionMatrix& theta, Rng& rng) {
  if (p.blocks() > theta.blocks())
    throw std::invalid_argument("partition has more blocks than the interaction matrix");
  const std::size_t n = p.size();
  Sociomatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = theta(static_cast<std::size_t>(p.label(i)), static_cast<std::size_t>(p.label(j)));
      if (runif(rng) < q) m.set(i, j, true);
    }
  return m;
}

}  // namespace hmmsbm
