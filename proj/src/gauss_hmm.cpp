#include "hmmsbm/gauss_hmm.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hmmsbm/errors.hpp"
#include "hmmsbm/ffbs.hpp"
#include "hmmsbm/series_io.hpp"

namespace hmmsbm {

namespace {

bool spd(const Eigen::Matrix2d& m) {
  if (!m.allFinite() || std::abs(m(0, 1) - m(1, 0)) > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) return false;
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

}  // namespace

void BivariateSeries::validate() const {
  if (x.size() < 2) throw std::invalid_argument("bivariate series needs at least 2 periods");
  if (periods.size() != x.size()) throw std::invalid_argument("period labels and data differ in length");
  for (const auto& v : x)
    if (!v.allFinite()) throw std::invalid_argument("bivariate series has non-finite entries");
}

BivariateSeries read_bivariate_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "period,x1,x2") throw InputError(path.string() + ": header must be period,x1,x2");
  BivariateSeries s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string p, a, b;
    if (!std::getline(ss, p, ',') || !std::getline(ss, a, ',') || !std::getline(ss, b))
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    try {
      std::size_t ia = 0, ib = 0;
      const double va = std::stod(a, &ia), vb = std::stod(b, &ib);
      if (ia != a.size() || ib != b.size()) throw std::invalid_argument("trailing characters");
      s.periods.push_back(p);
      s.x.emplace_back(va, vb);
    } catch (const std::logic_error&) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return s;
}

void write_bivariate_csv(const BivariateSeries& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "period,x1,x2\n";
  for (std::size_t t = 0; t < s.size(); ++t)
    out << s.periods[t] << ',' << format_double(s.x[t](0)) << ',' << format_double(s.x[t](1)) << '\n';
}

void GaussHMMConfig::validate() const {
  if (states < 1) throw std::invalid_argument("baseline needs at least one state");
  if (!(gamma_star > 0.0)) throw std::invalid_argument("gamma_star must be positive");
  if (!(iw_df > 3.0)) throw std::invalid_argument("inverse-Wishart degrees of freedom must exceed 3");
  if (!spd(D_cov) || !spd(iw_scale)) throw std::invalid_argument("D and B must be symmetric positive definite");
  if (!d_mean.allFinite()) throw std::invalid_argument("d must be finite");
  if (thin == 0) throw std::invalid_argument("thin must be positive");
}

GaussHMMConfig default_config_from_data(const BivariateSeries& series) {
  series.validate();
  const std::size_t T = series.size();
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& v : series.x) mean += v;
  mean /= static_cast<double>(T);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& v : series.x) cov += (v - mean) * (v - mean).transpose();
  cov /= static_cast<double>(T - 1);
  const double scale = cov.trace();
  if (!(scale > 0.0) || cov.determinant() <= 1e-12 * scale * scale) {
    // degenerate sample: keep the marginal variances only, unit where flat
    const Eigen::Vector2d v(cov(0, 0) > 0 ? cov(0, 0) : 1.0, cov(1, 1) > 0 ? cov(1, 1) : 1.0);
    cov = v.asDiagonal();
  }
  GaussHMMConfig cfg;
  cfg.d_mean = mean;
  cfg.D_cov = cov;
  cfg.iw_scale = cov;
  return cfg;
}

NormalParams mu_conditional(const std::vector<Eigen::Vector2d>& xs, const Eigen::Matrix2d& omega,
                            const GaussHMMConfig& cfg) {
  const Eigen::Matrix2d Dinv = cfg.D_cov.inverse();
  const Eigen::Matrix2d Oinv = omega.inverse();
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& x : xs) sum += x;
  NormalParams p;
  p.cov = (Dinv + static_cast<double>(xs.size()) * Oinv).inverse();
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  p.mean = p.cov * (Dinv * cfg.d_mean + Oinv * sum);
  return p;
}

IWParams omega_conditional(const std::vector<Eigen::Vector2d>& xs, const Eigen::Vector2d& mu,
                           const GaussHMMConfig& cfg) {
  IWParams p{cfg.iw_df + static_cast<double>(xs.size()), cfg.iw_scale};
  for (const auto& x : xs) p.scale += (x - mu) * (x - mu).transpose();
  return p;
}

double mvn_log_density(const Eigen::Vector2d& x, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  const Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::Vector2d z = llt.matrixL().solve(x - mean);
  const double logdet = 2.0 * std::log(llt.matrixL()(0, 0) * llt.matrixL()(1, 1));
  return -std::log(2.0 * std::numbers::pi) - 0.5 * logdet - 0.5 * z.squaredNorm();
}

double iw_log_density(const Eigen::Matrix2d& omega, const IWParams& p) {
  const double det_o = omega.determinant();
  if (!(det_o > 0.0)) return -std::numeric_limits<double>::infinity();
  const double nu = p.df;
  // log of the bivariate gamma function
  const double lg2 = 0.5 * std::log(std::numbers::pi) + std::lgamma(nu / 2.0) + std::lgamma((nu - 1.0) / 2.0);
  return 0.5 * nu * std::log(p.scale.determinant()) - nu * std::log(2.0) - lg2 - 0.5 * (nu + 3.0) * std::log(det_o) -
         0.5 * (p.scale * omega.inverse()).trace();
}

Eigen::Vector2d sample_mvn(const NormalParams& p, Rng& rng) {
  const Eigen::LLT<Eigen::Matrix2d> llt(p.cov);
  if (llt.info() != Eigen::Success) throw NumericalError("normal covariance is not positive definite");
  const Eigen::Vector2d z(rnorm(rng), rnorm(rng));
  return p.mean + llt.matrixL() * z;
}

Eigen::Matrix2d sample_iw(const IWParams& p, Rng& rng) {
  // Bartlett decomposition of W ~ Wishart(df, scale^{-1}); Omega = W^{-1}
  const Eigen::Matrix2d sinv = p.scale.inverse();
  const Eigen::LLT<Eigen::Matrix2d> llt(0.5 * (sinv + sinv.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("inverse-Wishart scale is not positive definite");
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  A(0, 0) = std::sqrt(2.0 * rgamma(rng, p.df / 2.0, 1.0));
  A(1, 1) = std::sqrt(2.0 * rgamma(rng, (p.df - 1.0) / 2.0, 1.0));
  A(1, 0) = rnorm(rng);
  const Eigen::Matrix2d LA = llt.matrixL() * A;
  const Eigen::Matrix2d W = LA * LA.transpose();
  Eigen::Matrix2d omega = W.inverse();
  return 0.5 * (omega + omega.transpose());
}

GaussHMMTrace run_gauss_hmm(const BivariateSeries& series, const GaussHMMConfig& cfg, std::uint64_t seed) {
  series.validate();
  cfg.validate();
  Rng rng(seed);
  const std::size_t R = cfg.states, T = series.size();
  const IWParams prior_iw{cfg.iw_df, cfg.iw_scale};
  const NormalParams prior_mu{cfg.d_mean, cfg.D_cov};

  GaussHMMState st;
  const std::size_t segments = std::min<std::size_t>({R, T, 10});
  st.zeta.resize(T);
  for (std::size_t t = 0; t < T; ++t) st.zeta[t] = static_cast<int>(t * segments / T);
  st.mu.assign(R, cfg.d_mean);
  st.omega.assign(R, cfg.iw_scale);
  st.pi.assign(R * R, 1.0 / static_cast<double>(R));

  GaussHMMTrace trace;
  HmmLogTerms hmm;
  hmm.states = R;
  hmm.periods = T;
  hmm.log_initial.assign(R, -std::log(static_cast<double>(R)));
  hmm.log_transition.resize(R * R);
  hmm.log_emission.resize(T * R);
  std::vector<std::vector<Eigen::Vector2d>> groups(R);
  std::vector<double> conc(R);

  const std::size_t total = cfg.burnin + cfg.iters;
  for (std::size_t it = 0; it < total; ++it) {
    for (auto& g : groups) g.clear();
    for (std::size_t t = 0; t < T; ++t) groups[static_cast<std::size_t>(st.zeta[t])].push_back(series.x[t]);
    for (std::size_t s = 0; s < R; ++s) {
      if (groups[s].empty()) {
        st.mu[s] = sample_mvn(prior_mu, rng);
        st.omega[s] = sample_iw(prior_iw, rng);
      } else {
        st.mu[s] = sample_mvn(mu_conditional(groups[s], st.omega[s], cfg), rng);
        st.omega[s] = sample_iw(omega_conditional(groups[s], st.mu[s], cfg), rng);
      }
    }

    for (std::size_t k = 0; k < R * R; ++k) hmm.log_transition[k] = st.pi[k] > 0.0 ? std::log(st.pi[k]) : -INFINITY;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t s = 0; s < R; ++s) hmm.log_emission[t * R + s] = mvn_log_density(series.x[t], st.mu[s], st.omega[s]);
    st.zeta = ffbs_sample(hmm, rng);

    std::vector<double> counts(R * R, 0.0);
    for (std::size_t t = 1; t < T; ++t)
      counts[static_cast<std::size_t>(st.zeta[t - 1]) * R + static_cast<std::size_t>(st.zeta[t])] += 1.0;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t s = 0; s < R; ++s) conc[s] = cfg.gamma_star / static_cast<double>(R) + counts[r * R + s];
      const auto row = rdirichlet(rng, conc);
      std::copy(row.begin(), row.end(), st.pi.begin() + static_cast<std::ptrdiff_t>(r * R));
    }

    if (it >= cfg.burnin && (it - cfg.burnin + 1) % cfg.thin == 0) trace.samples.push_back(st);
  }
  return trace;
}

std::vector<std::vector<double>> pairwise_incidence(const GaussHMMTrace& trace) {
  if (trace.samples.empty()) throw std::invalid_argument("pairwise_incidence: empty trace");
  const std::size_t T = trace.samples.front().zeta.size();
  std::vector<std::vector<double>> m(T, std::vector<double>(T, 0.0));
  for (const auto& s : trace.samples)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t u = 0; u < T; ++u) m[t][u] += s.zeta[t] == s.zeta[u] ? 1.0 : 0.0;
  const double B = static_cast<double>(trace.samples.size());
  for (auto& row : m)
    for (double& v : row) v /= B;
  return m;
}

}  // namespace hmmsbm
