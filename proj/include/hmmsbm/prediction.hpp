#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmmsbm/model.hpp"
#include "hmmsbm/network.hpp"

namespace hmmsbm {

/// n x n one-step-ahead link probabilities, row-major, zero diagonal.
struct PredictionMatrix {
  std::size_t n = 0;
  std::vector<double> probs;
  std::string horizon;

  double operator()(std::size_t i, std::size_t j) const { return probs[i * n + j]; }
};

/// Posterior predictive mixture over the next state: for each sample,
/// sum_s pi(zeta_T, s) theta_s(xi_i, xi_j), averaged over samples.
/// Throws std::invalid_argument on an empty sample list.
PredictionMatrix link_probabilities(const std::vector<ModelState>& samples, std::string horizon = "");

/// 1{p_ij > f}. Throws std::invalid_argument for f outside [0,1].
Sociomatrix threshold_predict(const PredictionMatrix& pm, double f);

struct RocPoint {
  double threshold;  // cells with score >= threshold are predicted links
  double fpr;
  double tpr;
};

struct RocResult {
  std::vector<RocPoint> curve;  // from (0,0) to (1,1)
  double auc = 0.0;
};

/// ROC over all off-diagonal cells, one point per distinct score. The AUC is
/// the Mann-Whitney statistic with ties counted as one half. Throws
/// std::invalid_argument when the truth has no positives or no negatives.
RocResult roc_auc(const PredictionMatrix& pm, const Sociomatrix& truth);

struct BacktestFold {
  std::size_t fit_periods = 0;  // the fit used periods [0, fit_periods)
  std::string predicted_period;
  std::optional<RocResult> roc;
  std::string error;  // non-empty when the fold failed
  PredictionMatrix prediction;
};

/// For each of the last `holdout` periods t, fits a fresh chain on periods
/// [0, t) with seed derive_seed(seed, fold) and scores the prediction of
/// period t. Failed folds are flagged and the remaining folds still run.
/// Folds run on up to `jobs` threads; results do not depend on `jobs`.
std::vector<BacktestFold> rolling_backtest(const NetworkSeries& series, const HyperConfig& cfg,
                                           std::size_t holdout, std::uint64_t seed, std::size_t jobs = 1);

}  // namespace hmmsbm
