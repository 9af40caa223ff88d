#include <doctest.h>

#include <cmath>

#include "checks.hpp"

using namespace hmmsbm;

namespace {

// two states, state 0 at the last period
ModelState mixture_sample() {
  ModelState ms;
  ms.zeta = {1, 0};
  ms.pi = {0.75, 0.25, 0.5, 0.5};
  ms.states.resize(2);
  ms.states[0].xi = Partition(std::vector<int>{0, 0, 1});
  ms.states[0].theta = InteractionMatrix(2, 0.1);
  ms.states[0].theta(0, 0) = 0.9;
  ms.states[1].xi = Partition::single_block(3);
  ms.states[1].theta = InteractionMatrix(1, 0.5);
  return ms;
}

}  // namespace

TEST_CASE("link probabilities are a state mixture") {
  const auto pm = link_probabilities({mixture_sample()});
  CHECK(pm.n == 3);
  CHECK(pm(0, 1) == doctest::Approx(0.75 * 0.9 + 0.25 * 0.5));
  CHECK(pm(0, 2) == doctest::Approx(0.75 * 0.1 + 0.25 * 0.5));
  for (std::size_t i = 0; i < 3; ++i) CHECK(pm(i, i) == 0.0);
  auto other = mixture_sample();
  other.zeta = {0, 1};
  const auto avg = link_probabilities({mixture_sample(), other});
  CHECK(avg(0, 1) == doctest::Approx(0.5 * (0.75 * 0.9 + 0.25 * 0.5) + 0.5 * (0.5 * 0.9 + 0.5 * 0.5)));
  CHECK_THROWS(link_probabilities({}));
}

TEST_CASE("threshold prediction") {
  const auto pm = link_probabilities({mixture_sample()});
  const auto y = threshold_predict(pm, 0.5);
  CHECK(y(0, 1));
  CHECK_FALSE(y(0, 2));
  CHECK(threshold_predict(pm, 1.0).link_count() == 0);
  CHECK(threshold_predict(pm, 0.0).link_count() == 6);
  CHECK_THROWS(threshold_predict(pm, 1.5));
}

TEST_CASE("roc: perfect, inverted and tied scores") {
  PredictionMatrix pm;
  pm.n = 3;
  pm.probs = {0, 0.9, 0.1, 0.8, 0, 0.2, 0.3, 0.7, 0};
  const auto truth = Sociomatrix::from_rows({{0, 1, 0}, {1, 0, 0}, {0, 1, 0}});
  auto r = roc_auc(pm, truth);
  CHECK(r.auc == 1.0);
  CHECK(r.curve.front().fpr == 0.0);
  CHECK(r.curve.front().tpr == 0.0);
  CHECK(r.curve.back().fpr == 1.0);
  CHECK(r.curve.back().tpr == 1.0);
  for (auto& p : pm.probs) p = 1 - p;
  CHECK(roc_auc(pm, truth).auc == 0.0);
  for (auto& p : pm.probs) p = 0.5;
  CHECK(roc_auc(pm, truth).auc == 0.5);
  CHECK_THROWS(roc_auc(pm, Sociomatrix(3)));
}

TEST_CASE("roc auc equals the pairwise ordering probability") {
  Rng rng(2);
  PredictionMatrix pm;
  pm.n = 8;
  pm.probs.assign(64, 0.0);
  Sociomatrix truth(8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      if (i != j) {
        pm.probs[i * 8 + j] = std::round(runif(rng) * 10) / 10;
        if (runif(rng) < 0.4) truth.set(i, j, true);
      }
  double wins = 0, pairs = 0;
  for (std::size_t a = 0; a < 64; ++a)
    for (std::size_t b = 0; b < 64; ++b) {
      if (a / 8 == a % 8 || b / 8 == b % 8) continue;
      if (!truth(a / 8, a % 8) || truth(b / 8, b % 8)) continue;
      pairs += 1;
      wins += pm.probs[a] > pm.probs[b] ? 1.0 : pm.probs[a] == pm.probs[b] ? 0.5 : 0.0;
    }
  const auto r = roc_auc(pm, truth);
  CHECK(r.auc == doctest::Approx(wins / pairs).epsilon(1e-12));
  // trapezoid area under the curve gives the same number
  double area = 0;
  for (std::size_t k = 1; k < r.curve.size(); ++k)
    area += (r.curve[k].fpr - r.curve[k - 1].fpr) * (r.curve[k].tpr + r.curve[k - 1].tpr) / 2;
  CHECK(area == doctest::Approx(r.auc).epsilon(1e-12));
}

TEST_CASE("backtest folds are independent of the thread count") {
  const auto d = checks::planted_data(3, 12, 10);
  HyperConfig cfg;
  cfg.max_states = 4;
  cfg.burnin = 30;
  cfg.iters = 60;
  cfg.thin = 3;
  const auto a = rolling_backtest(d.series, cfg, 3, 21, 1);
  const auto b = rolling_backtest(d.series, cfg, 3, 21, 3);
  REQUIRE(a.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a[k].fit_periods == 7 + k);
    CHECK(a[k].predicted_period == d.series.periods[7 + k]);
    CHECK(a[k].prediction.probs == b[k].prediction.probs);
    CHECK(a[k].error == b[k].error);
  }
  CHECK_THROWS(rolling_backtest(d.series, cfg, 10, 21));
}

TEST_CASE("backtest flags failing folds and keeps going") {
  auto d = checks::planted_data(4, 10, 8);
  // an empty final week has no positives, so its ROC cannot be scored
  d.series.matrices.back() = Sociomatrix(10);
  HyperConfig cfg;
  cfg.max_states = 3;
  cfg.burnin = 10;
  cfg.iters = 20;
  cfg.thin = 2;
  const auto folds = rolling_backtest(d.series, cfg, 2, 5);
  REQUIRE(folds.size() == 2);
  CHECK(folds[0].error.empty());
  CHECK(folds[0].roc.has_value());
  CHECK_FALSE(folds[1].error.empty());
  CHECK_FALSE(folds[1].roc.has_value());
}
