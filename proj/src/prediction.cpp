#include "hmmsbm/prediction.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "hmmsbm/random.hpp"
#include "hmmsbm/sampler.hpp"

namespace hmmsbm {

PredictionMatrix link_probabilities(const std::vector<ModelState>& samples, std::string horizon) {
  if (samples.empty()) throw std::invalid_argument("link_probabilities: no samples");
  const std::size_t n = samples.front().states.at(0).xi.size();
  PredictionMatrix pm;
  pm.n = n;
  pm.horizon = std::move(horizon);
  pm.probs.assign(n * n, 0.0);
  for (const auto& ms : samples) {
    const std::size_t S = ms.max_states();
    const auto last = static_cast<std::size_t>(ms.zeta.back());
    for (std::size_t s = 0; s < S; ++s) {
      const double w = ms.transition(last, s);
      if (w == 0.0) continue;
      const auto& st = ms.states[s];
      if (st.xi.size() != n) throw std::invalid_argument("link_probabilities: node count differs across states");
      for (std::size_t i = 0; i < n; ++i) {
        const auto ki = static_cast<std::size_t>(st.xi.label(i));
        for (std::size_t j = 0; j < n; ++j)
          pm.probs[i * n + j] += w * st.theta(ki, static_cast<std::size_t>(st.xi.label(j)));
      }
    }
  }
  const double B = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double& p = pm.probs[i * n + j];
      p = i == j ? 0.0 : std::clamp(p / B, 0.0, 1.0);
    }
  return pm;
}

Sociomatrix threshold_predict(const PredictionMatrix& pm, double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("threshold must lie in [0,1]");
  Sociomatrix m(pm.n);
  for (std::size_t i = 0; i < pm.n; ++i)
    for (std::size_t j = 0; j < pm.n; ++j)
      if (i != j && pm(i, j) > f) m.set(i, j, true);
  return m;
}

RocResult roc_auc(const PredictionMatrix& pm, const Sociomatrix& truth) {
  if (truth.size() != pm.n) throw std::invalid_argument("roc_auc: dimension mismatch");
  std::vector<std::pair<double, bool>> cells;
  cells.reserve(pm.n * pm.n);
  for (std::size_t i = 0; i < pm.n; ++i)
    for (std::size_t j = 0; j < pm.n; ++j)
      if (i != j) cells.emplace_back(pm(i, j), truth(i, j));
  const auto pos = static_cast<double>(std::count_if(cells.begin(), cells.end(), [](auto& c) { return c.second; }));
  const double neg = static_cast<double>(cells.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("roc_auc: truth needs both links and non-links");
  std::sort(cells.begin(), cells.end(), [](auto& a, auto& b) { return a.first > b.first; });

  RocResult r;
  r.curve.push_back({INFINITY, 0.0, 0.0});
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t k = 0; k < cells.size();) {
    const double score = cells[k].first;
    double dtp = 0.0, dfp = 0.0;
    for (; k < cells.size() && cells[k].first == score; ++k) (cells[k].second ? dtp : dfp) += 1.0;
    // a tied group contributes a trapezoid, i.e. half credit for tied pairs
    area += dfp * (tp + 0.5 * dtp);
    tp += dtp;
    fp += dfp;
    r.curve.push_back({score, fp / neg, tp / pos});
  }
  r.auc = area / (pos * neg);
  return r;
}

std::vector<BacktestFold> rolling_backtest(const NetworkSeries& series, const HyperConfig& cfg,
                                           std::size_t holdout, std::uint64_t seed, std::size_t jobs) {
  series.validate();
  const std::size_t T = series.size();
  if (holdout < 1 || holdout >= T) throw std::invalid_argument("holdout must lie in [1, T)");
  std::vector<BacktestFold> folds(holdout);
  auto run_fold = [&](std::size_t f) {
    BacktestFold& fold = folds[f];
    fold.fit_periods = T - holdout + f;
    fold.predicted_period = series.periods[fold.fit_periods];
    try {
      const auto trace = run_chain(series.prefix(fold.fit_periods), cfg, derive_seed(seed, f));
      fold.prediction = link_probabilities(trace.samples, fold.predicted_period);
      fold.roc = roc_auc(fold.prediction, series.matrices[fold.fit_periods]);
    } catch (const std::exception& e) {
      fold.error = e.what();
      if (fold.error.empty()) fold.error = "fold failed";
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, holdout));
  if (workers == 1) {
    for (std::size_t f = 0; f < holdout; ++f) run_fold(f);
    return folds;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t f; (f = next.fetch_add(1)) < holdout;) run_fold(f);
    });
  for (auto& th : pool) th.join();
  return folds;
}

}  // namespace hmmsbm
