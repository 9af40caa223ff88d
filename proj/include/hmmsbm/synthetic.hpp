#pragma once

#include <optional>
#include <vector>

#include "hmmsbm/model.hpp"
#include "hmmsbm/network.hpp"
#include "hmmsbm/random.hpp"

namespace hmmsbm {

/// Forward-simulation settings. Anything left empty is drawn from the prior
/// described by `prior`; fixed pieces must match prior.max_states.
struct GeneratorSettings {
  HyperConfig prior;
  std::optional<double> gamma;
  std::optional<RateHypers> rates;
  std::optional<std::vector<double>> pi;  // S x S row-major
  std::optional<std::vector<int>> zeta;   // length T
  std::optional<std::vector<StateParams>> states;
};

struct SyntheticData {
  NetworkSeries series;
  ModelState truth;
};

/// gamma -> Pi -> zeta, rates -> per-state hypers -> xi, Theta, then one
/// network per period. Period labels are "t0001", "t0002", ...
SyntheticData generate_synthetic(const GeneratorSettings& settings, std::size_t n, std::size_t T, Rng& rng);

/// Three persistent regimes visited in four equal runs (0, 1, 2, 0), each with
/// its own random 3- or 4-block partition, diagonal blocks in (0.5, 0.8) and
/// off-diagonal blocks in (0.02, 0.1).
GeneratorSettings planted_regimes(std::size_t n, std::size_t T, Rng& rng);

std::vector<std::string> synthetic_period_labels(std::size_t T);

}  // namespace hmmsbm
