#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hmmsbm/model.hpp"

namespace hmmsbm {

/// Settings of the Gaussian-emission baseline that are not derived from data.
struct BaselineSettings {
  std::size_t states = 15;
  double gamma_star = 1.0;
  double iw_df = 4.0;
  std::size_t iters = 10000;
  std::size_t burnin = 1000;
  std::size_t thin = 1;
};

/// Everything a config file can hold.
struct RunConfig {
  HyperConfig model;
  BaselineSettings baseline;
  std::string preset = "default";

  bool operator==(const RunConfig&) const;
};

/// Named built-in configurations: "default", "sens-alpha-beta-low", "sens-beta-high".
const std::vector<std::string>& preset_names();
/// Throws InputError for an unknown name.
RunConfig preset_config(std::string_view name);

/// INI layout with sections [run], [model], [mcmc], [tuning] and [baseline].
/// Missing keys keep the values of the preset named in [run] (default
/// "default"); unknown sections or keys are rejected with InputError.
RunConfig parse_config(std::istream& in);
RunConfig read_config(const std::filesystem::path& path);
void write_config(const RunConfig& cfg, std::ostream& out);
void write_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace hmmsbm
