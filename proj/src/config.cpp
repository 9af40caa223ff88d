#include "hmmsbm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "hmmsbm/errors.hpp"
#include "hmmsbm/series_io.hpp"

namespace hmmsbm {

namespace {

struct Key {
  const char* section;
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw InputError("config: bad number for " + key + ": " + v);
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw InputError("config: bad integer for " + key + ": " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InputError("config: bad boolean for " + key + ": " + v);
}

#define HMMSBM_DOUBLE(sec, name, field)                                                   \
  Key {                                                                                   \
    sec, name, [](const RunConfig& c) { return format_double(c.field); },                \
        [](RunConfig& c, const std::string& v) { c.field = to_double(sec "." name, v); } \
  }
#define HMMSBM_SIZE(sec, name, field)                                                   \
  Key {                                                                                 \
    sec, name, [](const RunConfig& c) { return std::to_string(c.field); },             \
        [](RunConfig& c, const std::string& v) { c.field = to_size(sec "." name, v); } \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"run", "preset", [](const RunConfig& c) { return c.preset; }, [](RunConfig&, const std::string&) {}},
      HMMSBM_SIZE("model", "max_states", model.max_states),
      HMMSBM_DOUBLE("model", "c", model.c),
      HMMSBM_DOUBLE("model", "lambda_d", model.lambda_d),
      HMMSBM_DOUBLE("model", "lambda_e", model.lambda_e),
      HMMSBM_DOUBLE("model", "gamma_prior_mean", model.gamma_prior_mean),
      HMMSBM_DOUBLE("model", "beta_prior_mean", model.beta_prior_mean),
      HMMSBM_DOUBLE("model", "alpha_prior_a", model.alpha_prior_a),
      HMMSBM_DOUBLE("model", "alpha_prior_b", model.alpha_prior_b),
      HMMSBM_SIZE("mcmc", "iters", model.iters),
      HMMSBM_SIZE("mcmc", "burnin", model.burnin),
      HMMSBM_SIZE("mcmc", "thin", model.thin),
      HMMSBM_SIZE("mcmc", "init_segments", model.init_segments),
      HMMSBM_SIZE("mcmc", "fixed_path_sweeps", model.fixed_path_sweeps),
      Key{"mcmc", "adapt", [](const RunConfig& c) { return std::string(c.model.adapt ? "true" : "false"); },
          [](RunConfig& c, const std::string& v) { c.model.adapt = to_bool("mcmc.adapt", v); }},
      HMMSBM_DOUBLE("mcmc", "target_acceptance", model.target_acceptance),
      HMMSBM_DOUBLE("tuning", "kappa_gamma", model.tuning.kappa_gamma),
      HMMSBM_DOUBLE("tuning", "ab_diag_var1", model.tuning.sigma_ab_diag.var1),
      HMMSBM_DOUBLE("tuning", "ab_diag_var2", model.tuning.sigma_ab_diag.var2),
      HMMSBM_DOUBLE("tuning", "ab_diag_cov", model.tuning.sigma_ab_diag.cov),
      HMMSBM_DOUBLE("tuning", "ab_off_var1", model.tuning.sigma_ab_off.var1),
      HMMSBM_DOUBLE("tuning", "ab_off_var2", model.tuning.sigma_ab_off.var2),
      HMMSBM_DOUBLE("tuning", "ab_off_cov", model.tuning.sigma_ab_off.cov),
      HMMSBM_DOUBLE("tuning", "py_var1", model.tuning.sigma_py.var1),
      HMMSBM_DOUBLE("tuning", "py_var2", model.tuning.sigma_py.var2),
      HMMSBM_DOUBLE("tuning", "py_cov", model.tuning.sigma_py.cov),
      HMMSBM_SIZE("baseline", "states", baseline.states),
      HMMSBM_DOUBLE("baseline", "gamma_star", baseline.gamma_star),
      HMMSBM_DOUBLE("baseline", "iw_df", baseline.iw_df),
      HMMSBM_SIZE("baseline", "iters", baseline.iters),
      HMMSBM_SIZE("baseline", "burnin", baseline.burnin),
      HMMSBM_SIZE("baseline", "thin", baseline.thin),
  };
  return table;
}

#undef HMMSBM_DOUBLE
#undef HMMSBM_SIZE

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys())
    if (section == k.section && name == k.name) return &k;
  return nullptr;
}

}  // namespace

bool RunConfig::operator==(const RunConfig& other) const {
  std::ostringstream a, b;
  write_config(*this, a);
  write_config(other, b);
  return a.str() == b.str();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"default", "sens-alpha-beta-low", "sens-beta-high"};
  return names;
}

RunConfig preset_config(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  if (name == "default") return c;
  // alpha ~ Beta(1, 9): mean 1/10, variance 9/1100
  if (name == "sens-alpha-beta-low") {
    c.model.alpha_prior_a = 1.0;
    c.model.alpha_prior_b = 9.0;
    c.model.beta_prior_mean = 1.0 / 3.0;
    return c;
  }
  if (name == "sens-beta-high") {
    c.model.alpha_prior_a = 1.0;
    c.model.alpha_prior_b = 9.0;
    c.model.beta_prior_mean = 3.0;
    return c;
  }
  throw InputError("unknown config preset: " + std::string(name));
}

RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  std::string preset = "default";
  if (auto run = tree.get_child_optional("run"))
    if (auto p = run->get_optional<std::string>("preset")) preset = *p;
  RunConfig cfg = preset_config(preset);

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw InputError("config: key outside a section: " + section);
    for (const auto& [name, value] : body) {
      const Key* k = find_key(section, name);
      if (!k) throw InputError("config: unknown key " + section + "." + name);
      k->set(cfg, value.data());
    }
  }
  try {
    cfg.model.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (cfg.baseline.states < 1 || !(cfg.baseline.iw_df > 3.0) || !(cfg.baseline.gamma_star > 0.0) ||
      cfg.baseline.thin == 0)
    throw InputError("config: invalid [baseline] settings");
  return cfg;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse_config(in);
}

void write_config(const RunConfig& cfg, std::ostream& out) {
  std::string section;
  for (const auto& k : keys()) {
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(cfg) << '\n';
  }
}

void write_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write config file " + path.string());
  write_config(cfg, out);
}

}  // namespace hmmsbm
