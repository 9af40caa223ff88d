#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hmmsbm/analysis.hpp"
#include "hmmsbm/config.hpp"
#include "hmmsbm/errors.hpp"
#include "hmmsbm/gauss_hmm.hpp"
#include "hmmsbm/network.hpp"
#include "hmmsbm/prediction.hpp"
#include "hmmsbm/sampler.hpp"
#include "hmmsbm/series_io.hpp"
#include "hmmsbm/synthetic.hpp"
#include "hmmsbm/trace_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hmmsbm;

namespace {

enum ExitCode { kOk = 0, kUnexpected = 1, kInput = 2, kNumerical = 3, kPartial = 4 };

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::size_t jobs = 1;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string hex(const unsigned char* p, unsigned len) {
  static const char* d = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) s += d[p[i] >> 4], s += d[p[i] & 15];
  return s;
}

std::string sha256_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  return hex(md, len);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// directories hash the sorted (name, file digest) list
std::string digest(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("missing input " + p.string());
  if (!fs::is_directory(p)) return sha256_bytes(slurp(p));
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(p))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), p));
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += f.generic_string() + '\0' + sha256_bytes(slurp(p / f)) + '\n';
  return sha256_bytes(acc);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

class Run {
 public:
  Run(std::string command, const Globals& g) : command_(std::move(command)), g_(g), started_(utc_now()) {
    out_ = g.out;
    fs::create_directories(out_);
    cfg_ = g.config.empty() ? preset_config("default") : read_config(g.config);
  }

  RunConfig& cfg() { return cfg_; }
  const fs::path& out() const { return out_; }
  std::uint64_t seed() const { return g_.seed; }
  std::size_t jobs() const { return g_.jobs; }

  void input(const fs::path& p) { inputs_.push_back(p); }
  fs::path output(const std::string& rel) {
    outputs_.push_back(rel);
    const fs::path p = out_ / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  void finish() {
    if (!g_.config.empty()) inputs_.insert(inputs_.begin(), g_.config);
    json m;
    m["command"] = command_;
    std::ostringstream cs;
    write_config(cfg_, cs);
    m["config"] = cs.str();
    m["seed"] = g_.seed;
    json ins = json::array();
    for (const auto& p : inputs_) ins.push_back({{"path", p.string()}, {"sha256", digest(p)}});
    m["inputs"] = ins;
    m["version"] = HMMSBM_VERSION;
    m["started"] = started_;
    m["finished"] = utc_now();
    m["outputs"] = outputs_;
    const fs::path tmp = out_ / "manifest.json.tmp";
    write_json(tmp, m);
    fs::rename(tmp, out_ / "manifest.json");
  }

 private:
  std::string command_;
  Globals g_;
  std::string started_;
  fs::path out_;
  RunConfig cfg_;
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::size_t> parse_weeks(const std::string& s, std::size_t T) {
  std::vector<std::size_t> out;
  for (const auto& w : split_list(s)) {
    std::size_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoul(w, &used);
      if (used != w.size()) throw std::invalid_argument(w);
    } catch (const std::exception&) {
      throw InputError("bad period index '" + w + "'");
    }
    if (v >= T) throw InputError("period index " + w + " out of range");
    out.push_back(v);
  }
  return out;
}

void write_series(const NetworkSeries& s, const fs::path& p) {
  if (p.extension() == ".jsonl") write_series_packed(s, p);
  else write_series_dir(s, p);
}

std::vector<std::vector<double>> square_rows(const std::vector<double>& flat, std::size_t n) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = flat[i * n + j];
  return rows;
}

void write_roc(const fs::path& p, const RocResult& r) {
  std::ostringstream os;
  os << "threshold,fpr,tpr\n";
  for (const auto& q : r.curve)
    os << format_double(q.threshold) << ',' << format_double(q.fpr) << ',' << format_double(q.tpr) << '\n';
  write_text(p, os.str());
}

// ---------------------------------------------------------------- commands

struct IngestArgs {
  std::string edges, roster, format = "dir";
};

int cmd_ingest(const IngestArgs& a, const Globals& g) {
  Run run("ingest", g);
  run.input(a.edges);
  run.input(a.roster);
  const auto res = ingest_edge_list(read_edge_csv(a.edges), read_roster(a.roster));
  write_series(res.series, run.output(a.format == "packed" ? "series.jsonl" : "series"));
  json rep;
  rep["periods"] = res.series.size();
  rep["traders"] = res.series.nodes();
  rep["first_period"] = res.series.periods.front();
  rep["last_period"] = res.series.periods.back();
  rep["skipped_off_roster"] = res.skipped_off_roster;
  rep["dropped_self_trades"] = res.dropped_self_trades;
  write_json(run.output("ingest_report.json"), rep);
  run.finish();
  std::cout << "ingested " << res.series.size() << " periods, " << res.series.nodes() << " traders\n";
  return kOk;
}

struct StatsArgs {
  std::string series, columns;
};

int cmd_stats(const StatsArgs& a, const Globals& g) {
  Run run("stats", g);
  run.input(a.series);
  const auto s = load_series(a.series);
  const auto sums = summary_series(s);
  std::ostringstream os;
  os << "period";
  for (const auto& c : summary_column_names()) os << ',' << c;
  os << '\n';
  for (std::size_t t = 0; t < s.size(); ++t) {
    os << s.periods[t];
    for (const auto& c : summary_column_names()) os << ',' << format_double(summary_column(sums[t], c));
    os << '\n';
  }
  write_text(run.output("stats.csv"), os.str());
  if (!a.columns.empty()) {
    const auto cols = split_list(a.columns);
    if (cols.size() != 2) throw InputError("--columns needs exactly two names");
    for (const auto& c : cols)
      if (std::find(summary_column_names().begin(), summary_column_names().end(), c) == summary_column_names().end())
        throw InputError("unknown column '" + c + "'");
    BivariateSeries b;
    b.periods = s.periods;
    for (const auto& sm : sums) {
      const double x1 = summary_column(sm, cols[0]), x2 = summary_column(sm, cols[1]);
      if (!std::isfinite(x1) || !std::isfinite(x2))
        throw InputError("statistic undefined at some period; pick other columns");
      b.x.emplace_back(x1, x2);
    }
    write_bivariate_csv(b, run.output("bivariate.csv"));
  }
  run.finish();
  return kOk;
}

struct FitArgs {
  std::string series;
  std::optional<std::size_t> iters, burnin, thin, max_states;
};

int cmd_fit(const FitArgs& a, const Globals& g) {
  Run run("fit", g);
  run.input(a.series);
  auto& m = run.cfg().model;
  if (a.iters) m.iters = *a.iters;
  if (a.burnin) m.burnin = *a.burnin;
  if (a.thin) m.thin = *a.thin;
  if (a.max_states) m.max_states = *a.max_states;
  m.validate();
  const auto s = load_series(a.series);
  const auto tr = run_chain(s, m, g.seed);
  write_trace_jsonl(tr, run.output("trace.jsonl"));
  write_diagnostics_csv(tr.scalars, run.output("diagnostics.csv"));
  write_config(run.cfg(), run.output("config.ini"));
  run.finish();
  std::cout << "stored " << tr.samples.size() << " samples\n";
  return kOk;
}

struct BaselineArgs {
  std::string input;
};

int cmd_fit_baseline(const BaselineArgs& a, const Globals& g) {
  Run run("fit-baseline", g);
  run.input(a.input);
  const auto b = read_bivariate_csv(a.input);
  auto gc = default_config_from_data(b);
  const auto& bs = run.cfg().baseline;
  gc.states = bs.states;
  gc.gamma_star = bs.gamma_star;
  gc.iw_df = bs.iw_df;
  gc.iters = bs.iters;
  gc.burnin = bs.burnin;
  gc.thin = bs.thin;
  gc.validate();
  const auto tr = run_gauss_hmm(b, gc, g.seed);
  const auto inc = pairwise_incidence(tr);
  write_dense_csv(run.output("incidence.csv"), inc);
  const auto pp = point_partition(CoClusteringMatrix::from_rows(inc));
  std::ostringstream os;
  os << "period,state\n";
  for (std::size_t t = 0; t < pp.size(); ++t) os << b.periods[t] << ',' << pp[t] << '\n';
  write_text(run.output("baseline_states.csv"), os.str());
  run.finish();
  return kOk;
}

struct PredictArgs {
  std::string trace, horizon;
  std::optional<double> threshold;
};

int cmd_predict(const PredictArgs& a, const Globals& g) {
  Run run("predict", g);
  run.input(a.trace);
  const auto tr = read_trace_jsonl(a.trace);
  const auto pm = link_probabilities(tr.samples, a.horizon);
  write_dense_csv(run.output("prediction.csv"), square_rows(pm.probs, pm.n));
  if (a.threshold) {
    const auto y = threshold_predict(pm, *a.threshold);
    std::vector<double> flat(pm.n * pm.n);
    for (std::size_t i = 0; i < pm.n; ++i)
      for (std::size_t j = 0; j < pm.n; ++j) flat[i * pm.n + j] = y(i, j);
    write_dense_csv(run.output("predicted_links.csv"), square_rows(flat, pm.n));
  }
  run.finish();
  return kOk;
}

struct BacktestArgs {
  std::string series;
  std::size_t holdout = 5;
  std::optional<std::size_t> iters, burnin, thin, max_states;
};

int cmd_backtest(const BacktestArgs& a, const Globals& g) {
  Run run("backtest", g);
  run.input(a.series);
  auto& m = run.cfg().model;
  if (a.iters) m.iters = *a.iters;
  if (a.burnin) m.burnin = *a.burnin;
  if (a.thin) m.thin = *a.thin;
  if (a.max_states) m.max_states = *a.max_states;
  m.validate();
  const auto s = load_series(a.series);
  const auto folds = rolling_backtest(s, m, a.holdout, g.seed, g.jobs);
  std::ostringstream os;
  os << "fold,fit_periods,predicted_period,auc,error\n";
  double sum = 0;
  std::size_t ok = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fd = folds[f];
    const std::string dir = "fold_" + std::to_string(f + 1);
    std::string err = fd.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << f + 1 << ',' << fd.fit_periods << ',' << fd.predicted_period << ','
       << (fd.roc ? format_double(fd.roc->auc) : "NA") << ',' << err << '\n';
    if (!fd.prediction.probs.empty())
      write_dense_csv(run.output(dir + "/prediction.csv"), square_rows(fd.prediction.probs, fd.prediction.n));
    if (fd.roc) {
      write_roc(run.output(dir + "/roc.csv"), *fd.roc);
      sum += fd.roc->auc;
      ++ok;
    }
  }
  write_text(run.output("auc.csv"), os.str());
  run.finish();
  if (ok) std::cout << "mean AUC " << format_double(sum / ok) << " over " << ok << " folds\n";
  if (ok < folds.size()) {
    std::cerr << folds.size() - ok << " of " << folds.size() << " folds failed\n";
    return kPartial;
  }
  return kOk;
}

struct SummarizeArgs {
  std::string trace, series, weeks;
};

int cmd_summarize(const SummarizeArgs& a, const Globals& g) {
  Run run("summarize", g);
  run.input(a.trace);
  const auto tr = read_trace_jsonl(a.trace);
  if (tr.samples.empty()) throw InputError("trace has no samples");
  const std::size_t T = tr.samples.front().zeta.size();
  std::vector<std::string> labels;
  if (!a.series.empty()) {
    run.input(a.series);
    const auto s = load_series(a.series);
    if (s.size() != T) throw InputError("series length does not match the trace");
    labels = s.periods;
  } else {
    for (std::size_t t = 0; t < T; ++t) labels.push_back(std::to_string(t));
  }

  const auto sc = state_coclustering(tr.samples);
  write_dense_csv(run.output("state_coclustering.csv"), sc.rows());
  const auto part = point_partition(sc);
  std::ostringstream ps;
  ps << "period,state\n";
  for (std::size_t t = 0; t < T; ++t) ps << labels[t] << ',' << part[t] << '\n';
  write_text(run.output("state_partition.csv"), ps.str());
  const auto cps = change_points(part);

  const auto idx = index_series(tr.samples);
  std::ostringstream is;
  is << "period,upsilon_mean,upsilon_lo,upsilon_hi,chi_mean,chi_lo,chi_hi\n";
  for (std::size_t t = 0; t < T; ++t) {
    const auto& u = idx.upsilon[t];
    const auto& c = idx.chi[t];
    is << labels[t] << ',' << format_double(u.mean) << ',' << format_double(u.lo) << ',' << format_double(u.hi)
       << ',' << format_double(c.mean) << ',' << format_double(c.lo) << ',' << format_double(c.hi) << '\n';
  }
  write_text(run.output("index_series.csv"), is.str());

  std::vector<std::size_t> weeks = a.weeks.empty() ? std::vector<std::size_t>{0} : parse_weeks(a.weeks, T);
  if (a.weeks.empty()) weeks.insert(weeks.end(), cps.begin(), cps.end());
  const auto tab = hyper_table(tr.samples, run.cfg().model, weeks);
  std::ostringstream hs;
  hs << "name,post_mean,post_lo,post_hi,prior_mean,prior_lo,prior_hi,post_interval,prior_interval\n";
  for (const auto& h : tab)
    hs << h.name << ',' << format_double(h.post_mean) << ',' << format_double(h.post_lo) << ','
       << format_double(h.post_hi) << ',' << format_double(h.prior_mean) << ',' << format_double(h.prior_lo) << ','
       << format_double(h.prior_hi) << ",\"" << format_interval(h.post_lo, h.post_hi) << "\",\""
       << format_interval(h.prior_lo, h.prior_hi) << "\"\n";
  write_text(run.output("hyper_table.csv"), hs.str());

  json rep;
  rep["samples"] = tr.samples.size();
  rep["periods"] = T;
  rep["regimes"] = part.empty() ? 0 : *std::max_element(part.begin(), part.end()) + 1;
  rep["state_partition"] = part;
  json cpj = json::array();
  for (auto t : cps) cpj.push_back({{"index", t}, {"period", labels[t]}});
  rep["change_points"] = cpj;
  std::vector<double> occ, gam;
  for (std::size_t b = 0; b < tr.samples.size(); ++b) {
    occ.push_back(double(tr.samples[b].occupied_count()));
    gam.push_back(tr.samples[b].gamma);
  }
  rep["occupied_states_mean"] = std::accumulate(occ.begin(), occ.end(), 0.0) / double(occ.size());
  // null when there are too few samples or the series is constant
  auto gw = [](const std::vector<double>& x) {
    if (x.size() < 100) return json(nullptr);
    const double z = geweke_z(x);
    return std::isfinite(z) ? json(z) : json(nullptr);
  };
  rep["geweke_z"] = {{"gamma", gw(gam)}, {"occupied_states", gw(occ)}};
  if (!a.weeks.empty()) {
    json tp;
    for (auto t : weeks) {
      const auto tc = trader_coclustering(tr.samples, t);
      write_dense_csv(run.output("trader_coclustering_" + std::to_string(t) + ".csv"), tc.rows());
      tp[labels[t]] = point_partition(tc);
    }
    rep["trader_partitions"] = tp;
  }
  write_json(run.output("report.json"), rep);
  run.finish();
  std::cout << rep["regimes"] << " regimes, " << cps.size() << " change points\n";
  return kOk;
}

struct SimulateArgs {
  std::size_t n = 40, T = 60;
  std::string preset = "planted", format = "packed";
};

int cmd_simulate(const SimulateArgs& a, const Globals& g) {
  Run run("simulate", g);
  Rng rng(g.seed);
  GeneratorSettings gs;
  if (a.preset == "planted") {
    gs = planted_regimes(a.n, a.T, rng);
  } else if (a.preset == "prior") {
    gs.prior = run.cfg().model;
  } else {
    throw InputError("unknown simulation preset '" + a.preset + "'");
  }
  const auto d = generate_synthetic(gs, a.n, a.T, rng);
  write_series(d.series, run.output(a.format == "packed" ? "series.jsonl" : "series"));
  ChainTrace truth;
  truth.samples = {d.truth};
  truth.sample_iterations = {0};
  Observations obs(d.series);
  truth.sample_loglik = {log_likelihood(d.truth, obs)};
  write_trace_jsonl(truth, run.output("truth.jsonl"));
  run.finish();
  return kOk;
}

template <class T>
void opt_size(CLI::App* sc, const std::string& name, std::optional<T>& v, const std::string& help) {
  sc->add_option_function<T>(name, [&v](const T& x) { v = x; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hmmsbm: hidden Markov stochastic blockmodels for weekly trading networks"};
  app.set_version_flag("--version", std::string(HMMSBM_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "bin an edge list into weekly sociomatrices");
  ingest->add_option("--edges", ia.edges, "CSV with date,seller,buyer")->required();
  ingest->add_option("--roster", ia.roster, "trader identifiers, one per line")->required();
  ingest->add_option("--format", ia.format, "dir or packed")->check(CLI::IsMember({"dir", "packed"}));

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "weekly summary statistics");
  stats->add_option("--series", sa.series, "series directory or .jsonl")->required();
  stats->add_option("--columns", sa.columns, "two statistics for bivariate.csv, comma separated");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "run the blockmodel HMM sampler");
  fit->add_option("--series", fa.series, "series directory or .jsonl")->required();
  opt_size(fit, "--iters", fa.iters, "post-burn-in iterations");
  opt_size(fit, "--burnin", fa.burnin, "burn-in iterations");
  opt_size(fit, "--thin", fa.thin, "keep every k-th iteration");
  opt_size(fit, "--max-states", fa.max_states, "state truncation S");

  BaselineArgs ba;
  auto* base = app.add_subcommand("fit-baseline", "Gaussian-emission HMM on two weekly statistics");
  base->add_option("--input", ba.input, "bivariate CSV from `stats --columns`")->required();

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict", "one-step-ahead link probabilities from a trace");
  pred->add_option("--trace", pa.trace, "trace.jsonl")->required();
  pred->add_option("--horizon", pa.horizon, "label of the predicted period");
  opt_size(pred, "--threshold", pa.threshold, "also write links with probability above this");

  BacktestArgs bta;
  auto* bt = app.add_subcommand("backtest", "rolling one-step-ahead evaluation");
  bt->add_option("--series", bta.series, "series directory or .jsonl")->required();
  bt->add_option("--holdout", bta.holdout, "number of final periods to predict");
  opt_size(bt, "--iters", bta.iters, "post-burn-in iterations per fold");
  opt_size(bt, "--burnin", bta.burnin, "burn-in iterations per fold");
  opt_size(bt, "--thin", bta.thin, "keep every k-th iteration");
  opt_size(bt, "--max-states", bta.max_states, "state truncation S");

  SummarizeArgs sma;
  auto* sum = app.add_subcommand("summarize", "posterior summaries of a trace");
  sum->add_option("--trace", sma.trace, "trace.jsonl")->required();
  sum->add_option("--series", sma.series, "series, for period labels");
  sum->add_option("--weeks", sma.weeks, "0-based periods for trader co-clustering and the hyper table");

  SimulateArgs sia;
  auto* sim = app.add_subcommand("simulate", "draw a synthetic network series");
  sim->add_option("--n", sia.n, "traders")->check(CLI::Range(2, 100000));
  sim->add_option("--T", sia.T, "periods")->check(CLI::Range(1, 100000));
  sim->add_option("--preset", sia.preset, "planted or prior")->check(CLI::IsMember({"planted", "prior"}));
  sim->add_option("--format", sia.format, "dir or packed")->check(CLI::IsMember({"dir", "packed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ia, g);
    if (stats->parsed()) return cmd_stats(sa, g);
    if (fit->parsed()) return cmd_fit(fa, g);
    if (base->parsed()) return cmd_fit_baseline(ba, g);
    if (pred->parsed()) return cmd_predict(pa, g);
    if (bt->parsed()) return cmd_backtest(bta, g);
    if (sum->parsed()) return cmd_summarize(sma, g);
    if (sim->parsed()) return cmd_simulate(sia, g);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInput;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUnexpected;
}
