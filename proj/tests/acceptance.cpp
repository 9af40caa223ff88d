// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "checks.hpp"

using namespace hmmsbm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::pair<bool, std::string> r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r.first) ++failures;
  std::printf("%s %2d %s: %s [%.1fs]\n", r.first ? "PASS" : "FAIL", id, what.c_str(), r.second.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

#ifdef HMMSBM_CLI_PATH
int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HMMSBM_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
#endif

}  // namespace

int main() {
  report(1, "EPPF sums to one", [] {
    const double e = checks::eppf_normalization_error(6);
    return std::pair{e <= 1e-10, fmt("max error %.2e", e)};
  });

  report(2, "partition sampler matches EPPF", [] {
    int pass = 0;
    for (std::uint64_t s = 1; s <= 20; ++s)
      if (checks::partition_chi2_pvalue(s, {0.3, 1.0}, 100000) > 0.001) ++pass;
    return std::pair{pass >= 19, std::to_string(pass) + "/20 seeds with p > 0.001"};
  });

  report(3, "transitivity index vs triad simulation", [] {
    double worst = 0;
    std::uint64_t seed = 30;
    for (const auto& c : checks::transitivity_cases()) worst = std::max(worst, checks::transitivity_z(c, 1000000, seed++));
    double ups = 0;
    for (const auto& c : checks::transitivity_cases()) {
      BetaHyper h = c.h;
      h.a_diag = h.a_off;
      h.b_diag = h.b_off;
      ups = std::max(ups, std::abs(assortativity_index(h)));
    }
    return std::pair{worst <= 3.0 && ups == 0.0, fmt("max |z| %.2f", worst) + fmt(", max |upsilon| %.1e", ups)};
  });

  report(4, "conjugate updates vs grid posteriors", [] {
    const double e = std::max({checks::theta_grid_error(), checks::pi_grid_error(), checks::rate_grid_error(),
                               checks::mu_grid_error(), checks::omega_grid_error()});
    return std::pair{e <= 1e-6, fmt("sup-norm %.2e", e)};
  });

  report(5, "FFBS vs path enumeration", [] {
    const double tv = checks::ffbs_tv(4, 100000, 50);
    return std::pair{tv <= 0.02, fmt("TV %.4f", tv)};
  });

  report(6, "MH kernels vs grid targets", [] {
    const double g = checks::gamma_ks(100000, 5, 60);
    const double ab = checks::ab_tv(100000, 5, 61);
    const auto [ka, kb] = checks::ab_prior_ks(100000, 5, 62);
    const double py = checks::py_tv(100000, 5, 63);
    const bool ok = g <= 0.02 && ka <= 0.02 && kb <= 0.02 && ab <= 0.05 && py <= 0.05;
    return std::pair{ok, fmt("gamma KS %.4f", g) + fmt(", a/b TV %.4f", ab) + fmt(", a/b prior KS %.4f", std::max(ka, kb)) +
                             fmt(", alpha/beta TV %.4f", py)};
  });

  report(7, "getting it right", [] {
    const auto r = checks::getting_it_right(200000, 70);
    double worst = 0;
    std::string name;
    for (std::size_t k = 0; k < r.z.size(); ++k)
      if (std::abs(r.z[k]) > worst) worst = std::abs(r.z[k]), name = r.names[k];
    return std::pair{worst <= 3.0, fmt("max |z| %.2f", worst) + " (" + name + ")"};
  });

  report(8, "planted regime recovery", [] {
    int pass = 0;
    std::string aris;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const double a = checks::regime_recovery_ari(s);
      if (a >= 0.9) ++pass;
      aris += fmt(" %.3f", a);
    }
    return std::pair{pass >= 4, std::to_string(pass) + "/5 runs with ARI >= 0.9;" + aris};
  });

  report(9, "backtest AUC", [] {
    const auto aucs = checks::backtest_aucs(1, 5);
    double m = 0;
    for (double a : aucs) m += a / double(aucs.size());
    return std::pair{m >= 0.85, fmt("mean AUC %.3f", m)};
  });

  report(10, "baseline HMM recovery and prior intervals", [] {
    const double a = checks::baseline_recovery_ari(1);
    const auto e = PriorSpec::exponential(1.0), u = PriorSpec::uniform01();
    const auto ie = format_interval(e.quantile(0.025), e.quantile(0.975));
    const auto iu = format_interval(u.quantile(0.025), u.quantile(0.975));
    const bool ok = a >= 0.95 && ie == "(0.025, 3.689)" && iu == "(0.025, 0.975)";
    return std::pair{ok, fmt("ARI %.3f, ", a) + ie + " " + iu};
  });

  report(11, "Binder optimum and Geweke coverage", [] {
    const auto bad = checks::binder_mismatches(6, 100, 110);
    const double cov = checks::geweke_coverage(500, 5000, 0.0, 5);
    return std::pair{bad == 0 && cov >= 0.92 && cov <= 0.98,
                     std::to_string(bad) + " Binder mismatches" + fmt(", coverage %.3f", cov)};
  });

#ifdef HMMSBM_CLI_PATH
  report(12, "end-to-end determinism", [] {
    const auto root = fs::temp_directory_path() / "hmmsbm_acceptance";
    fs::remove_all(root);
    std::string bad;
    for (const char* run : {"r1", "r2"}) {
      const auto d = root / run;
      const std::string q = "\"" + d.string() + "\"";
      if (cli("simulate --n 20 --T 20 --seed 5 --out " + q + "/sim") != 0 ||
          cli("fit --series " + q + "/sim/series.jsonl --iters 200 --burnin 100 --seed 6 --out " + q + "/fit") != 0 ||
          cli("summarize --trace " + q + "/fit/trace.jsonl --series " + q + "/sim/series.jsonl --out " + q + "/sum") != 0)
        return std::pair{false, std::string("command failed in ") + run};
    }
    for (const char* f : {"sim/series.jsonl", "fit/trace.jsonl", "fit/diagnostics.csv", "sum/report.json",
                          "sum/hyper_table.csv", "sum/state_coclustering.csv"})
      if (slurp(root / "r1" / f) != slurp(root / "r2" / f) || slurp(root / "r1" / f).empty()) bad += std::string(" ") + f;
    return std::pair{bad.empty(), bad.empty() ? std::string("trace and report files identical") : "differs:" + bad};
  });
#else
  report(12, "end-to-end determinism", [] { return std::pair{false, std::string("command-line tool not built")}; });
#endif

  return failures == 0 ? 0 : 1;
}
