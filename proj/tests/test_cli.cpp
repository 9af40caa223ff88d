#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "checks.hpp"
#include "hmmsbm/config.hpp"
#include "hmmsbm/series_io.hpp"
#include "hmmsbm/trace_io.hpp"

using namespace hmmsbm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = fs::path(HMMSBM_SOURCE_DIR) / "tests" / "data";

int cli(const std::string& args) {
  const std::string cmd = std::string(HMMSBM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hmmsbm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(cli("--help") == 0);
  CHECK(cli("") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("fit") == 2);  // --series missing
}

TEST_CASE("ingest: golden files for the five-record fixture") {
  const auto out = scratch("ingest5");
  REQUIRE(cli("ingest --edges " + q(kData / "ingest5/edges.csv") + " --roster " + q(kData / "ingest5/roster.txt") +
              " --out " + q(out)) == 0);
  for (auto f : {"roster.txt", "periods.txt", "week_1.csv", "week_2.csv"})
    CHECK(slurp(out / "series" / f) == slurp(kData / "ingest5/expected" / f));
  const auto rep = read_json(out / "ingest_report.json");
  CHECK(rep["periods"] == 2);
  const auto man = read_json(out / "manifest.json");
  CHECK(man["command"] == "ingest");
  CHECK(man["outputs"].size() == 2);
  CHECK(man["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK_FALSE(fs::exists(out / "manifest.json.tmp"));
}

TEST_CASE("ingest: duplicates and a single record") {
  const auto dir = scratch("dup");
  const auto edges = slurp(kData / "ingest5/edges.csv");
  {
    std::ofstream out(dir / "doubled.csv");
    out << edges << edges.substr(edges.find('\n') + 1);
    std::ofstream one(dir / "one.csv");
    one << "date,seller,buyer\n2024-03-06,B,A\n";
  }
  const auto roster = q(kData / "ingest5/roster.txt");
  REQUIRE(cli("ingest --edges " + q(kData / "ingest5/edges.csv") + " --roster " + roster + " --out " + q(dir / "a")) == 0);
  REQUIRE(cli("ingest --edges " + q(dir / "doubled.csv") + " --roster " + roster + " --out " + q(dir / "b")) == 0);
  for (auto f : {"periods.txt", "week_1.csv", "week_2.csv"})
    CHECK(slurp(dir / "a/series" / f) == slurp(dir / "b/series" / f));
  REQUIRE(cli("ingest --format packed --edges " + q(dir / "one.csv") + " --roster " + roster + " --out " +
              q(dir / "c")) == 0);
  const auto s = load_series(dir / "c/series.jsonl");
  REQUIRE(s.size() == 1);
  CHECK(s.matrices[0](1, 0));
  CHECK(s.matrices[0].link_count() == 1);
}

TEST_CASE("ingest: input errors exit with code 2") {
  const auto dir = scratch("bad");
  {
    std::ofstream out(dir / "bad.csv");
    out << "date,seller,buyer\n2024-02-30,A,B\n";
  }
  const auto roster = q(kData / "ingest5/roster.txt");
  CHECK(cli("ingest --edges " + q(dir / "missing.csv") + " --roster " + roster + " --out " + q(dir)) == 2);
  CHECK(cli("ingest --edges " + q(dir / "bad.csv") + " --roster " + roster + " --out " + q(dir)) == 2);
  CHECK(cli("stats --series " + q(dir / "nothing") + " --out " + q(dir)) == 2);
}

TEST_CASE("stats on the complete digraph") {
  const auto dir = scratch("stats");
  NetworkSeries s;
  s.roster = TraderRoster::numbered(4);
  s.periods = {"w1", "w2"};
  Sociomatrix full(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) full.set(i, j, true);
  s.matrices = {full, full};
  write_series_packed(s, dir / "s.jsonl");
  REQUIRE(cli("stats --series " + q(dir / "s.jsonl") + " --out " + q(dir / "o")) == 0);
  const auto text = slurp(dir / "o/stats.csv");
  CHECK(text.substr(0, text.find('\n')) ==
        "period,active_traders,mean_degree,max_in_degree,max_out_degree,degree_correlation,clustering_coefficient,"
        "link_probability,assortativity_by_degree");
  CHECK(text.find("w1,4,6,3,3,NA,1,1,NA\n") != std::string::npos);
  // the complete graph has no variation, so a bivariate export must fail
  CHECK(cli("stats --series " + q(dir / "s.jsonl") + " --columns mean_degree,degree_correlation --out " +
            q(dir / "o2")) == 2);
  CHECK(cli("stats --series " + q(dir / "s.jsonl") + " --columns mean_degree --out " + q(dir / "o2")) == 2);
}

TEST_CASE("manifest digests follow input bytes") {
  const auto dir = scratch("digest");
  auto d = checks::planted_data(1, 6, 4);
  write_series_packed(d.series, dir / "s.jsonl");
  REQUIRE(cli("stats --series " + q(dir / "s.jsonl") + " --out " + q(dir / "a")) == 0);
  REQUIRE(cli("stats --series " + q(dir / "s.jsonl") + " --out " + q(dir / "b")) == 0);
  const auto da = read_json(dir / "a/manifest.json")["inputs"][0]["sha256"];
  CHECK(da == read_json(dir / "b/manifest.json")["inputs"][0]["sha256"]);
  d.series.matrices[0].set(0, 1, !d.series.matrices[0](0, 1));
  write_series_packed(d.series, dir / "s.jsonl");
  REQUIRE(cli("stats --series " + q(dir / "s.jsonl") + " --out " + q(dir / "c")) == 0);
  CHECK(da != read_json(dir / "c/manifest.json")["inputs"][0]["sha256"]);
}

TEST_CASE("fit: smoke, determinism and the state bound") {
  const auto dir = scratch("fit");
  const auto d = checks::planted_data(2, 8, 6);
  write_series_packed(d.series, dir / "s.jsonl");
  const std::string base = "fit --series " + q(dir / "s.jsonl") + " --iters 100 --burnin 20 --thin 2 --seed 5";
  REQUIRE(cli(base + " --out " + q(dir / "a")) == 0);
  REQUIRE(cli(base + " --out " + q(dir / "b")) == 0);
  for (auto f : {"trace.jsonl", "diagnostics.csv", "config.ini"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto man = read_json(dir / "a/manifest.json");
  CHECK(man["outputs"] == json::array({"trace.jsonl", "diagnostics.csv", "config.ini"}));
  CHECK(man["seed"] == 5);
  CHECK(read_trace_jsonl(dir / "a/trace.jsonl").samples.size() == 50);

  REQUIRE(cli(base + " --max-states 5 --out " + q(dir / "c")) == 0);
  for (const auto& sc : read_diagnostics_csv(dir / "c/diagnostics.csv")) CHECK(sc.occupied_states <= 5);
  for (const auto& st : read_trace_jsonl(dir / "c/trace.jsonl").samples) CHECK(st.max_states() == 5);
}

TEST_CASE("fit: config files") {
  const auto dir = scratch("cfg");
  const auto d = checks::planted_data(3, 6, 5);
  write_series_packed(d.series, dir / "s.jsonl");
  {
    std::ofstream out(dir / "ok.ini");
    out << "[run]\npreset = sens-beta-high\n[mcmc]\niters = 30\nburnin = 5\nthin = 3\n[model]\nmax_states = 4\n";
    std::ofstream bad(dir / "bad.ini");
    bad << "[model]\nnot_a_key = 1\n";
  }
  REQUIRE(cli("--config " + q(dir / "ok.ini") + " fit --series " + q(dir / "s.jsonl") + " --out " + q(dir / "a")) == 0);
  CHECK(read_trace_jsonl(dir / "a/trace.jsonl").samples.size() == 10);
  CHECK(slurp(dir / "a/config.ini").find("preset = sens-beta-high") != std::string::npos);
  // global flags may also follow the subcommand
  REQUIRE(cli("fit --series " + q(dir / "s.jsonl") + " --config " + q(dir / "ok.ini") + " --out " + q(dir / "b")) == 0);
  CHECK(slurp(dir / "a/trace.jsonl") == slurp(dir / "b/trace.jsonl"));
  CHECK(cli("--config " + q(dir / "bad.ini") + " fit --series " + q(dir / "s.jsonl") + " --out " + q(dir / "c")) == 2);
  for (const auto& name : {"default", "sens-alpha-beta-low", "sens-beta-high"}) {
    const auto p = fs::path(HMMSBM_SOURCE_DIR) / "configs" / (std::string(name) + ".ini");
    REQUIRE(fs::exists(p));
    CHECK(read_config(p) == preset_config(name));
  }
}

TEST_CASE("fit-baseline: planted regimes, T = 2 and reproducibility") {
  const auto dir = scratch("baseline");
  auto [s, truth] = checks::planted_bivariate(8, 60);
  write_bivariate_csv(s, dir / "b.csv");
  const std::string base = "fit-baseline --input " + q(dir / "b.csv") + " --seed 3";
  REQUIRE(cli(base + " --out " + q(dir / "a")) == 0);
  REQUIRE(cli(base + " --out " + q(dir / "b")) == 0);
  CHECK(slurp(dir / "a/incidence.csv") == slurp(dir / "b/incidence.csv"));
  const auto inc = read_dense_csv(dir / "a/incidence.csv");
  REQUIRE(inc.size() == 60);
  const auto pp = point_partition(CoClusteringMatrix::from_rows(inc));
  CHECK(oracle::ari(pp, truth) >= 0.95);

  BivariateSeries two;
  two.periods = {"a", "b"};
  two.x = {{0.1, 0.4}, {0.3, 0.2}};
  write_bivariate_csv(two, dir / "two.csv");
  REQUIRE(cli("fit-baseline --input " + q(dir / "two.csv") + " --out " + q(dir / "c")) == 0);
  const auto w = read_dense_csv(dir / "c/incidence.csv");
  REQUIRE(w.size() == 2);
  CHECK(w[0][0] == 1.0);
  CHECK(w[1][1] == 1.0);
}

TEST_CASE("simulate, fit and summarize recover the planted regimes") {
  const auto dir = scratch("e2e");
  REQUIRE(cli("simulate --n 30 --T 40 --seed 4 --out " + q(dir / "sim")) == 0);
  const auto truth = read_trace_jsonl(dir / "sim/truth.jsonl").samples.at(0);
  REQUIRE(cli("fit --series " + q(dir / "sim/series.jsonl") +
              " --iters 1000 --burnin 2000 --thin 5 --max-states 10 --seed 9 --out " + q(dir / "fit")) == 0);
  REQUIRE(cli("summarize --trace " + q(dir / "fit/trace.jsonl") + " --series " + q(dir / "sim/series.jsonl") +
              " --weeks 0,15 --out " + q(dir / "sum")) == 0);
  const auto rep = read_json(dir / "sum/report.json");
  CHECK(rep["regimes"] == 3);
  CHECK(rep["change_points"].size() == change_points(truth.zeta).size());
  CHECK(oracle::ari(rep["state_partition"].get<std::vector<int>>(), truth.zeta) >= 0.9);
  CHECK(fs::exists(dir / "sum/trader_coclustering_15.csv"));
  CHECK(fs::exists(dir / "sum/index_series.csv"));
  const auto tab = slurp(dir / "sum/hyper_table.csv");
  CHECK(tab.find("\"(0.025, 3.689)\"") != std::string::npos);
  CHECK(tab.find("\"(0.025, 0.975)\"") != std::string::npos);
  CHECK(cli("summarize --trace " + q(dir / "fit/trace.jsonl") + " --weeks 99 --out " + q(dir / "x")) == 2);
}

TEST_CASE("backtest with one holdout equals fit + predict") {
  const auto dir = scratch("bt");
  const auto d = checks::planted_data(6, 12, 8);
  write_series_packed(d.series, dir / "s.jsonl");
  write_series_packed(d.series.prefix(7), dir / "prefix.jsonl");
  const std::string mc = " --iters 60 --burnin 20 --thin 2 --max-states 4";
  REQUIRE(cli("backtest --holdout 1 --series " + q(dir / "s.jsonl") + mc + " --seed 17 --out " + q(dir / "bt")) == 0);
  REQUIRE(cli("fit --series " + q(dir / "prefix.jsonl") + mc + " --seed " + std::to_string(derive_seed(17, 0)) +
              " --out " + q(dir / "fit")) == 0);
  REQUIRE(cli("predict --trace " + q(dir / "fit/trace.jsonl") + " --threshold 0.5 --out " + q(dir / "pred")) == 0);
  CHECK(slurp(dir / "bt/fold_1/prediction.csv") == slurp(dir / "pred/prediction.csv"));
  CHECK(fs::exists(dir / "pred/predicted_links.csv"));
  // manual scoring of the predicted week
  PredictionMatrix pm;
  pm.n = 12;
  for (const auto& row : read_dense_csv(dir / "pred/prediction.csv")) pm.probs.insert(pm.probs.end(), row.begin(), row.end());
  const auto auc = roc_auc(pm, d.series.matrices[7]).auc;
  const auto text = slurp(dir / "bt/auc.csv");
  CHECK(text.find("1,7," + d.series.periods[7] + "," + format_double(auc) + ",\n") != std::string::npos);
}

TEST_CASE("backtest reports partial failure with code 4") {
  const auto dir = scratch("bt4");
  auto d = checks::planted_data(7, 10, 6);
  d.series.matrices.back() = Sociomatrix(10);
  write_series_packed(d.series, dir / "s.jsonl");
  CHECK(cli("backtest --holdout 2 --jobs 2 --series " + q(dir / "s.jsonl") +
            " --iters 20 --burnin 5 --max-states 3 --out " + q(dir / "o")) == 4);
  const auto text = slurp(dir / "o/auc.csv");
  CHECK(text.find("2,5,") != std::string::npos);
  CHECK(text.find(",NA,") != std::string::npos);
  CHECK(fs::exists(dir / "o/fold_1/roc.csv"));
}
