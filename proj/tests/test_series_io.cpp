#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hmmsbm/errors.hpp"
#include "hmmsbm/series_io.hpp"

using namespace hmmsbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hmmsbm_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NetworkSeries random_series(std::size_t n, std::size_t T, unsigned seed) {
  std::mt19937 g(seed);
  std::bernoulli_distribution b(0.3);
  NetworkSeries s;
  s.roster = TraderRoster::numbered(n);
  for (std::size_t t = 0; t < T; ++t) {
    s.periods.push_back("w" + std::to_string(100 + t));
    Sociomatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && b(g)) m.set(i, j, true);
    s.matrices.push_back(m);
  }
  return s;
}

}  // namespace

TEST_CASE("edge csv parsing") {
  std::istringstream ok("date,seller,buyer\n2024-01-02,A,B\n2024-01-03,B,C\n");
  auto recs = parse_edge_csv(ok);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].seller == "B");
  std::istringstream bad_header("day,seller,buyer\n");
  CHECK_THROWS_AS(parse_edge_csv(bad_header), InputError);
  std::istringstream bad_date("date,seller,buyer\n2024-13-02,A,B\n");
  CHECK_THROWS_AS(parse_edge_csv(bad_date), InputError);
  std::istringstream short_row("date,seller,buyer\n2024-01-02,A\n");
  CHECK_THROWS_AS(parse_edge_csv(short_row), InputError);
}

TEST_CASE("rle round trip") {
  auto s = random_series(9, 4, 1);
  for (const auto& m : s.matrices) CHECK(decode_rle(encode_rle(m), 9) == m);
  CHECK(encode_rle(Sociomatrix(3)) == "9");
  CHECK(decode_rle("3,1,5", 3)(1, 0));
}

TEST_CASE("rle rejects diagonal bits and wrong lengths") {
  CHECK_THROWS_AS(decode_rle("0,1,8", 3), InputError);
  CHECK_THROWS_AS(decode_rle("8", 3), InputError);
  CHECK_THROWS_AS(decode_rle("10", 3), InputError);
}

TEST_CASE("series directory round trip is byte identical") {
  auto s = random_series(6, 3, 2);
  auto d1 = scratch("dir1"), d2 = scratch("dir2");
  write_series_dir(s, d1);
  auto back = read_series_dir(d1);
  CHECK(back == s);
  write_series_dir(back, d2);
  for (auto f : {"roster.txt", "periods.txt", "week_1.csv", "week_3.csv"}) CHECK(slurp(d1 / f) == slurp(d2 / f));
  CHECK(load_series(d1) == s);
}

TEST_CASE("packed series round trip is byte identical") {
  auto s = random_series(12, 5, 3);
  auto p1 = scratch("s1.jsonl"), p2 = scratch("s2.jsonl");
  write_series_packed(s, p1);
  auto back = read_series_packed(p1);
  CHECK(back == s);
  write_series_packed(back, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(load_series(p1) == s);
}

TEST_CASE("malformed series directory") {
  auto d = scratch("bad");
  auto s = random_series(3, 1, 4);
  write_series_dir(s, d);
  {
    std::ofstream out(d / "week_1.csv");
    out << "0,1,2\n0,0,0\n0,0,0\n";
  }
  CHECK_THROWS_AS(read_series_dir(d), InputError);
  CHECK_THROWS_AS(read_series_dir(scratch("missing")), InputError);
}

TEST_CASE("dense csv and doubles") {
  auto p = scratch("dense.csv");
  std::vector<std::vector<double>> rows = {{0.1, 1.0 / 3.0}, {2.5e-17, 7.0}};
  write_dense_csv(p, rows);
  CHECK(read_dense_csv(p) == rows);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "NA");
}
