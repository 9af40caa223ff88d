#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmmsbm/network.hpp"

namespace hmmsbm {

// Edge list CSV with header `date,seller,buyer`.
std::vector<EdgeRecord> read_edge_csv(const std::filesystem::path& path);
std::vector<EdgeRecord> parse_edge_csv(std::istream& in);

// One identifier per line; blank lines ignored.
TraderRoster read_roster(const std::filesystem::path& path);
void write_roster(const TraderRoster& roster, const std::filesystem::path& path);

// Directory layout: roster.txt, periods.txt, week_1.csv .. week_T.csv (dense 0/1).
void write_series_dir(const NetworkSeries& series, const std::filesystem::path& dir);
NetworkSeries read_series_dir(const std::filesystem::path& dir);

// Packed JSON-lines: a header line {"format","n","roster"} followed by one line
// per week {"period","rle"}. The rle string lists alternating run lengths of
// the row-major n*n bit string, starting with a (possibly empty) run of zeros.
void write_series_packed(const NetworkSeries& series, const std::filesystem::path& path);
NetworkSeries read_series_packed(const std::filesystem::path& path);

std::string encode_rle(const Sociomatrix& m);
Sociomatrix decode_rle(const std::string& rle, std::size_t n);

// Either a series directory or a packed .jsonl file.
NetworkSeries load_series(const std::filesystem::path& path);

// Dense numeric CSV without header.
void write_dense_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_dense_csv(const std::filesystem::path& path);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace hmmsbm
