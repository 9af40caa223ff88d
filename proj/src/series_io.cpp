#include "hmmsbm/series_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hmmsbm/errors.hpp"
#include "json.hpp"

namespace hmmsbm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<EdgeRecord> parse_edge_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("edge list is empty");
  const auto header = split(trim(line), ',');
  if (header != std::vector<std::string>{"date", "seller", "buyer"})
    throw InputError("edge list header must be date,seller,buyer");
  std::vector<EdgeRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3 || f[1].empty() || f[2].empty())
      throw InputError("malformed edge record on line " + std::to_string(lineno));
    try {
      out.push_back({parse_date(f[0]), f[1], f[2]});
    } catch (const std::invalid_argument& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<EdgeRecord> read_edge_csv(const fs::path& path) {
  auto in = open_in(path);
  return parse_edge_csv(in);
}

TraderRoster read_roster(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) ids.push_back(line);
  }
  try {
    return TraderRoster(std::move(ids));
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_roster(const TraderRoster& roster, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& id : roster.ids()) out << id << '\n';
}

void write_series_dir(const NetworkSeries& series, const fs::path& dir) {
  series.validate();
  fs::create_directories(dir);
  write_roster(series.roster, dir / "roster.txt");
  {
    auto out = open_out(dir / "periods.txt");
    for (const auto& p : series.periods) out << p << '\n';
  }
  const std::size_t n = series.nodes();
  for (std::size_t t = 0; t < series.size(); ++t) {
    auto out = open_out(dir / ("week_" + std::to_string(t + 1) + ".csv"));
    const auto& m = series.matrices[t];
    std::string row;
    for (std::size_t i = 0; i < n; ++i) {
      row.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j) row += ',';
        row += m(i, j) ? '1' : '0';
      }
      out << row << '\n';
    }
  }
}

NetworkSeries read_series_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a series directory: " + dir.string());
  NetworkSeries s;
  s.roster = read_roster(dir / "roster.txt");
  {
    auto in = open_in(dir / "periods.txt");
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty()) s.periods.push_back(line);
    }
  }
  const std::size_t n = s.roster.size();
  for (std::size_t t = 0; t < s.periods.size(); ++t) {
    const auto path = dir / ("week_" + std::to_string(t + 1) + ".csv");
    auto in = open_in(path);
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty()) continue;
      std::vector<int> row;
      for (const auto& f : split(line, ',')) {
        if (f != "0" && f != "1") throw InputError(path.string() + ": entries must be 0 or 1");
        row.push_back(f == "1");
      }
      rows.push_back(std::move(row));
    }
    if (rows.size() != n) throw InputError(path.string() + ": expected " + std::to_string(n) + " rows");
    try {
      s.matrices.push_back(Sociomatrix::from_rows(rows));
    } catch (const std::invalid_argument& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(dir.string() + ": " + e.what());
  }
  return s;
}

std::string encode_rle(const Sociomatrix& m) {
  const std::size_t n = m.size();
  std::string out;
  bool current = false;
  std::size_t run = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool b = m(i, j);
      if (b == current) {
        ++run;
      } else {
        out += std::to_string(run);
        out += ',';
        current = b;
        run = 1;
      }
    }
  out += std::to_string(run);
  return out;
}

Sociomatrix decode_rle(const std::string& rle, std::size_t n) {
  Sociomatrix m(n);
  std::size_t pos = 0;
  bool bit = false;
  for (const auto& f : split(rle, ',')) {
    std::size_t run = 0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), run);
    if (ec != std::errc() || p != f.data() + f.size()) throw InputError("malformed rle field");
    if (pos + run > n * n) throw InputError("rle longer than n*n");
    if (bit)
      for (std::size_t k = pos; k < pos + run; ++k) {
        if (k / n == k % n) throw InputError("rle sets a diagonal entry");
        m.set(k / n, k % n, true);
      }
    pos += run;
    bit = !bit;
  }
  if (pos != n * n) throw InputError("rle shorter than n*n");
  return m;
}

void write_series_packed(const NetworkSeries& series, const fs::path& path) {
  series.validate();
  auto out = open_out(path);
  json header = {{"format", "hmmsbm-series"}, {"n", series.nodes()}, {"roster", series.roster.ids()}};
  out << header.dump() << '\n';
  for (std::size_t t = 0; t < series.size(); ++t) {
    json week = {{"period", series.periods[t]}, {"rle", encode_rle(series.matrices[t])}};
    out << week.dump() << '\n';
  }
}

NetworkSeries read_series_packed(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty packed series");
  NetworkSeries s;
  try {
    const auto header = json::parse(line);
    if (header.at("format") != "hmmsbm-series") throw InputError("unknown packed format");
    s.roster = TraderRoster(header.at("roster").get<std::vector<std::string>>());
    const auto n = header.at("n").get<std::size_t>();
    if (n != s.roster.size()) throw InputError("header n differs from roster size");
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto week = json::parse(line);
      s.periods.push_back(week.at("period").get<std::string>());
      s.matrices.push_back(decode_rle(week.at("rle").get<std::string>(), n));
    }
    s.validate();
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return s;
}

NetworkSeries load_series(const fs::path& path) {
  if (fs::is_directory(path)) return read_series_dir(path);
  return read_series_packed(path);
}

void write_dense_csv(const fs::path& path, const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  std::string line;
  for (const auto& r : rows) {
    line.clear();
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) line += ',';
      line += format_double(r[j]);
    }
    out << line << '\n';
  }
}

std::vector<std::vector<double>> read_dense_csv(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split(line, ',')) {
      double v = 0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size())
        throw InputError(path.string() + ": non-numeric field '" + f + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hmmsbm
