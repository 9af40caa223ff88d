#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hmmsbm {

/// Ordered set of trader identifiers shared by every period of a series.
class TraderRoster {
 public:
  TraderRoster() = default;
  /// Throws std::invalid_argument on duplicates or fewer than two traders.
  explicit TraderRoster(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const TraderRoster& other) const { return ids_ == other.ids_; }

  /// Roster with identifiers "1".."n", used for simulated data.
  static TraderRoster numbered(std::size_t n);

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Binary directed adjacency for one period. Entry (i,j) = 1 means i sold to j.
/// The diagonal is structurally zero.
class Sociomatrix {
 public:
  Sociomatrix() = default;
  explicit Sociomatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

  /// Builds from 0/1 rows; rejects non-square input, non-binary entries and
  /// nonzero diagonal entries.
  static Sociomatrix from_rows(const std::vector<std::vector<int>>& rows);

  std::size_t size() const { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  /// Setting a diagonal entry to 1 throws.
  void set(std::size_t i, std::size_t j, bool value);

  std::size_t link_count() const;
  std::vector<std::size_t> out_degrees() const;
  std::vector<std::size_t> in_degrees() const;
  /// Off-diagonal (i,j) pairs with y_ij = 1, row-major order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

  bool operator==(const Sociomatrix& other) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct NetworkSeries {
  TraderRoster roster;
  std::vector<std::string> periods;
  std::vector<Sociomatrix> matrices;

  std::size_t size() const { return matrices.size(); }
  std::size_t nodes() const { return roster.size(); }

  /// Throws std::invalid_argument when dimensions disagree, T = 0 or period
  /// labels are not strictly increasing.
  void validate() const;
  /// First `t` periods.
  NetworkSeries prefix(std::size_t t) const;

  bool operator==(const NetworkSeries& other) const = default;
};

struct EdgeRecord {
  std::chrono::sys_days date;
  std::string seller;
  std::string buyer;
};

/// Parses YYYY-MM-DD. Throws std::invalid_argument on malformed or impossible dates.
std::chrono::sys_days parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days day);
/// Monday that starts the ISO-8601 week containing `day`.
std::chrono::sys_days iso_week_start(std::chrono::sys_days day);

struct IngestResult {
  NetworkSeries series;
  std::size_t skipped_off_roster = 0;
  std::size_t dropped_self_trades = 0;
};

/// Bins transactions into ISO weeks. Every week between the first and the last
/// record gets a matrix, including weeks without trades.
IngestResult ingest_edge_list(const std::vector<EdgeRecord>& records, const TraderRoster& roster);

struct NetworkSummary {
  std::size_t active_traders = 0;
  double mean_degree = 0.0;  // mean total (in + out) degree over all n nodes
  std::size_t max_in_degree = 0;
  std::size_t max_out_degree = 0;
  std::optional<double> degree_correlation;  // undefined when a degree vector is constant
  double clustering_coefficient = 0.0;       // global transitivity, symmetrized graph
  double link_probability = 0.0;
  std::optional<double> assortativity_by_degree;  // Newman r, symmetrized graph

  bool operator==(const NetworkSummary& other) const = default;
};

NetworkSummary network_summary(const Sociomatrix& m);
std::vector<NetworkSummary> summary_series(const NetworkSeries& s);

/// Names accepted by summary_column, in CSV column order.
const std::vector<std::string>& summary_column_names();
/// Numeric value of a named summary column; NaN for undefined statistics.
double summary_column(const NetworkSummary& s, std::string_view name);

}  // namespace hmmsbm
