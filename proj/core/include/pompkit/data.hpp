#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pompkit {

/// Row-major matrix; each row is one time point, particle or simulation.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<double> row_span(RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}
inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Observation times t_1..t_N after a start time t0, with one row of
/// observables per time. Missing values are stored as NaN.
struct TimeSeriesData {
  double t0 = 0.0;
  std::vector<double> times;
  std::vector<std::string> names;
  RowMatrix observations;  // N x r

  std::size_t size() const noexcept { return times.size(); }
  std::span<const double> row(std::size_t n) const { return row_span(observations, static_cast<Eigen::Index>(n)); }
  std::size_t column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;

  /// Checks t0 <= t_1 < t_2 < ... < t_N and matching dimensions.
  void validate() const;
};

/// Build a dataset of N observation slots filled with NaN.
TimeSeriesData empty_data(double t0, std::vector<double> times, std::vector<std::string> names);

/// Time-indexed covariates with linear interpolation between rows.
class CovariateTable {
 public:
  CovariateTable() = default;
  CovariateTable(std::vector<double> times, std::vector<std::string> names, RowMatrix rows);

  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const RowMatrix& rows() const noexcept { return rows_; }
  std::size_t column(const std::string& name) const;

  /// Linear interpolation of one column. Outside the table range the two
  /// nearest rows are extrapolated linearly and a warning is logged once.
  double value(std::size_t column, double t) const;
  std::vector<double> lookup(double t) const;

 private:
  void warn_extrapolation(double t) const;

  std::vector<double> times_;
  std::vector<std::string> names_;
  RowMatrix rows_;
  std::shared_ptr<std::atomic<bool>> warned_ = std::make_shared<std::atomic<bool>>(false);
};

/// Equivalent to CovariateTable::lookup.
std::vector<double> covariate_lookup(const CovariateTable& table, double t);

// CSV ingestion. Files are UTF-8 with a header row; "NA" or an empty field
// reads as NaN.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);
std::string format_number(double value);

/// Reads a `time` column plus the named observables; other columns are ignored.
TimeSeriesData read_time_series(const std::string& path, const std::vector<std::string>& observables, double t0);
/// Reads a `time` column plus every other column as a covariate.
CovariateTable read_covariates(const std::string& path);

}  // namespace pompkit
