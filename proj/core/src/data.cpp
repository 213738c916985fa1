#include "pompkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"

namespace pompkit {

std::size_t TimeSeriesData::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorKind::Lookup, "no observable named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> TimeSeriesData::series(const std::string& name) const {
  const auto c = static_cast<Eigen::Index>(column(name));
  std::vector<double> out(size());
  for (std::size_t n = 0; n < size(); ++n) out[n] = observations(static_cast<Eigen::Index>(n), c);
  return out;
}

void TimeSeriesData::validate() const {
  if (static_cast<std::size_t>(observations.rows()) != times.size())
    throw Error(ErrorKind::Validation, "data has " + std::to_string(times.size()) + " times but " +
                                           std::to_string(observations.rows()) + " observation rows");
  if (static_cast<std::size_t>(observations.cols()) != names.size())
    throw Error(ErrorKind::Validation, "observation columns do not match observable names");
  if (!times.empty() && !(t0 <= times.front()))
    throw Error(ErrorKind::Validation, "t0 must not exceed the first observation time");
  for (std::size_t n = 1; n < times.size(); ++n)
    if (!(times[n - 1] < times[n]))
      throw Error(ErrorKind::Validation, "observation times must be strictly increasing (index " +
                                             std::to_string(n + 1) + ")");
}

TimeSeriesData empty_data(double t0, std::vector<double> times, std::vector<std::string> names) {
  TimeSeriesData d;
  d.t0 = t0;
  d.observations = RowMatrix::Constant(static_cast<Eigen::Index>(times.size()),
                                       static_cast<Eigen::Index>(names.size()),
                                       std::numeric_limits<double>::quiet_NaN());
  d.times = std::move(times);
  d.names = std::move(names);
  d.validate();
  return d;
}

CovariateTable::CovariateTable(std::vector<double> times, std::vector<std::string> names, RowMatrix rows)
    : times_(std::move(times)), names_(std::move(names)), rows_(std::move(rows)) {
  if (static_cast<std::size_t>(rows_.rows()) != times_.size())
    throw Error(ErrorKind::Validation, "covariate table: row count differs from time count");
  if (static_cast<std::size_t>(rows_.cols()) != names_.size())
    throw Error(ErrorKind::Validation, "covariate table: column count differs from name count");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i - 1] < times_[i]))
      throw Error(ErrorKind::Validation, "covariate times must be strictly increasing");
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (std::count(names_.begin(), names_.end(), names_[i]) != 1)
      throw Error(ErrorKind::Validation, "duplicate covariate name '" + names_[i] + "'");
}

std::size_t CovariateTable::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorKind::Lookup, "no covariate named '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

void CovariateTable::warn_extrapolation(double t) const {
  if (!warned_->exchange(true)) {
    std::ostringstream m;
    m << "covariate lookup at t=" << t << " outside table range [" << times_.front() << ", " << times_.back()
      << "]; extrapolating linearly";
    log::warn(m.str());
  }
}

double CovariateTable::value(std::size_t col, double t) const {
  if (times_.empty()) throw Error(ErrorKind::Validation, "covariate lookup in an empty table");
  const auto c = static_cast<Eigen::Index>(col);
  const std::size_t n = times_.size();
  if (n == 1) {
    if (t != times_[0]) warn_extrapolation(t);
    return rows_(0, c);
  }
  std::size_t hi;
  if (t < times_.front()) {
    warn_extrapolation(t);
    hi = 1;
  } else if (t > times_.back()) {
    warn_extrapolation(t);
    hi = n - 1;
  } else {
    hi = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
    if (hi == n) return rows_(static_cast<Eigen::Index>(n - 1), c);  // t == last node
    if (times_[hi - 1] == t) return rows_(static_cast<Eigen::Index>(hi - 1), c);
  }
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return rows_(static_cast<Eigen::Index>(lo), c) +
         w * (rows_(static_cast<Eigen::Index>(hi), c) - rows_(static_cast<Eigen::Index>(lo), c));
}

std::vector<double> CovariateTable::lookup(double t) const {
  std::vector<double> out(names_.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = value(c, t);
  return out;
}

std::vector<double> covariate_lookup(const CovariateTable& table, double t) { return table.lookup(t); }

// --- CSV -------------------------------------------------------------------

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::Validation, "CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

double parse_field(const std::string& field, const std::string& path, std::size_t line) {
  if (field.empty() || field == "NA" || field == "NaN" || field == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    if (field == "Inf" || field == "inf") return std::numeric_limits<double>::infinity();
    if (field == "-Inf" || field == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::Validation, path + ":" + std::to_string(line) + ": not a number: '" + field + "'");
  }
  return value;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (table.header.empty()) {
      if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      table.header = split_line(line);
      continue;
    }
    auto fields = split_line(line);
    if (fields.size() != table.header.size())
      throw Error(ErrorKind::Validation, path + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) row[i] = parse_field(fields[i], path, lineno);
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorKind::Validation, path + ": empty CSV file");
  return table;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

TimeSeriesData read_time_series(const std::string& path, const std::vector<std::string>& observables, double t0) {
  const CsvTable csv = read_csv(path);
  const std::size_t tc = csv.column("time");
  std::vector<std::size_t> cols;
  for (const auto& name : observables) cols.push_back(csv.column(name));
  TimeSeriesData d;
  d.t0 = t0;
  d.names = observables;
  d.observations.resize(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t n = 0; n < csv.rows.size(); ++n) {
    d.times.push_back(csv.rows[n][tc]);
    for (std::size_t c = 0; c < cols.size(); ++c)
      d.observations(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) = csv.rows[n][cols[c]];
  }
  d.validate();
  return d;
}

CovariateTable read_covariates(const std::string& path) {
  const CsvTable csv = read_csv(path);
  const std::size_t tc = csv.column("time");
  std::vector<std::string> names;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < csv.header.size(); ++i)
    if (i != tc) {
      names.push_back(csv.header[i]);
      cols.push_back(i);
    }
  std::vector<double> times;
  RowMatrix rows(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t n = 0; n < csv.rows.size(); ++n) {
    times.push_back(csv.rows[n][tc]);
    for (std::size_t c = 0; c < cols.size(); ++c)
      rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) = csv.rows[n][cols[c]];
  }
  return CovariateTable(std::move(times), std::move(names), std::move(rows));
}

}  // namespace pompkit
