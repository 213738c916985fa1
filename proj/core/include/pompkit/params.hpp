#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pompkit {

/// Ordered list of uniquely named reals. Used for parameters and, with the
/// same semantics, for named state snapshots.
class NamedVector {
 public:
  NamedVector() = default;
  NamedVector(std::initializer_list<std::pair<std::string, double>> entries);
  NamedVector(std::vector<std::string> names, std::vector<double> values);

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<double> values_mutable() noexcept { return values_; }

  bool contains(std::string_view name) const { return index_of(name).has_value(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Throws a lookup error for undeclared names.
  double operator[](std::string_view name) const;
  double& at(std::string_view name);

  /// Overwrites an existing entry or appends a new one.
  void set(std::string_view name, double value);

  const std::string& name(std::size_t i) const { return names_.at(i); }
  double value(std::size_t i) const { return values_.at(i); }

  friend bool operator==(const NamedVector&, const NamedVector&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

using ParamVector = NamedVector;
using StateVector = NamedVector;

std::string to_string(const NamedVector& v);

}  // namespace pompkit
