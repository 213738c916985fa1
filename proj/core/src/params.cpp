#include "pompkit/params.hpp"

#include <algorithm>
#include <sstream>

#include "pompkit/error.hpp"

namespace pompkit {

namespace {

void check_name(const std::vector<std::string>& names, const std::string& name) {
  if (name.empty()) throw Error(ErrorKind::Validation, "empty name in named vector");
  if (std::count(names.begin(), names.end(), name) > 0)
    throw Error(ErrorKind::Validation, "duplicate name '" + name + "'");
}

}  // namespace

NamedVector::NamedVector(std::initializer_list<std::pair<std::string, double>> entries) {
  for (const auto& [name, value] : entries) {
    check_name(names_, name);
    names_.push_back(name);
    values_.push_back(value);
  }
}

NamedVector::NamedVector(std::vector<std::string> names, std::vector<double> values) {
  if (names.size() != values.size())
    throw Error(ErrorKind::Validation, "named vector: " + std::to_string(names.size()) + " names but " +
                                           std::to_string(values.size()) + " values");
  for (std::size_t i = 0; i < names.size(); ++i) {
    check_name(names_, names[i]);
    names_.push_back(std::move(names[i]));
  }
  values_ = std::move(values);
}

std::optional<std::size_t> NamedVector::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

double NamedVector::operator[](std::string_view name) const {
  if (auto i = index_of(name)) return values_[*i];
  throw Error(ErrorKind::Lookup, "no entry named '" + std::string(name) + "'");
}

double& NamedVector::at(std::string_view name) {
  if (auto i = index_of(name)) return values_[*i];
  throw Error(ErrorKind::Lookup, "no entry named '" + std::string(name) + "'");
}

void NamedVector::set(std::string_view name, double value) {
  if (auto i = index_of(name)) {
    values_[*i] = value;
    return;
  }
  check_name(names_, std::string(name));
  names_.emplace_back(name);
  values_.push_back(value);
}

std::string to_string(const NamedVector& v) {
  std::ostringstream out;
  out.precision(6);
  out << '(';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v.name(i) << '=' << v.value(i);
  out << ')';
  return out.str();
}

}  // namespace pompkit
