#include "pompkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pompkit/error.hpp"

namespace pompkit {

namespace {

std::size_t find_name(const std::vector<std::string>& names, const std::string& name, const char* what) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorKind::Lookup, std::string("no ") + what + " named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

void check_unique(const std::vector<std::string>& names, const char* what) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw Error(ErrorKind::Validation, std::string("empty ") + what + " name");
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j])
        throw Error(ErrorKind::Validation, std::string("duplicate ") + what + " name '" + names[i] + "'");
  }
}

const char* component_name(Component c) {
  switch (c) {
    case Component::RProcess: return "rprocess";
    case Component::DProcess: return "dprocess";
    case Component::RMeasure: return "rmeasure";
    case Component::DMeasure: return "dmeasure";
    case Component::Initializer: return "initializer";
    case Component::RPrior: return "rprior";
    case Component::DPrior: return "dprior";
  }
  return "component";
}

}  // namespace

std::size_t ModelSpec::param_index(const std::string& n) const { return find_name(param_names, n, "parameter"); }

std::size_t ModelSpec::state_index(const std::string& n) const { return find_name(state_names, n, "state"); }

std::vector<std::size_t> ModelSpec::accumulator_indices() const {
  std::vector<std::size_t> out;
  for (const auto& a : accumulators) out.push_back(state_index(a));
  return out;
}

std::vector<double> ModelSpec::dense(const ParamVector& p) const {
  std::vector<double> out(param_names.size());
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    auto idx = p.index_of(param_names[i]);
    if (!idx) throw Error(ErrorKind::Lookup, "model '" + name + "' needs parameter '" + param_names[i] + "'");
    out[i] = p.value(*idx);
  }
  return out;
}

ParamVector ModelSpec::named(std::span<const double> theta) const {
  if (theta.size() != param_names.size())
    throw Error(ErrorKind::Validation, "parameter vector has wrong length for model '" + name + "'");
  return ParamVector(param_names, std::vector<double>(theta.begin(), theta.end()));
}

const ParamVector& ModelSpec::default_params() const {
  if (!params) throw Error(ErrorKind::Lookup, "model '" + name + "' has no stored parameters");
  return *params;
}

void ModelSpec::validate() const {
  check_unique(state_names, "state");
  check_unique(observable_names, "observable");
  check_unique(param_names, "parameter");
  for (const auto& a : accumulators)
    if (std::find(state_names.begin(), state_names.end(), a) == state_names.end())
      throw Error(ErrorKind::Validation, "accumulator '" + a + "' is not a declared state");
  if (data.names != observable_names)
    throw Error(ErrorKind::Validation, "data columns do not match the model's observables");
  data.validate();
  if (params) (void)dense(*params);
}

void require(const ModelSpec& model, Component component, const std::string& algorithm) {
  bool present = true;
  switch (component) {
    case Component::RProcess: present = static_cast<bool>(model.rprocess); break;
    case Component::DProcess: present = static_cast<bool>(model.dprocess); break;
    case Component::RMeasure: present = static_cast<bool>(model.rmeasure); break;
    case Component::DMeasure: present = static_cast<bool>(model.dmeasure); break;
    case Component::Initializer: (void)resolved_initializer(model); break;
    case Component::RPrior: present = static_cast<bool>(model.rprior); break;
    case Component::DPrior: present = static_cast<bool>(model.dprior); break;
  }
  if (!present)
    throw Error(ErrorKind::MissingComponent,
                algorithm + " requires '" + component_name(component) + "' but model '" + model.name + "' lacks it");
}

Initializer resolved_initializer(const ModelSpec& model) {
  if (model.initializer) return model.initializer;
  std::vector<std::size_t> source(model.state_dim());
  for (std::size_t s = 0; s < model.state_dim(); ++s) {
    const std::string ic = model.state_names[s] + ".0";
    auto it = std::find(model.param_names.begin(), model.param_names.end(), ic);
    if (it == model.param_names.end())
      throw Error(ErrorKind::MissingComponent, "model '" + model.name + "' has no initializer and no parameter '" +
                                                   ic + "' for state '" + model.state_names[s] + "'");
    source[s] = static_cast<std::size_t>(it - model.param_names.begin());
  }
  return [source](std::span<double> x, std::span<const double> theta, double, Rng&, const CovariateTable&) {
    for (std::size_t s = 0; s < source.size(); ++s) x[s] = theta[source[s]];
  };
}

double log_measure_density(const ModelSpec& model, std::span<const double> y, std::span<const double> x,
                           std::span<const double> theta, double t) {
  if (std::all_of(y.begin(), y.end(), [](double v) { return std::isnan(v); })) return 0.0;
  const double ld = model.dmeasure(y, x, theta, t, model.covariates);
  return std::isnan(ld) ? -std::numeric_limits<double>::infinity() : ld;
}

std::vector<double> transform_dense(const ModelSpec& model, std::span<const double> theta,
                                    TransformDirection direction) {
  std::vector<double> out(theta.begin(), theta.end());
  const auto& fn = direction == TransformDirection::ToEstimation ? model.to_estimation : model.from_estimation;
  if (!fn) return out;
  fn(theta, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!std::isfinite(out[i]))
      throw Error(ErrorKind::Domain, std::string("transform ") +
                                         (direction == TransformDirection::ToEstimation ? "to" : "from") +
                                         " estimation scale gave a non-finite value for parameter '" +
                                         model.param_names[i] + "'");
  return out;
}

ParamVector transform_params(const ModelSpec& model, const ParamVector& params, TransformDirection direction) {
  // Parameters the model does not declare pass through untouched.
  const auto theta = model.dense(params);
  const auto out = transform_dense(model, theta, direction);
  ParamVector result = params;
  for (std::size_t i = 0; i < model.param_names.size(); ++i) result.set(model.param_names[i], out[i]);
  return result;
}

ProcessSimulator discrete_time(StepFunction step, double delta_t) {
  if (!(delta_t > 0)) throw Error(ErrorKind::Domain, "discrete_time: delta_t must be positive");
  return [step = std::move(step), delta_t](std::span<double> x, std::span<const double> theta, double t,
                                           double t_next, Rng& rng, const CovariateTable& cov) {
    const auto nsteps = static_cast<long>(std::llround((t_next - t) / delta_t));
    for (long k = 0; k < nsteps; ++k) step(x, theta, t + static_cast<double>(k) * delta_t, delta_t, rng, cov);
  };
}

ProcessSimulator euler(StepFunction step, double dt) {
  if (!(dt > 0)) throw Error(ErrorKind::Domain, "euler: dt must be positive");
  return [step = std::move(step), dt](std::span<double> x, std::span<const double> theta, double t, double t_next,
                                      Rng& rng, const CovariateTable& cov) {
    const double span = t_next - t;
    if (!(span > 0)) return;
    const auto nsteps = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(nsteps);
    for (long k = 0; k < nsteps; ++k) step(x, theta, t + static_cast<double>(k) * h, h, rng, cov);
  };
}

}  // namespace pompkit
