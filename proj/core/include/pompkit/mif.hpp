#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pompkit/smc.hpp"

namespace pompkit {

struct MifSettings {
  ParamVector start;
  std::size_t M = 100;
  std::size_t J = 1000;
  /// Random-walk scale per parameter name. Unlisted parameters have scale 0
  /// and are held fixed.
  ParamVector rw_sd;
  /// Initial-value parameters, re-estimated from the filtered cloud at lag
  /// `ic_lag`. Names with zero scale are treated as fixed.
  std::vector<std::string> ivp_names;
  /// Defaults to min(N, 20).
  std::optional<std::size_t> ic_lag;
  double var_factor = 2.0;
  /// Cooling factor a in (0, 1). When unset it is derived from
  /// cooling_fraction f through a^(cooling_window - 1) = f.
  std::optional<double> cooling_factor;
  double cooling_fraction = 0.7;
  std::size_t cooling_window = 50;
  /// Perturb on the model's estimation scale.
  bool transform = false;
  std::size_t max_fail = 0;
};

struct MifResult {
  ParamVector theta_hat;
  /// Row m-1 holds theta_m on the natural scale.
  RowMatrix trace;
  /// Log likelihood reported by the perturbed filter of each iteration.
  std::vector<double> logliks;
  /// Perturbed filter of the final iteration (empty when M = 0).
  FilterResult final_filter;
  double cooling_factor = 1.0;
};

/// The cooling factor a implied by the settings.
double mif_cooling_factor(const MifSettings& settings);
/// Multiplier a^(m-1) applied to every random-walk scale in iteration m >= 1.
double mif_cooling_multiplier(const MifSettings& settings, std::size_t m);

/// Iterated filtering (IF1). Raises FilteringFailure when more than
/// `max_fail` observations in one iteration leave every particle with zero
/// weight.
MifResult mif(const ModelSpec& model, const MifSettings& settings, Rng& rng);

}  // namespace pompkit
