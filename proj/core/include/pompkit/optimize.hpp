#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pompkit {

enum class OptimStatus {
  Converged,
  /// Every vertex of the initial simplex had the same value.
  ConvergedDegenerate,
  MaxEvaluations,
};

std::string to_string(OptimStatus status);

struct NelderMeadOptions {
  /// Maximum number of objective evaluations.
  int maxit = 2000;
  /// Stop once f_worst - f_best <= reltol * (|f_best| + reltol).
  double reltol = 1e-8;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  OptimStatus status = OptimStatus::Converged;
  int evaluations = 0;
  int iterations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimises f by the Nelder-Mead simplex method (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). The initial simplex is x0 plus a step of
/// max(0.1, 0.1 |x0_i|) along each axis. NaN objective values count as +inf.
/// The returned point is never worse than x0.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace pompkit
