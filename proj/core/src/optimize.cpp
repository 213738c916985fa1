#include "pompkit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pompkit/error.hpp"
#include "pompkit/log.hpp"

namespace pompkit {

std::string to_string(OptimStatus status) {
  switch (status) {
    case OptimStatus::Converged: return "converged";
    case OptimStatus::ConvergedDegenerate: return "converged-degenerate";
    case OptimStatus::MaxEvaluations: return "max-evaluations";
  }
  return "unknown";
}

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options) {
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  const std::size_t n = x0.size();
  NelderMeadResult result;
  bool warned_nan = false;

  auto eval = [&](std::span<const double> x) {
    ++result.evaluations;
    const double v = f(x);
    if (std::isnan(v)) {
      if (!warned_nan) log::warn("nelder_mead: objective returned NaN; treating as +inf");
      warned_nan = true;
      return std::numeric_limits<double>::infinity();
    }
    return v;
  };

  const double f0 = eval(x0);
  if (!std::isfinite(f0)) throw Error(ErrorKind::Domain, "nelder_mead: objective is not finite at the start point");
  if (n == 0) {
    result.x = x0;
    result.value = f0;
    return result;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1, f0);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += std::max(0.1, 0.1 * std::abs(x0[i]));
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s[i] = std::move(simplex[order[i]]);
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  sort_simplex();
  if (values.front() == values.back()) {
    result.x = x0;
    result.value = f0;
    result.status = OptimStatus::ConvergedDegenerate;
    return result;
  }

  for (;;) {
    const double best = values.front(), worst = values.back();
    if (worst - best <= options.reltol * (std::abs(best) + options.reltol)) {
      result.status = OptimStatus::Converged;
      break;
    }
    if (result.evaluations >= options.maxit) {
      result.status = OptimStatus::MaxEvaluations;
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    const auto& xh = simplex[n];
    for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + kReflect * (centroid[k] - xh[k]);
    const double fr = eval(xr);

    if (fr < best) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + kExpand * (xr[k] - centroid[k]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        values[n] = fe;
      } else {
        simplex[n] = xr;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = xr;
      values[n] = fr;
    } else {
      bool accepted = false;
      if (fr < worst) {
        for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] + kContract * (xr[k] - centroid[k]);
        const double fc = eval(xc);
        if (fc <= fr) {
          simplex[n] = xc;
          values[n] = fc;
          accepted = true;
        }
      } else {
        for (std::size_t k = 0; k < n; ++k) xc[k] = centroid[k] + kContract * (xh[k] - centroid[k]);
        const double fc = eval(xc);
        if (fc < worst) {
          simplex[n] = xc;
          values[n] = fc;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[0][k] + kShrink * (simplex[i][k] - simplex[0][k]);
          values[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }

  result.x = simplex.front();
  result.value = values.front();
  return result;
}

}  // namespace pompkit
