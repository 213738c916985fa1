#pragma once

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <cstddef>

namespace pompkit {

/// Runs f(i) for i in [0, n). Every index must write only its own outputs;
/// under that rule the result does not depend on the thread count. The
/// number of worker threads is governed by tbb::global_control.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t grain = 64) {
  if (n <= grain) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, grain), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i = r.begin(); i != r.end(); ++i) f(i);
  });
}

}  // namespace pompkit
