#pragma once

#include <cstddef>
#include <functional>

namespace resistograph {

struct Parallelism {
  /// 0 selects std::thread::hardware_concurrency().
  int threads = 1;

  int resolved() const noexcept;
};

/// Runs body(i) for i in [0, count). Each index is executed exactly once;
/// callers write results into per-index slots so output order never depends
/// on scheduling. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, Parallelism par,
                  const std::function<void(std::size_t)>& body);

}  // namespace resistograph
