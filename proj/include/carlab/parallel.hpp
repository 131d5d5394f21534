#pragma once

#include <cstddef>
#include <functional>

namespace carlab {

/// Worker count used when a caller passes 0.
std::size_t default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads.  Bodies must
/// write only to slot i of their output; callers reduce in index order so the
/// result does not depend on the worker count.  The first exception thrown by
/// any body is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace carlab
