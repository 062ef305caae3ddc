#pragma once

#include <cstddef>
#include <functional>

namespace sobolev_glue {

/// Worker count: SOBOLEV_GLUE_THREADS if set and positive, otherwise the
/// hardware concurrency (0 means auto).
unsigned thread_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is
/// visited exactly once; callers write per-index results so the outcome does
/// not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sobolev_glue
