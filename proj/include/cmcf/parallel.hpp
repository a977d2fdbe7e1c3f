#pragma once

#include <cstdint>
#include <functional>

namespace cmcf {

/// Fixed chunk size of parallel_for. Chunk boundaries never depend on the
/// worker count, so per-chunk partial results combine deterministically.
inline constexpr std::int64_t kParallelChunk = 8192;

/// Worker count: 1 unless CMCF_THREADS asks for more; never exceeds the
/// hardware. Results never depend on the value because every parallel loop
/// is a pure per-index map.
int thread_count();

/// Runs fn(begin, end) over [0, total) in fixed-size chunks, possibly on
/// several threads.
void parallel_for(std::int64_t total,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace cmcf
