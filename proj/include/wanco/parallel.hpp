#pragma once

#include <cstddef>
#include <functional>

namespace wanco {

/// Worker cap from WANCO_THREADS. Unset, 0 or 1 means a single ordered worker.
std::size_t worker_count();

/// Overrides the environment for the current process (0 restores it).
void set_worker_count(std::size_t n);

/// Runs fn(i) for i in [0, n_tasks). Tasks must write to disjoint outputs;
/// callers merge per-task results in index order so the result never
/// depends on the worker count.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& fn);

/// Fixed shard size used for batch evaluation.
inline constexpr std::size_t kChunkSize = 512;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

}  // namespace wanco
