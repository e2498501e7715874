#pragma once

#include <cstddef>
#include <functional>

namespace hydro_adp {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 or 1 means
/// inline). Indices are handed out in contiguous blocks; the first exception
/// thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace hydro_adp
