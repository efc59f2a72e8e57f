#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rfrac {

/// Worker count used by parallel loops. Results never depend on it: every
/// output element is produced by exactly one worker in a fixed order.
void set_thread_count(unsigned count);
unsigned thread_count() noexcept;

/// Calls body(begin, end) on contiguous chunks of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1024);

}  // namespace rfrac
