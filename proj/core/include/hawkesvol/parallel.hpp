#pragma once

#include <cstddef>
#include <functional>

namespace hawkesvol {

// Worker count: HAWKESVOL_THREADS if set, otherwise the hardware concurrency.
std::size_t default_thread_count();
void set_thread_count(std::size_t n);

// Calls body(i) for i in [0, n). Each index is handled exactly once; bodies must
// only write to index-owned output so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hawkesvol
