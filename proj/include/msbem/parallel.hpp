/**
 * \file parallel.hpp
 * \brief Minimal thread fan-out used by the assembly loops.
 *
 * The thread count comes from MSBEM_THREADS (default: hardware concurrency).
 * Deterministic mode forces one thread. Callers only parallelize work whose
 * results are written to disjoint slots, so results do not depend on the
 * thread count either way.
 */
#ifndef MSBEM_PARALLEL_HPP
#define MSBEM_PARALLEL_HPP

#include <functional>

namespace msbem {

void set_deterministic(bool on);
bool deterministic();
void set_num_threads(int n);  // 0 = automatic
int num_threads();

/// Calls fn(begin, end) on contiguous subranges of [0, n).
void parallel_for(int n, const std::function<void(int, int)> &fn);

}  // namespace msbem

#endif  // MSBEM_PARALLEL_HPP
