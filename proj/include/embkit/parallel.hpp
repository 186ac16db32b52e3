#pragma once

#include <cstddef>
#include <functional>

namespace embkit {

// Toolkit-wide worker cap. 0 restores the hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(chunk_begin, chunk_end) over a fixed chunk grid of [begin, end).
// The grid depends only on `grain`, never on the thread count, so any
// deterministic per-chunk work stays deterministic under parallelism.
void parallel_for(std::size_t begin, std::size_t end, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// Deterministic reduction: per-chunk partial sums are folded in chunk order,
// so the result is bit-identical for any thread count.
double parallel_sum(std::size_t begin, std::size_t end, std::size_t grain,
                    const std::function<double(std::size_t, std::size_t)>& chunk_sum);

} // namespace embkit
