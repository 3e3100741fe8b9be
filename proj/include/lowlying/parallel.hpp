#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lowlying {

// 0 means "all hardware threads".
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n) on the worker pool. Results must be written to
// per-index slots by the caller so that reductions happen in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

// Pairwise sum in a fixed tree order; independent of how `values` was produced.
double tree_sum(const std::vector<double>& values);

}  // namespace lowlying
