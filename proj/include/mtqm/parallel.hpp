#pragma once

#include <cstddef>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/partitioner.h>
#include <tbb/task_arena.h>

namespace mtqm {

/// Caps worker threads for every subsequent parallel_for. 0 restores the default.
void set_thread_count(int n);
int thread_count();

namespace detail {
tbb::task_arena* current_arena();
}

/// Calls body(i) for i in [0, n). Each index is written by exactly one call, so results
/// do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body)
{
    if (n == 0)
        return;
    auto run = [&] {
        tbb::parallel_for(
            tbb::blocked_range<std::size_t>(0, n),
            [&](const tbb::blocked_range<std::size_t>& r) {
                for (std::size_t i = r.begin(); i != r.end(); ++i)
                    body(i);
            },
            tbb::static_partitioner());
    };
    if (auto* a = detail::current_arena())
        a->execute(run);
    else
        run();
}

} // namespace mtqm
