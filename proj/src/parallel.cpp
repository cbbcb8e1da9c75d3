#include "mtqm/parallel.hpp"

#include <memory>
#include <mutex>

#include <tbb/global_control.h>
#include <tbb/info.h>

namespace mtqm {

namespace {
std::mutex control_mutex;
std::unique_ptr<tbb::global_control> control;
std::unique_ptr<tbb::task_arena> arena;
int requested = 0;
} // namespace

void set_thread_count(int n)
{
    std::lock_guard lock(control_mutex);
    arena.reset();
    control.reset();
    requested = n > 0 ? n : 0;
    if (requested > 0) {
        // The global limit defaults to the core count; lift it so that an explicit request is honoured.
        control = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                        static_cast<std::size_t>(requested));
        arena = std::make_unique<tbb::task_arena>(requested);
    }
}

int thread_count()
{
    std::lock_guard lock(control_mutex);
    if (requested > 0)
        return requested;
    return tbb::info::default_concurrency();
}

namespace detail {
tbb::task_arena* current_arena() { return arena.get(); }
} // namespace detail

} // namespace mtqm
