#include "infoflow/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include <omp.h>

namespace infoflow {

namespace {

int initial_threads()
{
    if (const char *env = std::getenv("INFOFLOW_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

std::atomic<int> &thread_cap()
{
    static std::atomic<int> cap{initial_threads()};
    return cap;
}

}  // namespace

int max_threads() { return thread_cap().load(); }

void set_max_threads(int n) { thread_cap().store(n > 0 ? n : 1); }

}  // namespace infoflow
