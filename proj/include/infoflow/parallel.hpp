#pragma once

namespace infoflow {

// Every data-parallel kernel has a serial reference path selected by Exec.
enum class Exec { serial, parallel };

// Thread cap for parallel kernels. Initialized from INFOFLOW_THREADS when set.
int max_threads();
void set_max_threads(int n);

// Fixed block count for reductions, independent of the thread count, so that
// parallel sums are bit-identical however many threads run them.
constexpr int kReductionBlocks = 64;

}  // namespace infoflow
