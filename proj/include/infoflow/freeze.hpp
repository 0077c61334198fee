#pragma once

#include <span>

#include "infoflow/types.hpp"

namespace infoflow {

// Snapshot pairs (input -> target). frozen_idx is empty for plain consecutive pairs.
struct PairedDataset {
    Mat inputs;
    Mat targets;
    IndexSet frozen_idx;

    int pairs() const { return static_cast<int>(inputs.rows()); }
    int dims() const { return static_cast<int>(inputs.cols()); }
    void validate() const;
};

PairedDataset consecutive_pairs(const TimeSeries &ts);
// Pairs are formed inside each trajectory only, then stacked.
PairedDataset consecutive_pairs(std::span<const TimeSeries> runs);

// Pair t maps z_t to a target whose frozen coordinates are copied from z_t and
// whose remaining coordinates come from z_{t+1}.
PairedDataset freeze_dataset(const TimeSeries &ts, const IndexSet &frozen_idx);
PairedDataset freeze_dataset(std::span<const TimeSeries> runs, const IndexSet &frozen_idx);
PairedDataset freeze_pairs(const PairedDataset &pairs, const IndexSet &frozen_idx);

}  // namespace infoflow
