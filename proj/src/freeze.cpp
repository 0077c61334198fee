#include "infoflow/freeze.hpp"

namespace infoflow {

void PairedDataset::validate() const
{
    if (inputs.rows() != targets.rows() || inputs.cols() != targets.cols())
        throw Error("paired dataset inputs and targets differ in shape");
    if (inputs.rows() < 1) throw Error("paired dataset is empty");
    for (int s : frozen_idx)
        for (int p = 0; p < pairs(); ++p)
            if (targets(p, s) != inputs(p, s)) throw Error("frozen coordinate moved in pair " + std::to_string(p));
}

PairedDataset consecutive_pairs(const TimeSeries &ts)
{
    ts.validate();
    const int m = ts.steps() - 1;
    return PairedDataset{ts.data.topRows(m), ts.data.bottomRows(m), {}};
}

PairedDataset consecutive_pairs(std::span<const TimeSeries> runs)
{
    if (runs.empty()) throw Error("no trajectories given");
    int total = 0;
    for (const auto &ts : runs) {
        ts.validate();
        if (ts.dims() != runs[0].dims()) throw Error("trajectories differ in dimension");
        total += ts.steps() - 1;
    }
    PairedDataset out{Mat(total, runs[0].dims()), Mat(total, runs[0].dims()), {}};
    int row = 0;
    for (const auto &ts : runs) {
        const int m = ts.steps() - 1;
        out.inputs.middleRows(row, m) = ts.data.topRows(m);
        out.targets.middleRows(row, m) = ts.data.bottomRows(m);
        row += m;
    }
    return out;
}

PairedDataset freeze_pairs(const PairedDataset &pairs, const IndexSet &frozen_idx)
{
    IndexSet s = normalized(frozen_idx, pairs.dims());
    if (s.empty()) throw Error("freeze set is empty");
    if (static_cast<int>(s.size()) == pairs.dims()) throw Error("freeze set covers every coordinate");
    PairedDataset out = pairs;
    for (int c : s) out.targets.col(c) = out.inputs.col(c);
    out.frozen_idx = s;
    return out;
}

PairedDataset freeze_dataset(const TimeSeries &ts, const IndexSet &frozen_idx)
{
    return freeze_pairs(consecutive_pairs(ts), frozen_idx);
}

PairedDataset freeze_dataset(std::span<const TimeSeries> runs, const IndexSet &frozen_idx)
{
    return freeze_pairs(consecutive_pairs(runs), frozen_idx);
}

}  // namespace infoflow
