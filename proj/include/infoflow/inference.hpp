#pragma once

#include "infoflow/it_linear.hpp"
#include "infoflow/parallel.hpp"
#include "infoflow/types.hpp"

namespace infoflow {

constexpr double kDefaultTransferThreshold = 0.01;
constexpr double kDefaultDmdThreshold = 0.01;

// Edge i -> j iff |T_{i->j}| >= threshold; edge weight is T.
DirectedGraph it_topology(const TransferResult &tr, double threshold, int n);

struct GrangerConfig {
    int p = 1;  // lags of the predictee
    int q = 1;  // lags of the predictor
    int r = 1;  // lags of each conditioning coordinate
    double alpha = 0.05;

    void validate() const;
};

struct GrangerResult {
    double G = 0;  // ln(RSS_restricted / RSS_full)
    double F = 0;
    double p_value = 1;
    bool significant = false;
};

// Conditioning set = all coordinates outside predictor and predictee. The predictee must be a
// single coordinate.
GrangerResult granger(const TimeSeries &ts, const IndexSet &predictor_idx, const IndexSet &predictee_idx,
                      const GrangerConfig &cfg);
DirectedGraph granger_topology(const TimeSeries &ts, const GrangerConfig &cfg, Exec exec = Exec::parallel);

// Edge j -> i iff |A_hat(i, j)| >= threshold, i != j.
DirectedGraph dmd_threshold_topology(const Mat &A_hat, double threshold = kDefaultDmdThreshold);

struct TopologyScore {
    int true_positive = 0;
    int false_positive = 0;
    int false_negative = 0;
    double percent_error = 0;  // 100 (FP + FN) / max(1, true edge count)
};

TopologyScore topology_error(const DirectedGraph &estimated, const DirectedGraph &truth);

}  // namespace infoflow
