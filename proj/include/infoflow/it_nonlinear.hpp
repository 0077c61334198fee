#pragma once

#include <span>
#include <vector>

#include "infoflow/dictionary.hpp"
#include "infoflow/it_linear.hpp"
#include "infoflow/operator.hpp"

namespace infoflow {

struct DensityCoefficients {
    enum class Kind { stationary, uniform, cell_concentrated };
    RowVec w;
    Kind kind = Kind::stationary;
    int cell = -1;
};

// Fixed point of w -> w M with M = Lambda K Lambda^{-1} (= P^T), scaled so that w . mass = 1,
// mass being the integrals of the dictionary functions. A chain that leaves every density
// fixed (M = I) gets the uniform vector.
DensityCoefficients stationary_coefficients(const Mat &M, const Vec &mass);

// Least-squares projection of the uniform density on cell i onto span(Psi), rescaled so that
// w . Theta_i = 1. Throws when the relative L2 residual of the projection exceeds 0.1.
DensityCoefficients cell_concentrated_coefficients(int cell, const Dictionary &dict, const Partition &part,
                                                   const Mat &Lambda, const Mat &Theta);

// How the per-cell start density wbar(i) is formed.
//  responsibility: wbar_k proportional to w_k Theta_{k,i} (the part of w that lives in cell i);
//  concentrated:   cell_concentrated_coefficients(i).
enum class JointMode { responsibility, concentrated };

struct JointDistribution {
    Mat Gamma;           // Gamma(i, j) = Prob(z_{t+1} in D_j, z_t in D_i)
    double raw_mass = 0;  // total before normalization
    double min_raw = 0;   // most negative entry before clamping
};

struct JointInputs {
    const Dictionary *dict = nullptr;  // concentrated mode only
    const Partition *part = nullptr;   // concentrated mode only
    const Mat *Lambda = nullptr;       // concentrated mode only
};

JointDistribution joint_probability(const DensityCoefficients &w, const Mat &M, const Mat &Theta,
                                    JointMode mode = JointMode::responsibility, const JointInputs &extra = {},
                                    Exec exec = Exec::parallel);

// Q(a, b) = sum of Gamma(i, j) over cells whose y-projections are a and b.
Mat marginalize_subspace(const Mat &Gamma, const IndexSet &y_idx, const Partition &part);

double discrete_entropy(const Mat &Q);

// Count-based joint: stationary vector of the row-normalized transition counts times the
// transition matrix (Ulam).
Mat count_joint(const PairedDataset &pairs, const Partition &part);

struct NonlinearOptions {
    DictSpec dict;
    std::vector<int> resolution;  // empty: default_resolution
    double lambda_reg = 0;
    JointMode mode = JointMode::responsibility;
    SolverOptions solver;
    Exec exec = Exec::parallel;
};

struct NonlinearTransfer {
    TransferResult result;
    Dictionary dict;
    Partition part;
    OperatorApprox full;
    OperatorApprox frozen;
    DensityCoefficients w;
    Mat Gamma;
    Mat Gamma_frozen;
};

// Several (source, target) pairs sharing one full fit; one frozen fit per distinct source.
struct SubspacePair {
    IndexSet from;
    IndexSet to;
};

struct NonlinearTransferSet {
    TransferResult result;
    Dictionary dict;
    Partition part;
    OperatorApprox full;
    std::vector<IndexSet> sources;
    std::vector<OperatorApprox> frozen;  // parallel to sources
    DensityCoefficients w;
    Mat Gamma;
    std::vector<Mat> Gamma_frozen;  // parallel to sources
};

NonlinearTransferSet transfer_nonlinear(std::span<const TimeSeries> runs, const std::vector<SubspacePair> &pairs,
                                        const NonlinearOptions &opt);

NonlinearTransfer transfer_nonlinear(std::span<const TimeSeries> runs, const IndexSet &x_idx,
                                     const IndexSet &y_idx, const NonlinearOptions &opt);
NonlinearTransfer transfer_nonlinear(const TimeSeries &ts, const IndexSet &x_idx, const IndexSet &y_idx,
                                     const NonlinearOptions &opt);

}  // namespace infoflow
