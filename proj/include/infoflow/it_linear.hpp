#pragma once

#include <optional>
#include <span>
#include <string>

#include "infoflow/operator.hpp"
#include "infoflow/parallel.hpp"
#include "infoflow/types.hpp"

namespace infoflow {

// x and y partition the coordinates; x1 (optional) is the source part of x.
struct SubspaceSplit {
    IndexSet x_idx;
    IndexSet y_idx;
    IndexSet x1_idx;

    IndexSet x2_idx() const;  // x minus x1
    void validate(int n) const;
};

// Pairwise split i -> j: y = {j}, x = everything else, x1 = {i}.
SubspaceSplit pair_split(int from, int to, int n);

struct CovarianceState {
    Mat Sigma;
    int t = 0;
    bool steady = false;
};

CovarianceState propagate_covariance(const Mat &A, const Mat &Sigma0, double sigma, int t_steps);
CovarianceState steady_state_covariance(const Mat &A, double sigma);

// Sigma_x - Sigma_xy Sigma_y^{-1} Sigma_xy^T
Mat schur_complement(const Mat &Sigma, const IndexSet &x_idx, const IndexSet &y_idx);

// 1/2 log |A_yx S A_yx^T + sigma^2 I|, S the Schur complement of Sigma_y in the (xs, y) block.
// With xs empty only the noise term remains.
double gaussian_conditional_entropy(const Mat &A, const Mat &Sigma, double sigma, const IndexSet &y_idx,
                                    const IndexSet &xs);

double transfer_xy_analytic(const Mat &A, double sigma, const SubspaceSplit &split, const Mat &Sigma_t);
double transfer_x1y_analytic(const Mat &A, double sigma, const SubspaceSplit &split, const Mat &Sigma_t);
// Noise enters as (lambda/3)^2.
double conditional_entropy_linear(const Mat &A_hat, const Mat &Sigma_t, double noise_bound_lambda,
                                  const SubspaceSplit &split);

struct PairTransfer {
    IndexSet from;
    IndexSet to;
    double T = 0;
    double H = 0;
    double H_frozen = 0;
};

struct TransferResult {
    std::vector<PairTransfer> pairs;
    std::vector<std::string> labels;
    std::string t = "steady_state";
    double sigma = 0;  // noise level used
    std::string mode = "linear";
    std::vector<std::string> warnings;

    // n x n matrix with T(i, j) = T_{i->j}; single-coordinate pairs only.
    Mat matrix(int n) const;
    const PairTransfer &find(int from, int to) const;
};

struct LinearTransferOptions {
    double lambda_reg = 0;
    std::optional<double> sigma_hint;
    bool steady_state = false;
    int t_steps = 1;  // transient: Sigma(0) = I propagated t_steps times
    SolverOptions solver;
};

struct LinearFit {
    Mat A_hat;
    double sigma_hat = 0;  // residual RMS per coordinate
};

LinearFit fit_linear(const PairedDataset &pairs, double lambda_reg, const SolverOptions &opt = {});

// Algorithm on data: fit, propagate covariance, refit on the freeze dataset, take the entropy
// difference for each requested split.
TransferResult transfer_linear_datadriven(std::span<const TimeSeries> runs, const SubspaceSplit &split,
                                          const LinearTransferOptions &opt = {});
TransferResult transfer_linear_datadriven(const TimeSeries &ts, const SubspaceSplit &split,
                                          const LinearTransferOptions &opt = {});

// Every ordered pair i -> j, i != j.
TransferResult transfer_matrix_datadriven(std::span<const TimeSeries> runs, const LinearTransferOptions &opt = {},
                                          Exec exec = Exec::parallel);
TransferResult transfer_matrix_datadriven(const TimeSeries &ts, const LinearTransferOptions &opt = {},
                                          Exec exec = Exec::parallel);
TransferResult transfer_matrix_analytic(const Mat &A, double sigma, const CovarianceState &cov,
                                        Exec exec = Exec::parallel);

}  // namespace infoflow
