#pragma once

#include <complex>
#include <string>

#include "infoflow/dictionary.hpp"
#include "infoflow/freeze.hpp"
#include "infoflow/parallel.hpp"

namespace infoflow {

// G = (1/M) sum Psi(x_m)^T Psi(x_m), C = (1/M) sum Psi(x_m)^T Psi(y_m).
struct LiftedData {
    Mat G;
    Mat C;
    int pairs = 0;
};

LiftedData lift(const PairedDataset &pairs, const Dictionary &dict, Exec exec = Exec::parallel);
LiftedData lift(const TimeSeries &ts, const Dictionary &dict, Exec exec = Exec::parallel);

enum class Method { edmd, robust_edmd, nsdmd };
std::string method_name(Method m);
Method parse_method(const std::string &s);

struct SolverOptions {
    double tol = 1e-10;      // ADMM primal/dual residual tolerance (relative)
    int max_iter = 100000;
    double rho = 1.0;
    double tol_feas = 1e-8;  // nsdmd constraint tolerance
    double nsdmd_tol = 1e-7;
    int nsdmd_max_iter = 2000;
    int restore_iter = 2000;
};

struct OperatorApprox {
    Mat K;
    Mat P;       // empty unless nsdmd
    Mat Lambda;  // empty unless nsdmd
    double lambda_reg = 0;
    double residual = 0;  // final objective value
    Method method = Method::edmd;
    int iterations = 0;
    bool converged = true;
    double feasibility = 0;  // largest constraint violation (nsdmd)
    std::vector<double> objective_trace;
    std::string dict_id;
};

double robust_objective(const Mat &G, const Mat &C, const Mat &K, double lambda_reg);

OperatorApprox edmd(const LiftedData &ld);
OperatorApprox robust_edmd(const LiftedData &ld, double lambda_reg, const SolverOptions &opt = {});
OperatorApprox nsdmd(const LiftedData &ld, const Mat &Lambda, double lambda_reg, const SolverOptions &opt = {});

Mat pf_from_koopman(const Mat &K, const Mat &Lambda);
RowVec propagate_density(const RowVec &w, const Mat &P);
Vec propagate_observable(const Vec &v, const Mat &K);

// Linear dictionary: the system matrix consistent with C = G * A^T.
Mat system_matrix(const OperatorApprox &op);
// Lambda K Lambda^{-1}; row-stochastic for an nsdmd fit.
Mat markov_matrix(const Mat &K, const Mat &Lambda);

struct Feasibility {
    double min_K = 0;
    double min_M = 0;
    double row_sum_err = 0;
    double violation() const;
};
Feasibility nsdmd_feasibility(const Mat &K, const Mat &Lambda);

struct EigenPair {
    std::complex<double> value;
    Eigen::VectorXcd vector;
};
std::vector<EigenPair> spectrum(const Mat &K, int top_k);

// Row-wise Euclidean projection onto the probability simplex.
Mat project_rows_to_simplex(const Mat &V);

// lambda = 3 sigma_hat * psi_bound
double lambda_heuristic(double sigma_hat, double psi_bound = 1.0);

}  // namespace infoflow
