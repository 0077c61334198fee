#include "infoflow/it_linear.hpp"

#include <algorithm>
#include <cmath>

#include "infoflow/dictionary.hpp"
#include "infoflow/dynamics.hpp"
#include "infoflow/freeze.hpp"

namespace infoflow {

IndexSet SubspaceSplit::x2_idx() const
{
    IndexSet out;
    for (int i : x_idx)
        if (std::find(x1_idx.begin(), x1_idx.end(), i) == x1_idx.end()) out.push_back(i);
    return out;
}

void SubspaceSplit::validate(int n) const
{
    if (normalized(x_idx, n) != x_idx || normalized(y_idx, n) != y_idx || normalized(x1_idx, n) != x1_idx)
        throw Error("split index sets must be sorted, unique and in range");
    if (y_idx.empty()) throw Error("target subspace is empty");
    if (x_idx.empty()) throw Error("source subspace is empty");
    if (static_cast<int>(x_idx.size() + y_idx.size()) != n || complement(y_idx, n) != x_idx)
        throw Error("x and y must partition the coordinates");
    for (int i : x1_idx)
        if (std::find(x_idx.begin(), x_idx.end(), i) == x_idx.end()) throw Error("x1 must be a subset of x");
}

SubspaceSplit pair_split(int from, int to, int n)
{
    if (from == to) throw Error("source and target coincide");
    if (from < 0 || to < 0 || from >= n || to >= n) throw Error("coordinate out of range");
    return SubspaceSplit{complement({to}, n), {to}, {from}};
}

namespace {

void check_psd(const Mat &S, const char *what)
{
    if (S.rows() != S.cols()) throw Error(std::string(what) + " is not square");
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, S.cwiseAbs().maxCoeff()))
        throw Error(std::string(what) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
        throw Error(std::string(what) + " is not positive semidefinite");
}

Mat sym(const Mat &S) { return 0.5 * (S + S.transpose()); }

double logdet_spd(Mat S)
{
    S = sym(S);
    Eigen::LLT<Mat> llt(S);
    if (llt.info() != Eigen::Success) {
        llt.compute(S + 1e-12 * Mat::Identity(S.rows(), S.cols()));
        if (llt.info() != Eigen::Success) throw Error("log-determinant argument is not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

CovarianceState propagate_covariance(const Mat &A, const Mat &Sigma0, double sigma, int t_steps)
{
    if (A.rows() != A.cols() || Sigma0.rows() != A.rows()) throw Error("covariance shape mismatch");
    if (t_steps < 0) throw Error("negative step count");
    check_psd(Sigma0, "initial covariance");
    const int n = static_cast<int>(A.rows());
    Mat S = sym(Sigma0);
    for (int t = 0; t < t_steps; ++t) S = sym(A * S * A.transpose() + sigma * sigma * Mat::Identity(n, n));
    return {S, t_steps, false};
}

CovarianceState steady_state_covariance(const Mat &A, double sigma)
{
    if (A.rows() != A.cols()) throw Error("system matrix is not square");
    if (!(spectral_radius(A) < 1.0)) throw Error("steady state needs a stable system matrix");
    const int n = static_cast<int>(A.rows());
    // doubling: S <- S + Ak S Ak^T, Ak <- Ak^2
    Mat S = sigma * sigma * Mat::Identity(n, n), Ak = A;
    for (int it = 0; it < 200; ++it) {
        Mat inc = Ak * S * Ak.transpose();
        S = sym(S + inc);
        Ak = Ak * Ak;
        if (inc.norm() <= 1e-16 * S.norm()) break;
    }
    return {S, -1, true};
}

Mat schur_complement(const Mat &Sigma, const IndexSet &x_idx, const IndexSet &y_idx)
{
    const Mat Sy = select(Sigma, y_idx, y_idx);
    const Mat Sxy = select(Sigma, x_idx, y_idx);
    const Mat Sx = select(Sigma, x_idx, x_idx);
    if (y_idx.empty()) return Sx;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(Sy), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo > 1e12) throw Error("covariance block of y is singular");
    return sym(Sx - Sxy * sym(Sy).ldlt().solve(Sxy.transpose()));
}

double gaussian_conditional_entropy(const Mat &A, const Mat &Sigma, double sigma, const IndexSet &y_idx,
                                    const IndexSet &xs)
{
    if (!(sigma > 0)) throw Error("noise level must be positive");
    const int ny = static_cast<int>(y_idx.size());
    if (xs.empty()) return ny * std::log(sigma);
    const Mat Ss = schur_complement(Sigma, xs, y_idx);
    const Mat Ayx = select(A, y_idx, xs);
    return 0.5 * logdet_spd(Ayx * Ss * Ayx.transpose() + sigma * sigma * Mat::Identity(ny, ny));
}

double transfer_xy_analytic(const Mat &A, double sigma, const SubspaceSplit &split, const Mat &Sigma_t)
{
    split.validate(static_cast<int>(A.rows()));
    return gaussian_conditional_entropy(A, Sigma_t, sigma, split.y_idx, split.x_idx) -
           static_cast<double>(split.y_idx.size()) * std::log(sigma);
}

double transfer_x1y_analytic(const Mat &A, double sigma, const SubspaceSplit &split, const Mat &Sigma_t)
{
    split.validate(static_cast<int>(A.rows()));
    if (split.x1_idx.empty()) throw Error("x1 is empty");
    return gaussian_conditional_entropy(A, Sigma_t, sigma, split.y_idx, split.x_idx) -
           gaussian_conditional_entropy(A, Sigma_t, sigma, split.y_idx, split.x2_idx());
}

double conditional_entropy_linear(const Mat &A_hat, const Mat &Sigma_t, double noise_bound_lambda,
                                  const SubspaceSplit &split)
{
    if (!(noise_bound_lambda > 0)) throw Error("noise bound must be positive");
    split.validate(static_cast<int>(A_hat.rows()));
    return gaussian_conditional_entropy(A_hat, Sigma_t, noise_bound_lambda / 3.0, split.y_idx, split.x_idx);
}

Mat TransferResult::matrix(int n) const
{
    Mat T = Mat::Zero(n, n);
    for (const auto &p : pairs)
        if (p.from.size() == 1 && p.to.size() == 1) T(p.from[0], p.to[0]) = p.T;
    return T;
}

const PairTransfer &TransferResult::find(int from, int to) const
{
    for (const auto &p : pairs)
        if (p.from == IndexSet{from} && p.to == IndexSet{to}) return p;
    throw Error("no transfer recorded for " + std::to_string(from) + " -> " + std::to_string(to));
}

LinearFit fit_linear(const PairedDataset &pairs, double lambda_reg, const SolverOptions &opt)
{
    Mat all(2 * pairs.pairs(), pairs.dims());
    all << pairs.inputs, pairs.targets;
    const Dictionary dict = linear_dictionary(data_box(all));
    const LiftedData ld = lift(pairs, dict, Exec::serial);
    const OperatorApprox op = robust_edmd(ld, lambda_reg, opt);
    LinearFit f;
    f.A_hat = system_matrix(op);
    const Mat R = pairs.targets - pairs.inputs * op.K;
    f.sigma_hat = std::sqrt(R.squaredNorm() / static_cast<double>(R.size()));
    return f;
}

namespace {

struct Prepared {
    PairedDataset pairs;
    LinearFit fit;
    Mat Sigma;
    double sigma = 0;
    std::string tlabel;
};

Prepared prepare(std::span<const TimeSeries> runs, const LinearTransferOptions &opt)
{
    Prepared p;
    p.pairs = consecutive_pairs(runs);
    p.fit = fit_linear(p.pairs, opt.lambda_reg, opt.solver);
    const int n = p.pairs.dims();
    if (opt.sigma_hint) {
        if (!(*opt.sigma_hint > 0)) throw Error("sigma hint must be positive");
        p.sigma = *opt.sigma_hint;
    } else {
        const double rms = std::sqrt(p.pairs.inputs.squaredNorm() / static_cast<double>(p.pairs.inputs.size()));
        p.sigma = std::max(p.fit.sigma_hat, 1e-6 * std::max(rms, 1e-300));
    }
    if (opt.steady_state) {
        p.Sigma = steady_state_covariance(p.fit.A_hat, p.sigma).Sigma;
        p.tlabel = "steady_state";
    } else {
        p.Sigma = propagate_covariance(p.fit.A_hat, Mat::Identity(n, n), p.sigma, opt.t_steps).Sigma;
        p.tlabel = std::to_string(opt.t_steps);
    }
    return p;
}

std::vector<std::string> run_labels(std::span<const TimeSeries> runs)
{
    return runs[0].labels.empty() ? default_labels(runs[0].dims()) : runs[0].labels;
}

PairTransfer split_transfer(const Prepared &p, const SubspaceSplit &split, const Mat &A_frozen)
{
    const IndexSet x1 = split.x1_idx.empty() ? split.x_idx : split.x1_idx;
    SubspaceSplit s = split;
    s.x1_idx = x1;
    PairTransfer out;
    out.from = x1;
    out.to = split.y_idx;
    out.H = gaussian_conditional_entropy(p.fit.A_hat, p.Sigma, p.sigma, split.y_idx, split.x_idx);
    out.H_frozen = gaussian_conditional_entropy(A_frozen, p.Sigma, p.sigma, split.y_idx, s.x2_idx());
    out.T = out.H - out.H_frozen;
    return out;
}

}  // namespace

TransferResult transfer_linear_datadriven(std::span<const TimeSeries> runs, const SubspaceSplit &split,
                                          const LinearTransferOptions &opt)
{
    const Prepared p = prepare(runs, opt);
    split.validate(p.pairs.dims());
    const IndexSet x1 = split.x1_idx.empty() ? split.x_idx : split.x1_idx;
    const Mat Af = fit_linear(freeze_pairs(p.pairs, x1), opt.lambda_reg, opt.solver).A_hat;
    TransferResult r;
    r.labels = run_labels(runs);
    r.t = p.tlabel;
    r.sigma = p.sigma;
    r.pairs.push_back(split_transfer(p, split, Af));
    return r;
}

TransferResult transfer_linear_datadriven(const TimeSeries &ts, const SubspaceSplit &split,
                                          const LinearTransferOptions &opt)
{
    return transfer_linear_datadriven(std::span<const TimeSeries>(&ts, 1), split, opt);
}

TransferResult transfer_matrix_datadriven(std::span<const TimeSeries> runs, const LinearTransferOptions &opt,
                                          Exec exec)
{
    const Prepared p = prepare(runs, opt);
    const int n = p.pairs.dims();
    if (n < 2) throw Error("pairwise transfer needs at least two coordinates");
    std::vector<std::vector<PairTransfer>> rows(n);
    std::string err;

    auto source_row = [&](int i) {
        const Mat Af = fit_linear(freeze_pairs(p.pairs, {i}), opt.lambda_reg, opt.solver).A_hat;
        for (int j = 0; j < n; ++j)
            if (j != i) rows[i].push_back(split_transfer(p, pair_split(i, j, n), Af));
    };

    if (exec == Exec::serial) {
        for (int i = 0; i < n; ++i) source_row(i);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
        for (int i = 0; i < n; ++i) {
            try {
                source_row(i);
            } catch (const std::exception &e) {
#pragma omp critical
                err = e.what();
            }
        }
        if (!err.empty()) throw Error(err);
    }

    TransferResult r;
    r.labels = run_labels(runs);
    r.t = p.tlabel;
    r.sigma = p.sigma;
    for (auto &row : rows) r.pairs.insert(r.pairs.end(), row.begin(), row.end());
    return r;
}

TransferResult transfer_matrix_datadriven(const TimeSeries &ts, const LinearTransferOptions &opt, Exec exec)
{
    return transfer_matrix_datadriven(std::span<const TimeSeries>(&ts, 1), opt, exec);
}

TransferResult transfer_matrix_analytic(const Mat &A, double sigma, const CovarianceState &cov, Exec exec)
{
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || cov.Sigma.rows() != n) throw Error("shape mismatch");
    std::vector<PairTransfer> out(static_cast<size_t>(n) * n);
    std::string err;
    auto one = [&](int k) {
        const int i = k / n, j = k % n;
        if (i == j) return;
        const SubspaceSplit s = pair_split(i, j, n);
        PairTransfer &pt = out[k];
        pt.from = {i};
        pt.to = {j};
        pt.H = gaussian_conditional_entropy(A, cov.Sigma, sigma, s.y_idx, s.x_idx);
        pt.H_frozen = gaussian_conditional_entropy(A, cov.Sigma, sigma, s.y_idx, s.x2_idx());
        pt.T = pt.H - pt.H_frozen;
    };
    if (exec == Exec::serial) {
        for (int k = 0; k < n * n; ++k) one(k);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
        for (int k = 0; k < n * n; ++k) {
            try {
                one(k);
            } catch (const std::exception &e) {
#pragma omp critical
                err = e.what();
            }
        }
        if (!err.empty()) throw Error(err);
    }
    TransferResult r;
    r.labels = default_labels(n);
    r.t = cov.steady ? "steady_state" : std::to_string(cov.t);
    r.sigma = sigma;
    r.mode = "analytic";
    for (int k = 0; k < n * n; ++k)
        if (k / n != k % n) r.pairs.push_back(out[k]);
    return r;
}

}  // namespace infoflow
