#include "infoflow/operator.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace infoflow {

namespace {

void check_pairs_dict(const PairedDataset &pairs, const Dictionary &dict)
{
    pairs.validate();
    if (pairs.dims() != dict.state_dims()) throw Error("data dimension does not match dictionary");
}

}  // namespace

LiftedData lift(const PairedDataset &pairs, const Dictionary &dict, Exec exec)
{
    check_pairs_dict(pairs, dict);
    const int m = pairs.pairs(), K = dict.size();
    LiftedData ld;
    ld.pairs = m;

    if (exec == Exec::serial) {
        Mat px = evaluate_rows(dict, pairs.inputs, Exec::serial);
        Mat py = evaluate_rows(dict, pairs.targets, Exec::serial);
        ld.G = px.transpose() * px / m;
        ld.C = px.transpose() * py / m;
    } else {
        const int blocks = std::min(kReductionBlocks, m);
        std::vector<Mat> gpart(blocks), cpart(blocks);
        std::string err;
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
        for (int b = 0; b < blocks; ++b) {
            const int r0 = static_cast<int>(static_cast<long>(m) * b / blocks);
            const int r1 = static_cast<int>(static_cast<long>(m) * (b + 1) / blocks);
            try {
                Mat px = evaluate_rows(dict, pairs.inputs.middleRows(r0, r1 - r0), Exec::serial);
                Mat py = evaluate_rows(dict, pairs.targets.middleRows(r0, r1 - r0), Exec::serial);
                gpart[b] = px.transpose() * px;
                cpart[b] = px.transpose() * py;
            } catch (const std::exception &e) {
#pragma omp critical
                err = e.what();
            }
        }
        if (!err.empty()) throw Error(err);
        ld.G = Mat::Zero(K, K);
        ld.C = Mat::Zero(K, K);
        for (int b = 0; b < blocks; ++b) {
            ld.G += gpart[b];
            ld.C += cpart[b];
        }
        ld.G /= m;
        ld.C /= m;
    }
    ld.G = 0.5 * (ld.G + ld.G.transpose());
    if (!ld.G.allFinite() || !ld.C.allFinite()) throw Error("lifted data contains non-finite values");
    return ld;
}

LiftedData lift(const TimeSeries &ts, const Dictionary &dict, Exec exec)
{
    return lift(consecutive_pairs(ts), dict, exec);
}

std::string method_name(Method m)
{
    switch (m) {
    case Method::edmd:
        return "edmd";
    case Method::robust_edmd:
        return "robust_edmd";
    case Method::nsdmd:
        return "nsdmd";
    }
    return "?";
}

Method parse_method(const std::string &s)
{
    if (s == "edmd") return Method::edmd;
    if (s == "robust_edmd" || s == "robust") return Method::robust_edmd;
    if (s == "nsdmd") return Method::nsdmd;
    throw Error("unknown method '" + s + "' (edmd, robust_edmd, nsdmd)");
}

double robust_objective(const Mat &G, const Mat &C, const Mat &K, double lambda_reg)
{
    return (G * K - C).norm() + lambda_reg * K.norm();
}

OperatorApprox edmd(const LiftedData &ld)
{
    if (ld.G.rows() != ld.G.cols() || ld.C.rows() != ld.G.rows()) throw Error("lifted data shape mismatch");
    OperatorApprox op;
    op.method = Method::edmd;
    op.K = ld.G.completeOrthogonalDecomposition().solve(ld.C);
    op.residual = robust_objective(ld.G, ld.C, op.K, 0.0);
    op.objective_trace = {op.residual};
    return op;
}

namespace {

// prox of t * ||.||_F
Mat shrink(const Mat &X, double t)
{
    const double n = X.norm();
    if (n <= t) return Mat::Zero(X.rows(), X.cols());
    return X * (1.0 - t / n);
}

double top_eigenvalue(const Mat &G)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

// ADMM on  min ||R|| + lam ||W||  s.t.  R = G K - C,  W = K.
// With one penalty for both blocks the K-update matrix G^T G + I does not depend on rho.
OperatorApprox robust_edmd(const LiftedData &ld, double lambda_reg, const SolverOptions &opt)
{
    if (!(lambda_reg >= 0)) throw Error("lambda must be nonnegative");
    if (lambda_reg == 0) {
        OperatorApprox op = edmd(ld);
        op.method = Method::robust_edmd;
        return op;
    }
    const int n = static_cast<int>(ld.G.rows());
    OperatorApprox op;
    op.method = Method::robust_edmd;
    op.lambda_reg = lambda_reg;

    const double s = top_eigenvalue(ld.G);
    if (!(s > 0)) {
        op.K = Mat::Zero(n, ld.C.cols());
        op.residual = robust_objective(ld.G, ld.C, op.K, lambda_reg);
        op.objective_trace = {op.residual};
        return op;
    }
    const Mat G = ld.G / s, C = ld.C / s;
    const double lam = lambda_reg / s;

    // Exact fit K = G^{-1} C is optimal iff lam G^{-T} K / |K| lies in the unit ball; ADMM
    // converges slowly onto that kink, so test it directly.
    const Mat Kls = G.completeOrthogonalDecomposition().solve(C);
    const double fls = robust_objective(G, C, Kls, lam);
    if (Kls.norm() > 0 && (G * Kls - C).norm() <= 1e-12 * C.norm()) {
        const Eigen::LDLT<Mat> ldlt(0.5 * (G + G.transpose()));
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            const Mat Z = lam * ldlt.solve(Kls) / Kls.norm();
            if (Z.allFinite() && Z.norm() <= 1.0) {
                op.K = Kls;
                op.residual = robust_objective(ld.G, ld.C, op.K, lambda_reg);
                op.objective_trace = {op.residual};
                return op;
            }
        }
    }

    Eigen::LLT<Mat> llt(G.transpose() * G + Mat::Identity(n, n));

    Mat K = Mat::Zero(n, C.cols()), R = -C, W = K;
    Mat Y1 = Mat::Zero(n, C.cols()), Y2 = Y1;
    double rho = opt.rho;
    double best = std::numeric_limits<double>::infinity();
    Mat bestK = K;
    op.converged = false;

    int it = 0;
    for (; it < opt.max_iter; ++it) {
        K = llt.solve(G.transpose() * (C + R - Y1) + (W - Y2));
        const Mat GK = G * K;
        const Mat Rold = R, Wold = W;
        R = shrink(GK - C + Y1, 1.0 / rho);
        W = shrink(K + Y2, lam / rho);
        const Mat p1 = GK - C - R, p2 = K - W;
        Y1 += p1;
        Y2 += p2;

        const double obj = s * ((GK - C).norm() + lam * K.norm());
        if (obj < best) {
            best = obj;
            bestK = K;
        }
        op.objective_trace.push_back(best);

        const double r = std::sqrt(p1.squaredNorm() + p2.squaredNorm());
        const double d = rho * std::sqrt((G.transpose() * (R - Rold)).squaredNorm() + (W - Wold).squaredNorm());
        const double eps_pri = opt.tol * (1.0 + std::max({GK.norm(), C.norm(), K.norm()}));
        const double eps_dual = opt.tol * (1.0 + rho * std::sqrt(Y1.squaredNorm() + Y2.squaredNorm()));
        if (r < eps_pri && d < eps_dual) {
            op.converged = true;
            break;
        }
        if (it % 10 == 9) {
            if (r > 10 * d) {
                rho *= 2;
                Y1 /= 2;
                Y2 /= 2;
            } else if (d > 10 * r) {
                rho /= 2;
                Y1 *= 2;
                Y2 *= 2;
            }
        }
    }
    op.iterations = it + (op.converged ? 1 : 0);
    if (fls * s < best) {
        bestK = Kls;
        op.objective_trace.push_back(fls * s);
    }
    op.K = bestK;
    op.residual = robust_objective(ld.G, ld.C, op.K, lambda_reg);
    return op;
}

Mat pf_from_koopman(const Mat &K, const Mat &Lambda)
{
    if (Lambda.rows() != K.rows() || Lambda.cols() != K.cols()) throw Error("Gram matrix shape mismatch");
    Eigen::LLT<Mat> llt(Lambda);
    if (llt.info() != Eigen::Success) throw Error("Gram matrix is singular");
    return llt.solve(K.transpose() * Lambda);
}

RowVec propagate_density(const RowVec &w, const Mat &P)
{
    if (w.size() != P.rows()) throw Error("density length does not match operator");
    return w * P.transpose();
}

Vec propagate_observable(const Vec &v, const Mat &K)
{
    if (v.size() != K.cols()) throw Error("observable length does not match operator");
    return K * v;
}

Mat system_matrix(const OperatorApprox &op) { return op.K.transpose(); }

Mat markov_matrix(const Mat &K, const Mat &Lambda)
{
    Eigen::LLT<Mat> llt(Lambda);
    if (llt.info() != Eigen::Success) throw Error("Gram matrix is singular");
    // (Lambda K) Lambda^{-1} = (Lambda^{-1} (Lambda K)^T)^T for symmetric Lambda
    return llt.solve((Lambda * K).transpose()).transpose();
}

double Feasibility::violation() const { return std::max({0.0, -min_K, -min_M, row_sum_err}); }

Feasibility nsdmd_feasibility(const Mat &K, const Mat &Lambda)
{
    Mat M = markov_matrix(K, Lambda);
    Feasibility f;
    f.min_K = K.minCoeff();
    f.min_M = M.minCoeff();
    f.row_sum_err = (M.rowwise().sum().array() - 1.0).abs().maxCoeff();
    return f;
}

std::vector<EigenPair> spectrum(const Mat &K, int top_k)
{
    if (K.rows() != K.cols()) throw Error("spectrum needs a square matrix");
    Eigen::EigenSolver<Mat> es(K);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed");
    std::vector<EigenPair> out;
    for (int i = 0; i < K.rows(); ++i) out.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
    std::stable_sort(out.begin(), out.end(),
                     [](const EigenPair &a, const EigenPair &b) { return std::abs(a.value) > std::abs(b.value); });
    if (top_k >= 0 && top_k < static_cast<int>(out.size())) out.resize(top_k);
    return out;
}

// Michelot's active-set iteration: the threshold of the active set only grows, no sort needed.
Mat project_rows_to_simplex(const Mat &V)
{
    const int n = static_cast<int>(V.cols());
    Mat T = V.transpose();
    std::vector<double> act(n);
    for (int i = 0; i < T.cols(); ++i) {
        double *col = T.col(i).data();
        int m = n;
        std::copy(col, col + n, act.begin());
        double theta = 0;
        for (;;) {
            double sum = 0;
            for (int j = 0; j < m; ++j) sum += act[j];
            theta = (sum - 1.0) / m;
            int k = 0;
            for (int j = 0; j < m; ++j)
                if (act[j] > theta) act[k++] = act[j];
            if (k == m) break;
            m = k;
        }
        for (int j = 0; j < n; ++j) col[j] = std::max(col[j] - theta, 0.0);
    }
    return T.transpose();
}

double lambda_heuristic(double sigma_hat, double psi_bound) { return 3.0 * sigma_hat * psi_bound; }

}  // namespace infoflow
