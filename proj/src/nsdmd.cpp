#include <cmath>
#include <limits>
#include <vector>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

#include "infoflow/operator.hpp"

namespace infoflow {

namespace {

// Gaussian dictionaries produce subnormal entries whose arithmetic is very slow;
// flush them to zero for the duration of the solve.
class FlushDenormals {
public:
#if defined(__SSE__)
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

struct Basis {
    Mat Q;   // Lambda = Q diag(d) Q^T
    Vec d;
    Mat Lam;
    Mat Li;  // Lambda^{-1}
};

Basis gram_basis(const Mat &Lambda)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Lambda + Lambda.transpose()));
    if (es.info() != Eigen::Success) throw Error("eigendecomposition of the Gram matrix failed");
    Basis b;
    b.Q = es.eigenvectors();
    b.d = es.eigenvalues();
    if (!(b.d.minCoeff() > 0)) throw Error("Gram matrix is not positive definite");
    b.Lam = 0.5 * (Lambda + Lambda.transpose());
    b.Li = b.Q * b.d.cwiseInverse().asDiagonal() * b.Q.transpose();
    return b;
}

// Solves (G^T G + I) K + Lam^2 K Li^2 = rhs through the eigendecomposition of Li (G^T G + I) Li.
struct KSolver {
    Mat L1;
    Mat den;
    const Basis *b = nullptr;

    KSolver(const Mat &G, const Basis &basis) : b(&basis)
    {
        const int n = static_cast<int>(G.rows());
        const Mat H = basis.Li * (G.transpose() * G + Mat::Identity(n, n)) * basis.Li;
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
        if (es.info() != Eigen::Success) throw Error("eigendecomposition in the nsdmd solver failed");
        L1 = basis.Li * es.eigenvectors();
        den.resize(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) den(i, j) = es.eigenvalues()(i) + 1.0 / (basis.d(j) * basis.d(j));
    }

    Mat solve(const Mat &rhs) const
    {
        Mat Z = (L1.transpose() * rhs * b->Q).cwiseQuotient(den);
        return L1 * Z * b->Q.transpose();
    }
};

Mat shrink_norm(const Mat &X, double t)
{
    const double nx = X.norm();
    return nx <= t ? Mat::Zero(X.rows(), X.cols()) : Mat((1 - t / nx) * X);
}

// Convex blend toward K0 = u (Lam 1/n)^T, u = Lam^{-1} 1, whose Markov matrix is uniform. Exactly
// feasible whenever K already has row-stochastic Markov coordinates and K0 > 0.
Mat blend_feasible(const Mat &K, const Basis &b)
{
    const int n = static_cast<int>(K.rows());
    const double deficit = std::max(0.0, -K.minCoeff());
    if (deficit == 0) return K;
    const Vec u = b.Li * Vec::Ones(n);
    const Vec lv = b.Lam * Vec::Constant(n, 1.0 / n);
    const Mat K0 = u * lv.transpose();
    const double m0 = K0.minCoeff();
    if (!(m0 > 0)) return K;
    const double t = deficit / (deficit + m0);
    return (1 - t) * K + t * K0;
}

// Alternating projections, then the blend.
Mat restore(Mat K, const Basis &b, double tol, int max_iter)
{
    const int n = static_cast<int>(K.rows());
    Mat M(n, n), P(n, n);
    for (int it = 0; it < max_iter; ++it) {
        const bool nonneg = K.minCoeff() > -tol / 10;
        if (!nonneg) K = K.cwiseMax(0.0);
        M.noalias() = b.Lam * K * b.Li;
        P = project_rows_to_simplex(M);
        if (nonneg && (M - P).cwiseAbs().maxCoeff() < tol / 10) break;
        K.noalias() = b.Li * P * b.Lam;
    }
    return blend_feasible(K, b);
}

bool feasible(const Mat &K, const Basis &b, double tol)
{
    return K.allFinite() && nsdmd_feasibility(K, b.Lam).violation() <= tol;
}

struct AdmmResult {
    Mat K;        // last iterate, row-stochastic in the Markov coordinates, may be slightly negative
    Mat best;     // best feasible blend seen so far, empty if none was
    double best_obj = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;  // incumbent objective, every 10 iterations
};

// min |G K - C| + lam |K|  s.t.  K >= 0,  Lam K Lam^{-1} row-stochastic.
// Splitting R = G K - C, U = K, V = Lam K Lam^{-1}; the K-update is independent of rho.
AdmmResult admm(const Mat &G, const Mat &C, const Basis &b, double lam, double rho, double tol, double tol_feas,
                int max_iter)
{
    const int n = static_cast<int>(G.rows());
    const double alpha = 1.6;
    const KSolver ks(G, b);
    const Mat Gt = G.transpose();

    Mat K = Mat::Identity(n, n);
    Mat U = K, V = K, R = G - C;
    Mat Y1 = Mat::Zero(n, n), Y3 = Y1, Y4 = Y1;
    Mat GK(n, n), M(n, n), Rold, Uold, Vold;
    AdmmResult out;
    for (int it = 0; it < max_iter; ++it) {
        const bool check = it % 10 == 9;
        if (check) {
            Rold = R;
            Uold = U;
            Vold = V;
        }
        K = ks.solve(Gt * (C + R - Y1) + (U - Y3) + b.Lam * (V - Y4) * b.Li);
        GK.noalias() = G * K;
        M.noalias() = b.Lam * K * b.Li;
        const Mat Ah = alpha * GK + (1 - alpha) * (R + C);
        const Mat Kh = alpha * K + (1 - alpha) * U;
        const Mat Mh = alpha * M + (1 - alpha) * V;
        R = shrink_norm(Ah - C + Y1, 1.0 / rho);
        U = (Kh + Y3).cwiseMax(0.0);
        if (lam > 0) U = shrink_norm(U, lam / rho);
        V = project_rows_to_simplex(Mh + Y4);
        Y1 += Ah - C - R;
        Y3 += Kh - U;
        Y4 += Mh - V;
        out.iterations = it + 1;
        if (!check) continue;

        const Mat Kf = blend_feasible(b.Li * V * b.Lam, b);
        const double f = (G * Kf - C).norm() + lam * Kf.norm();
        if (f < out.best_obj && feasible(Kf, b, tol_feas)) {
            out.best_obj = f;
            out.best = Kf;
        }
        if (out.best.size()) out.trace.push_back(out.best_obj);
        const double r = std::sqrt((GK - C - R).squaredNorm() + (K - U).squaredNorm() + (M - V).squaredNorm());
        const double s = rho * (Gt * (R - Rold) + (U - Uold) + b.Lam * (V - Vold) * b.Li).norm();
        const double scale_pri = std::max(std::sqrt(GK.squaredNorm() + K.squaredNorm() + M.squaredNorm()),
                                          std::sqrt((R + C).squaredNorm() + U.squaredNorm() + V.squaredNorm()));
        const double scale_dual = rho * (Gt * Y1 + Y3 + b.Lam * Y4 * b.Li).norm();
        if (r < tol * (1 + scale_pri) && s < tol * (1 + scale_dual)) {
            out.converged = true;
            break;
        }
        if (r > 10 * s || s > 10 * r) {
            const double f = r > 10 * s ? 2.0 : 0.5;
            rho *= f;
            Y1 /= f;
            Y3 /= f;
            Y4 /= f;
        }
    }
    out.K = b.Li * V * b.Lam;
    return out;
}

}  // namespace

OperatorApprox nsdmd(const LiftedData &ld, const Mat &Lambda, double lambda_reg, const SolverOptions &opt)
{
    if (!(lambda_reg >= 0)) throw Error("lambda must be nonnegative");
    const FlushDenormals ftz;
    const int n = static_cast<int>(ld.G.rows());
    if (ld.G.cols() != n || ld.C.rows() != n || ld.C.cols() != n) throw Error("lifted data shape mismatch");
    if (Lambda.rows() != n || Lambda.cols() != n) throw Error("Gram matrix shape mismatch");
    const Basis b = gram_basis(Lambda);

    double s = Eigen::SelfAdjointEigenSolver<Mat>(ld.G, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
    if (!(s > 0)) s = 1.0;
    const Mat G = ld.G / s, C = ld.C / s;
    const double lam = lambda_reg / s;

    OperatorApprox op;
    op.method = Method::nsdmd;
    op.lambda_reg = lambda_reg;
    op.Lambda = b.Lam;

    AdmmResult res = admm(G, C, b, lam, opt.rho, opt.nsdmd_tol, opt.tol_feas, opt.nsdmd_max_iter);
    op.iterations = res.iterations;
    // K = I is always feasible; it is the fallback when neither the restored iterate nor the
    // incumbent is (a Gram matrix whose inverse row sums change sign leaves no interior to blend into)
    Mat Kf = Mat::Identity(n, n);
    double best = robust_objective(G, C, Kf, lam);
    const Mat Kr = restore(res.K, b, opt.tol_feas, opt.restore_iter);
    const double fr = robust_objective(G, C, Kr, lam);
    if (fr < best && feasible(Kr, b, opt.tol_feas)) {
        Kf = Kr;
        best = fr;
    }
    if (res.best.size() && res.best_obj < best) {
        Kf = res.best;
        best = res.best_obj;
    }
    op.objective_trace = std::move(res.trace);
    op.objective_trace.push_back(best);
    for (double &f : op.objective_trace) f *= s;
    op.K = Kf;
    op.residual = robust_objective(ld.G, ld.C, Kf, lambda_reg);
    op.feasibility = nsdmd_feasibility(op.K, b.Lam).violation();
    op.converged = res.converged && op.feasibility <= opt.tol_feas;
    op.P = pf_from_koopman(op.K, b.Lam);
    return op;
}

}  // namespace infoflow
