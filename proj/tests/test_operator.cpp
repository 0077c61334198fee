#include "doctest.h"

#include <cmath>
#include <random>

#include "infoflow/dynamics.hpp"
#include "infoflow/operator.hpp"
#include "oracles.hpp"

using namespace infoflow;

namespace {

Box unit_box(int n, double lo = -1, double hi = 1)
{
    return Box{Vec::Constant(n, lo), Vec::Constant(n, hi)};
}

LiftedData random_lifted(int n, int m, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat X(m, n), Y(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            X(i, j) = nd(eng);
            Y(i, j) = 0.5 * X(i, j) + nd(eng);
        }
    return LiftedData{X.transpose() * X / m, X.transpose() * Y / m, m};
}

bool non_increasing(const std::vector<double> &v, double tol)
{
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + tol) return false;
    return true;
}

// Pairs (x, 2x mod 1) with x uniform on [0,1).
PairedDataset doubling_pairs(int m, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PairedDataset p;
    p.inputs.resize(m, 1);
    p.targets.resize(m, 1);
    for (int i = 0; i < m; ++i) {
        const double x = u(eng);
        p.inputs(i, 0) = x;
        p.targets(i, 0) = std::fmod(2 * x, 1.0);
    }
    return p;
}

}  // namespace

TEST_SUITE("operator")
{
    TEST_CASE("lift of simple series")
    {
        Mat data(4, 2);
        data << 2, -1, 2, -1, 2, -1, 2, -1;
        const Dictionary lin = linear_dictionary(unit_box(2, -5, 5));
        const LiftedData c = lift(make_series(data), lin);
        Vec v(2);
        v << 2, -1;
        CHECK((c.G - v * v.transpose()).norm() < 1e-14);
        CHECK((c.C - v * v.transpose()).norm() < 1e-14);

        Mat two(2, 2);
        two << 1, 2, 3, 4;
        const LiftedData p = lift(make_series(two), lin);
        CHECK(p.pairs == 1);
        CHECK((p.G - two.row(0).transpose() * two.row(0)).norm() < 1e-14);
        CHECK((p.C - two.row(0).transpose() * two.row(1)).norm() < 1e-14);
    }

    TEST_CASE("noise-free lti: C = G A^T and exact recovery")
    {
        const Mat A = feedback5_matrix();
        const TimeSeries ts = simulate_lti({A, 0.0}, 5.0, 30, 2);
        Mat Ar = A + 0.05 * Mat::Identity(5, 5);
        const TimeSeries rich = simulate_lti({Ar, 0.0}, 5.0, 30, 2);
        const Dictionary lin = linear_dictionary(data_box(ts.data));
        const LiftedData ld = lift(ts, lin);
        CHECK((ld.C - ld.G * A.transpose()).norm() <= 1e-12 * ld.C.norm());

        const Dictionary lin2 = linear_dictionary(data_box(rich.data));
        const OperatorApprox op = robust_edmd(lift(rich, lin2), 0.0);
        CHECK((system_matrix(op) - Ar).cwiseAbs().maxCoeff() < 1e-8);

        // Koopman action on the coordinate observables
        for (int t = 0; t < 5; ++t) {
            const Vec z = rich.data.row(t).transpose();
            const RowVec psi = evaluate(lin2, z);
            for (int i = 0; i < 5; ++i) {
                const Vec v = propagate_observable(Vec::Unit(5, i), op.K);
                CHECK(std::abs(psi.dot(v) - (Ar * z)(i)) < 1e-8 * (1 + z.norm()));
            }
        }
    }

    TEST_CASE("robust_edmd trivial cases")
    {
        const Mat I = Mat::Identity(3, 3);
        CHECK((robust_edmd({I, I, 1}, 0.0).K - I).norm() < 1e-12);
        for (double lam : {0.0, 0.1, 2.0}) CHECK(robust_edmd({I, Mat::Zero(3, 3), 1}, lam).K.norm() < 1e-8);
        CHECK_THROWS_AS(robust_edmd({I, I, 1}, -1.0), Error);
    }

    TEST_CASE("robust_edmd matches the ridge-path oracle")
    {
        const LiftedData ld = random_lifted(6, 40, 3);
        for (double lam : {0.01, 0.1, 0.3}) {
            const OperatorApprox op = robust_edmd(ld, lam);
            const auto ref = oracle::robust_path_search(ld.G, ld.C, lam);
            CHECK(op.residual <= ref.objective * (1 + 1e-6));
            CHECK(std::abs(op.residual - ref.objective) <= 1e-6 * ref.objective);
            CHECK(non_increasing(op.objective_trace, 1e-12));
        }
    }

    TEST_CASE("regularization shrinks K")
    {
        const LiftedData ld = random_lifted(5, 30, 4);
        double prev = robust_edmd(ld, 0.0).K.norm();
        for (double lam : {0.01, 0.05, 0.2, 0.5}) {
            const double nk = robust_edmd(ld, lam).K.norm();
            CHECK(nk <= prev * (1 + 1e-8));
            prev = nk;
        }
    }

    TEST_CASE("lambda = 0 with invertible G")
    {
        const LiftedData ld = random_lifted(5, 50, 5);
        const Mat ref = ld.G.inverse() * ld.C;
        CHECK((robust_edmd(ld, 0.0).K - ref).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((edmd(ld).K - ref).cwiseAbs().maxCoeff() < 1e-8);
    }

    TEST_CASE("nsdmd on identity-map data")
    {
        const Partition part = build_partition(unit_box(1, 0, 1), {4});
        const Dictionary ind = indicator_dictionary(part);
        PairedDataset p = doubling_pairs(400, 1);
        p.targets = p.inputs;
        const OperatorApprox op = nsdmd(lift(p, ind), gram(ind), 0.0);
        CHECK((op.K - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(op.residual < 1e-6);
        CHECK(op.feasibility <= 1e-8);
    }

    TEST_CASE("nsdmd matches Ulam counting")
    {
        const Partition part = build_partition(unit_box(1, 0, 1), {4});
        const Dictionary ind = indicator_dictionary(part);
        const PairedDataset p = doubling_pairs(4000, 2);
        Mat counts = Mat::Zero(4, 4);
        for (int i = 0; i < p.pairs(); ++i)
            counts(part.cell_of(p.inputs.row(i).transpose()), part.cell_of(p.targets.row(i).transpose())) += 1;
        const Mat ulam = counts.array().colwise() / counts.rowwise().sum().array();

        const Mat L = gram(ind);
        const OperatorApprox op = nsdmd(lift(p, ind), L, 0.0);
        CHECK(op.feasibility <= 1e-8);
        // column j of P is the distribution of the next cell given cell j
        CHECK((op.P.transpose() - ulam).cwiseAbs().maxCoeff() < 0.05);
        CHECK((op.P - pf_from_koopman(op.K, L)).norm() < 1e-12);
    }

    TEST_CASE("nsdmd on an rbf dictionary")
    {
        const TimeSeries ts = simulate_map(henon_map(0.01), Vec::Constant(2, 0.1), 1000, 19);
        Mat all(2 * (ts.steps() - 1), 2);
        all << ts.data.topRows(ts.steps() - 1), ts.data.bottomRows(ts.steps() - 1);
        const Box dom = data_box(all);
        const Dictionary d = build_dictionary(parse_dict_spec("rbf:36:0.1:grid"), ts.data, dom);
        const Mat L = gram(d);
        SolverOptions opt;
        opt.nsdmd_max_iter = 1000;
        const OperatorApprox op = nsdmd(lift(ts, d), L, 0.01, opt);

        const Feasibility f = nsdmd_feasibility(op.K, L);
        CHECK(f.min_K >= -1e-8);
        CHECK(f.min_M >= -1e-8);
        CHECK(f.row_sum_err <= 1e-8);
        CHECK(op.feasibility <= 1e-8);
        CHECK(non_increasing(op.objective_trace, 1e-12));
        CHECK(std::abs(op.objective_trace.back() - op.residual) <= 1e-9 * op.residual);
        // the constrained problem cannot beat the unconstrained one
        CHECK(op.residual >= robust_edmd(lift(ts, d), 0.01).residual * (1 - 1e-6));

        const Mat M = markov_matrix(op.K, L);
        const auto sp = spectrum(M, 1);
        CHECK(std::abs(sp[0].value - 1.0) < 1e-6);

        std::mt19937_64 eng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        RowVec w(36);
        for (int i = 0; i < 36; ++i) w(i) = u(eng);
        w /= w.sum();
        const RowVec w1 = propagate_density(w, op.P);
        CHECK(std::abs(w1.sum() - 1) < 1e-8);
        CHECK(w1.minCoeff() >= -1e-8);

        // round trip through an ill-conditioned Gram matrix: error bounded by cond(L) * eps
        Eigen::SelfAdjointEigenSolver<Mat> es(L, Eigen::EigenvaluesOnly);
        const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
        CHECK((pf_from_koopman(pf_from_koopman(op.K, L), L) - op.K).cwiseAbs().maxCoeff() <=
              std::max(1e-12, 10 * cond * 2.2e-16) * op.K.cwiseAbs().maxCoeff());
    }

    TEST_CASE("nsdmd reaches the conic-solver optimum")
    {
        const TimeSeries ts = simulate_map(henon_map(0.01), Vec::Constant(2, 0.1), 1000, 19);
        Mat all(2 * (ts.steps() - 1), 2);
        all << ts.data.topRows(ts.steps() - 1), ts.data.bottomRows(ts.steps() - 1);
        const Dictionary d = build_dictionary(parse_dict_spec("rbf:36:0.1:grid"), ts.data, data_box(all));
        SolverOptions opt;
        opt.nsdmd_max_iter = 20000;
        const OperatorApprox op = nsdmd(lift(ts, d), gram(d), 0.01, opt);
        // same problem solved by an interior-point conic solver with K, M >= 0 and Lambda K = M Lambda
        const double f_star = 8.314815;
        CHECK(op.residual >= f_star * (1 - 1e-5));
        CHECK(op.residual <= f_star * (1 + 1e-3));
        CHECK(op.feasibility <= 1e-8);
    }

    TEST_CASE("nsdmd on an ill-conditioned dictionary stays feasible")
    {
        // wide kernels: Lambda^{-1} 1 changes sign, so no strictly positive feasible K exists
        const TimeSeries ts = simulate_map(henon_map(0.01), Vec::Constant(2, 0.1), 1000, 19);
        Mat all(2 * (ts.steps() - 1), 2);
        all << ts.data.topRows(ts.steps() - 1), ts.data.bottomRows(ts.steps() - 1);
        const Dictionary d = build_dictionary(parse_dict_spec("rbf:30:0.3"), ts.data, data_box(all));
        const Mat L = gram(d);
        CHECK(L.llt().solve(Vec::Ones(30)).minCoeff() < 0);
        SolverOptions opt;
        opt.nsdmd_max_iter = 500;
        const LiftedData ld = lift(ts, d);
        const OperatorApprox op = nsdmd(ld, L, 0.01, opt);
        CHECK(op.feasibility <= opt.tol_feas);
        CHECK(op.residual <= robust_objective(ld.G, ld.C, Mat::Identity(30, 30), 0.01) * (1 + 1e-12));
    }

    TEST_CASE("duality and trivial operators")
    {
        const Mat I = Mat::Identity(3, 3);
        CHECK((pf_from_koopman(I, 2 * I) - I).norm() < 1e-14);
        Mat K(3, 3);
        K << 0.2, 0.5, 0.3, 0.1, 0.1, 0.8, 0.6, 0.2, 0.2;
        CHECK((pf_from_koopman(K, I) - K.transpose()).norm() < 1e-14);
        Mat L(3, 3);
        L << 2, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1;
        CHECK((pf_from_koopman(pf_from_koopman(K, L), L) - K).cwiseAbs().maxCoeff() < 1e-12);

        CHECK(propagate_density(RowVec::Zero(3), K).isZero(0));
        const RowVec w = RowVec::LinSpaced(3, 1, 3);
        CHECK(propagate_density(w, I) == w);
        CHECK(propagate_observable(Vec::Zero(3), K).isZero(0));
        CHECK(propagate_observable(Vec::Ones(3), 2 * I) == Vec::Constant(3, 2));
    }

    TEST_CASE("spectrum ordering")
    {
        Mat D = Mat::Zero(2, 2);
        D(0, 0) = 0.5;
        D(1, 1) = 1.0;
        const auto sp = spectrum(D, 2);
        CHECK(sp[0].value.real() == doctest::Approx(1.0));
        CHECK(sp[1].value.real() == doctest::Approx(0.5));
        CHECK(std::abs(std::abs(sp[0].vector(1)) - 1) < 1e-12);
        CHECK(std::abs(sp[0].vector(0)) < 1e-12);
        CHECK(spectrum(D, 1).size() == 1);
    }

    TEST_CASE("row simplex projection")
    {
        std::mt19937_64 eng(6);
        std::normal_distribution<double> nd(0.0, 1.0);
        Mat V(20, 6);
        for (int i = 0; i < V.rows(); ++i)
            for (int j = 0; j < V.cols(); ++j) V(i, j) = nd(eng);
        const Mat P = project_rows_to_simplex(V);
        CHECK(P.minCoeff() >= 0);
        CHECK((P.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-12);
        // no feasible point is closer
        std::gamma_distribution<double> g(1.0, 1.0);
        for (int i = 0; i < V.rows(); ++i)
            for (int t = 0; t < 200; ++t) {
                RowVec q(6);
                for (int j = 0; j < 6; ++j) q(j) = g(eng);
                q /= q.sum();
                CHECK((V.row(i) - P.row(i)).norm() <= (V.row(i) - q).norm() + 1e-12);
            }
        Mat S(1, 3);
        S << 0.2, 0.3, 0.5;
        CHECK((project_rows_to_simplex(S) - S).norm() < 1e-15);
    }

    TEST_CASE("method names")
    {
        for (Method m : {Method::edmd, Method::robust_edmd, Method::nsdmd}) CHECK(parse_method(method_name(m)) == m);
        CHECK_THROWS_AS(parse_method("sparse"), Error);
        CHECK(lambda_heuristic(0.1) == doctest::Approx(0.3));
    }
}
