#include "doctest.h"

#include <random>

#include "infoflow/dynamics.hpp"
#include "infoflow/inference.hpp"
#include "infoflow/it_linear.hpp"
#include "infoflow/it_nonlinear.hpp"
#include "infoflow/parallel.hpp"

using namespace infoflow;

namespace {

struct ThreadCap {
    int saved = max_threads();
    explicit ThreadCap(int n) { set_max_threads(n); }
    ~ThreadCap() { set_max_threads(saved); }
};

Mat uniform_points(int rows, int cols, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat X(rows, cols);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = u(eng);
    return X;
}

void check_same_transfers(const TransferResult &a, const TransferResult &b)
{
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t k = 0; k < a.pairs.size(); ++k) {
        CHECK(a.pairs[k].from == b.pairs[k].from);
        CHECK(a.pairs[k].to == b.pairs[k].to);
        CHECK(a.pairs[k].T == b.pairs[k].T);
    }
}

}  // namespace

TEST_SUITE("parallel")
{
    TEST_CASE("thread cap")
    {
        ThreadCap cap(3);
        CHECK(max_threads() == 3);
        set_max_threads(0);
        CHECK(max_threads() == 1);
    }

    TEST_CASE("dictionary evaluation")
    {
        const Box dom{Vec::Constant(2, -1), Vec::Constant(2, 1)};
        const Dictionary d = rbf_dictionary(grid_centers(dom, 25), 0.3, dom);
        const Mat X = uniform_points(3000, 2, 1);
        const Mat ser = evaluate_rows(d, X, Exec::serial);
        for (int n : {1, 4}) {
            ThreadCap cap(n);
            CHECK(evaluate_rows(d, X, Exec::parallel) == ser);
        }
    }

    TEST_CASE("lift")
    {
        const Box dom{Vec::Constant(2, -1), Vec::Constant(2, 1)};
        const Dictionary d = rbf_dictionary(grid_centers(dom, 16), 0.4, dom);
        PairedDataset p;
        p.inputs = uniform_points(5000, 2, 2);
        p.targets = uniform_points(5000, 2, 3);
        const LiftedData ser = lift(p, d, Exec::serial);
        LiftedData one, four;
        {
            ThreadCap cap(1);
            one = lift(p, d, Exec::parallel);
        }
        {
            ThreadCap cap(4);
            four = lift(p, d, Exec::parallel);
        }
        // blocked sums are fixed, so the thread count cannot change a bit
        CHECK(one.G == four.G);
        CHECK(one.C == four.C);
        CHECK((one.G - ser.G).norm() <= 1e-12 * ser.G.norm());
        CHECK((one.C - ser.C).norm() <= 1e-12 * ser.C.norm());
    }

    TEST_CASE("linear transfer matrices")
    {
        const Mat A = feedback5_matrix();
        const TimeSeries ts = simulate_lti({A, 2.1}, 3.0, 400, 9);
        const TransferResult ser = transfer_matrix_datadriven(ts, {}, Exec::serial);
        for (int n : {1, 4}) {
            ThreadCap cap(n);
            check_same_transfers(transfer_matrix_datadriven(ts, {}, Exec::parallel), ser);
        }

        const CovarianceState cov = steady_state_covariance(A, 2.1);
        const TransferResult aser = transfer_matrix_analytic(A, 2.1, cov, Exec::serial);
        ThreadCap cap(4);
        check_same_transfers(transfer_matrix_analytic(A, 2.1, cov, Exec::parallel), aser);
    }

    TEST_CASE("joint probability")
    {
        const Box dom{Vec::Zero(1), Vec::Ones(1)};
        const Partition part = build_partition(dom, {5});
        const Dictionary d = rbf_dictionary(grid_centers(dom, 100), 0.005, dom);
        const Mat Th = cell_integrals(d, part);
        const Mat L = gram(d);
        std::mt19937_64 eng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Mat M(100, 100);
        for (int i = 0; i < M.size(); ++i) M.data()[i] = u(eng);
        M = M.array().colwise() / M.rowwise().sum().array();
        const DensityCoefficients w = stationary_coefficients(M, total_integrals(d));
        for (JointMode mode : {JointMode::responsibility, JointMode::concentrated}) {
            const JointDistribution ser = joint_probability(w, M, Th, mode, {&d, &part, &L}, Exec::serial);
            ThreadCap cap(4);
            const JointDistribution par = joint_probability(w, M, Th, mode, {&d, &part, &L}, Exec::parallel);
            CHECK(par.Gamma == ser.Gamma);
            CHECK(par.raw_mass == ser.raw_mass);
        }
    }

    TEST_CASE("granger topology")
    {
        const TimeSeries ts = simulate_lti({feedback5_matrix(), 2.1}, 10.0, 500, 4);
        const DirectedGraph ser = granger_topology(ts, GrangerConfig{}, Exec::serial);
        ThreadCap cap(4);
        const DirectedGraph par = granger_topology(ts, GrangerConfig{}, Exec::parallel);
        CHECK(par.adjacency() == ser.adjacency());
    }
}
