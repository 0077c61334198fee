#include "doctest.h"

#include <cmath>
#include <random>

#include "infoflow/dynamics.hpp"
#include "infoflow/inference.hpp"
#include "infoflow/it_nonlinear.hpp"

using namespace infoflow;

namespace {

Box square(double lo, double hi, int n = 2)
{
    return Box{Vec::Constant(n, lo), Vec::Constant(n, hi)};
}

}  // namespace

TEST_SUITE("it_nonlinear")
{
    TEST_CASE("stationary density")
    {
        const DensityCoefficients id = stationary_coefficients(Mat::Identity(3, 3), Vec::Ones(3));
        CHECK(id.kind == DensityCoefficients::Kind::uniform);
        CHECK((id.w - RowVec::Constant(3, 1.0 / 3)).norm() < 1e-14);

        // two-cell chain on an indicator dictionary: M is the transition matrix itself
        const Partition part = build_partition(square(0, 1, 1), {2});
        const Dictionary ind = indicator_dictionary(part);
        const Mat L = gram(ind);
        Mat P(2, 2);
        P << 0.9, 0.1, 0.5, 0.5;
        const Mat K = L.inverse() * P * L;
        const Mat M = markov_matrix(K, L);
        const DensityCoefficients w = stationary_coefficients(M, total_integrals(ind));
        const RowVec prob = w.w * cell_integrals(ind, part);
        CHECK(prob(0) == doctest::Approx(5.0 / 6).epsilon(1e-10));
        CHECK(prob(1) == doctest::Approx(1.0 / 6).epsilon(1e-10));
        CHECK((propagate_density(w.w, pf_from_koopman(K, L)) - w.w).cwiseAbs().maxCoeff() < 1e-8);

        // periodic chain still has an invariant density
        Mat flip(2, 2);
        flip << 0, 1, 1, 0;
        const DensityCoefficients f = stationary_coefficients(flip, Vec::Ones(2));
        CHECK((f.w - RowVec::Constant(2, 0.5)).norm() < 1e-10);
    }

    TEST_CASE("cell-concentrated coefficients")
    {
        const Partition part = build_partition(square(0, 1), {3, 3});
        const Dictionary ind = indicator_dictionary(part);
        const Mat Th = cell_integrals(ind, part);
        for (int i = 0; i < part.cells(); ++i) {
            const DensityCoefficients w = cell_concentrated_coefficients(i, ind, part, gram(ind), Th);
            const RowVec mass = w.w * Th;
            CHECK(mass(i) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(mass.sum() - 1) <= 0.05);
            CHECK(w.w.cwiseAbs().maxCoeff() == doctest::Approx(w.w(i)));
        }

        // a fine 1-D rbf dictionary approximates each half-interval indicator
        const Box line = square(0, 1, 1);
        const Partition halves = build_partition(line, {2});
        const Dictionary fine = rbf_dictionary(grid_centers(line, 100), 0.005, line);
        const Mat Lf = gram(fine);
        const Mat Tf = cell_integrals(fine, halves);
        for (int i = 0; i < 2; ++i) {
            const DensityCoefficients w = cell_concentrated_coefficients(i, fine, halves, Lf, Tf);
            const RowVec mass = w.w * Tf;
            CHECK(mass(i) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(std::abs(mass(1 - i)) < 0.01);
        }

        const Box dom = square(0, 1);
        const Dictionary wide = rbf_dictionary(grid_centers(dom, 4), 0.5, dom);
        const Partition small = build_partition(dom, {8, 8});
        CHECK_THROWS_WITH_AS(cell_concentrated_coefficients(3, wide, small, gram(wide), cell_integrals(wide, small)),
                             doctest::Contains("finer dictionary"), Error);
    }

    TEST_CASE("joint probability with no motion")
    {
        const Partition part = build_partition(square(0, 1), {2, 3});
        const Dictionary ind = indicator_dictionary(part);
        const Mat Th = cell_integrals(ind, part);
        DensityCoefficients w;
        w.w = RowVec::LinSpaced(6, 1, 6);
        w.w /= w.w.sum();
        for (JointMode mode : {JointMode::responsibility, JointMode::concentrated}) {
            const Mat L = gram(ind);
            const JointDistribution J = joint_probability(w, Mat::Identity(6, 6), Th, mode, {&ind, &part, &L});
            CHECK((J.Gamma - Mat((w.w * Th).asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    TEST_CASE("marginalization")
    {
        const Partition part = build_partition(square(0, 1), {2, 2});
        const Mat U = Mat::Constant(4, 4, 1.0 / 16);
        CHECK((marginalize_subspace(U, {0, 1}, part) - U).norm() < 1e-15);
        const Mat Q = marginalize_subspace(U, {1}, part);
        CHECK((Q - Mat::Constant(2, 2, 0.25)).norm() < 1e-15);

        std::mt19937_64 eng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const Partition p3 = build_partition(square(0, 1, 3), {3, 2, 2});
        Mat G(12, 12);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j) G(i, j) = u(eng);
        G /= G.sum();
        for (const IndexSet &y : std::vector<IndexSet>{{0}, {1}, {0, 2}}) {
            const Mat Qy = marginalize_subspace(G, y, p3);
            CHECK(std::abs(Qy.sum() - 1) < 1e-9);
            CHECK(Qy.rows() == p3.projected_cells(y));
        }
        // y-projection by hand for coordinate 0
        const Mat Q0 = marginalize_subspace(G, {0}, p3);
        double q12 = 0;
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                if (p3.multi_index(i)[0] == 1 && p3.multi_index(j)[0] == 2) q12 += G(i, j);
        CHECK(Q0(1, 2) == doctest::Approx(q12));
    }

    TEST_CASE("discrete entropy")
    {
        CHECK(discrete_entropy(Mat::Constant(1, 8, 0.125)) == doctest::Approx(std::log(8.0)));
        Mat point = Mat::Zero(3, 3);
        point(1, 2) = 1;
        CHECK(discrete_entropy(point) == 0);
        const Mat q = (Mat(1, 3) << 0.5, 0.25, 0.25).finished();
        CHECK(discrete_entropy(q) == doctest::Approx(1.5 * std::log(2.0)));
        CHECK(discrete_entropy(q) == doctest::Approx(1.0397).epsilon(1e-4));
        CHECK_THROWS_AS(discrete_entropy((Mat(1, 2) << 1.1, -0.1).finished()), Error);

        std::mt19937_64 eng(2);
        std::exponential_distribution<double> e(1.0);
        for (int t = 0; t < 50; ++t) {
            Mat Q(5, 5);
            for (int i = 0; i < 25; ++i) Q.data()[i] = t % 2 ? std::pow(e(eng), 6) : e(eng);
            Q /= Q.sum();
            const double h = discrete_entropy(Q);
            CHECK(h >= 0);
            CHECK(h <= std::log(25.0) + 1e-12);
        }
    }

    TEST_CASE("identity-map data gives a diagonal joint")
    {
        std::mt19937_64 eng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        PairedDataset p;
        p.inputs.resize(2000, 2);
        for (int i = 0; i < 2000; ++i) p.inputs.row(i) << u(eng), u(eng);
        p.targets = p.inputs;
        const Partition part = build_partition(square(0, 1), {4, 4});
        const Dictionary ind = indicator_dictionary(part);
        const Mat L = gram(ind);
        const OperatorApprox op = nsdmd(lift(p, ind), L, 0.0);
        const Mat M = markov_matrix(op.K, L);
        const DensityCoefficients w = stationary_coefficients(M, total_integrals(ind));
        const Mat Gm = joint_probability(w, M, cell_integrals(ind, part)).Gamma;
        CHECK(Gm.sum() - Gm.trace() < 0.02);
    }

    TEST_CASE("joint is a distribution with consistent marginals")
    {
        const TimeSeries ts = simulate_map(henon_map(0.01), Vec::Constant(2, 0.1), 1000, 19);
        NonlinearOptions opt;
        opt.dict = parse_dict_spec("rbf:36:0.1:grid");
        opt.resolution = {6, 6};
        opt.solver.nsdmd_max_iter = 500;
        const NonlinearTransfer nt = transfer_nonlinear(ts, {0}, {1}, opt);
        const Mat Th = cell_integrals(nt.dict, nt.part);
        CHECK(nt.Gamma.minCoeff() >= 0);
        CHECK(std::abs(nt.Gamma.sum() - 1) < 1e-6);
        CHECK(std::abs(nt.w.w.dot(total_integrals(nt.dict).transpose()) - 1) < 1e-8);

        const Mat M = markov_matrix(nt.full.K, gram(nt.dict));
        const JointDistribution raw = joint_probability(nt.w, M, Th);
        CHECK(std::abs(raw.raw_mass - 1) < 1e-6);
        const RowVec p = nt.w.w * Th;
        CHECK((nt.Gamma.rowwise().sum().transpose() - p).cwiseAbs().maxCoeff() < 1e-6);

        const double H = discrete_entropy(marginalize_subspace(nt.Gamma, {1}, nt.part));
        CHECK(H == doctest::Approx(nt.result.pairs[0].H));
        CHECK(nt.result.pairs[0].T == nt.result.pairs[0].H - nt.result.pairs[0].H_frozen);
        CHECK(H <= std::log(36.0));
    }

    TEST_CASE("indicator dictionary reproduces the Ulam chain")
    {
        Mat A(2, 2);
        A << 0.6, 0.3, -0.2, 0.5;
        const TimeSeries ts = simulate_lti({A, 1.0}, Vec::Zero(2), 10000, 7);
        const PairedDataset pairs = consecutive_pairs(ts);
        const Partition part = build_partition(data_box(ts.data), {6, 6});
        const Dictionary ind = indicator_dictionary(part);
        const Mat L = gram(ind);
        const OperatorApprox op = nsdmd(lift(pairs, ind), L, 0.0);
        const Mat M = markov_matrix(op.K, L);
        const DensityCoefficients w = stationary_coefficients(M, total_integrals(ind));
        const Mat Gm = joint_probability(w, M, cell_integrals(ind, part)).Gamma;
        const Mat ref = count_joint(pairs, part);
        CHECK(0.5 * (Gm - ref).cwiseAbs().sum() < 0.05);
    }

    TEST_CASE("decoupled nonlinear system has no transfer")
    {
        MapSystem sys;
        sys.kind = MapKind::custom;
        sys.noise_gamma = 0.1;
        sys.custom = [](const Vec &z) {
            Vec n(2);
            n << 0.5 * std::sin(z(0)), 0.5 * std::cos(z(1));
            return n;
        };
        const TimeSeries ts = simulate_map(sys, Vec::Zero(2), 2000, 3);
        NonlinearOptions opt;
        opt.dict = parse_dict_spec("rbf:36:0.1:grid");
        opt.resolution = {6, 6};
        opt.solver.nsdmd_max_iter = 500;
        const NonlinearTransferSet set =
            transfer_nonlinear(std::span<const TimeSeries>(&ts, 1), {{{0}, {1}}, {{1}, {0}}}, opt);
        for (const auto &p : set.result.pairs) CHECK(std::abs(p.T) < kDefaultTransferThreshold);
    }

    TEST_CASE("request validation")
    {
        const TimeSeries ts = simulate_map(henon_map(0.01), Vec::Constant(2, 0.1), 50, 19);
        NonlinearOptions opt;
        opt.dict = parse_dict_spec("rbf:4:0.5:grid");
        CHECK_THROWS_AS(transfer_nonlinear(ts, {0}, {0}, opt), Error);
        CHECK_THROWS_AS(transfer_nonlinear(ts, {}, {1}, opt), Error);
        CHECK_THROWS_AS(transfer_nonlinear(ts, {0}, {2}, opt), Error);
    }
}
