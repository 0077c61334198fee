#include "doctest.h"

#include <cmath>
#include <random>

#include "infoflow/dynamics.hpp"
#include "infoflow/inference.hpp"

using namespace infoflow;

namespace {

TransferResult transfers_from(const Mat &T)
{
    TransferResult tr;
    const int n = static_cast<int>(T.rows());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) tr.pairs.push_back({{i}, {j}, T(i, j), 0, 0});
    return tr;
}

// x_t = a x_{t-1} + c y_{t-1} + e, y white noise
TimeSeries driven_pair(double a, double c, int steps, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat d(steps, 2);
    d.row(0) << nd(eng), nd(eng);
    for (int t = 1; t < steps; ++t) d.row(t) << a * d(t - 1, 0) + c * d(t - 1, 1) + nd(eng), nd(eng);
    return make_series(d, {"x", "y"});
}

}  // namespace

TEST_SUITE("inference")
{
    TEST_CASE("it_topology from table-like transfers")
    {
        Mat T = Mat::Constant(5, 5, 1e-4);
        T(0, 1) = 0.45;
        T(1, 2) = 0.34;
        T(2, 3) = 0.34;
        T(3, 4) = 0.31;
        T(3, 0) = 0.35;
        const DirectedGraph g = it_topology(transfers_from(T), 0.01, 5);
        CHECK(topology_error(g, graph_from_matrix(feedback5_matrix())).percent_error == 0);
        CHECK(it_topology(transfers_from(Mat::Zero(5, 5)), 0.01, 5).edges.empty());
        CHECK(it_topology(transfers_from(T), 0.5, 5).edges.empty());
        CHECK_THROWS_AS(it_topology(transfers_from(T), 0.0, 5), Error);

        // negative transfers count by magnitude
        T(2, 0) = -0.2;
        CHECK(it_topology(transfers_from(T), 0.01, 5).has_edge(2, 0));
    }

    TEST_CASE("it_topology is monotone in the threshold")
    {
        std::mt19937_64 eng(1);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        Mat T(6, 6);
        for (int i = 0; i < 36; ++i) T.data()[i] = u(eng);
        const TransferResult tr = transfers_from(T);
        DirectedGraph prev = it_topology(tr, 1e-6, 6);
        for (double th = 0.01; th < 0.6; th += 0.01) {
            const DirectedGraph g = it_topology(tr, th, 6);
            for (const auto &e : g.edges) CHECK(prev.has_edge(e.from, e.to));
            prev = g;
        }
    }

    TEST_CASE("granger on a driven pair")
    {
        const TimeSeries ts = driven_pair(0.0, 0.9, 5000, 2);
        const GrangerResult r = granger(ts, {1}, {0}, GrangerConfig{});
        CHECK(r.significant);
        // population variance ratio (0.81 + 1) / 1
        CHECK(r.G == doctest::Approx(std::log(1.81)).epsilon(0.05));
        CHECK_FALSE(granger(ts, {0}, {1}, GrangerConfig{}).significant);
    }

    TEST_CASE("granger false-positive rate")
    {
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const GrangerResult r = granger(driven_pair(0.5, 0.0, 300, seed), {1}, {0}, GrangerConfig{});
            CHECK(r.G >= -1e-10);
            hits += r.significant;
        }
        // 5% nominal; 20 is more than four standard deviations above the mean of 10
        CHECK(hits <= 20);
    }

    TEST_CASE("granger topology")
    {
        Mat d = Mat::Zero(200, 3);
        std::mt19937_64 eng(4);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int i = 0; i < d.size(); ++i) d.data()[i] = nd(eng);
        CHECK(granger_topology(make_series(d), GrangerConfig{}).edges.size() <= 1);

        const TimeSeries chain = simulate_lti({feedback5_matrix(), 2.1}, 1000.0, 10, 1);
        const GrangerConfig cfg{2, 2, 0, 0.05};
        const DirectedGraph g = granger_topology(chain, cfg);
        const DirectedGraph truth = graph_from_matrix(feedback5_matrix());
        CHECK(topology_error(g, truth).false_negative == 0);
        CHECK(g.has_edge(0, 2));

        CHECK_THROWS_WITH_AS(granger_topology(make_series(Mat::Constant(30, 2, 1.0)), GrangerConfig{}),
                             doctest::Contains("degenerate"), Error);
        CHECK_THROWS_AS(GrangerConfig({0, 1, 1, 0.05}).validate(), Error);
        CHECK_THROWS_AS(granger(chain, {0}, {1}, GrangerConfig{5, 5, 5, 0.05}), Error);
    }

    TEST_CASE("dmd thresholding")
    {
        CHECK(dmd_threshold_topology(Mat::Zero(4, 4)).edges.empty());
        const Mat A = feedback5_matrix();
        const DirectedGraph truth = graph_from_matrix(A);
        for (double th : {1e-6, 0.01, 0.5, 0.89})
            CHECK(topology_error(dmd_threshold_topology(A, th), truth).percent_error == 0);
        Mat B = A;
        B(0, 1) = 0.02;
        const DirectedGraph g = dmd_threshold_topology(B, 0.01);
        CHECK(g.has_edge(1, 0));
        CHECK(topology_error(g, truth).false_positive == 1);
    }

    TEST_CASE("topology error")
    {
        DirectedGraph truth(4);
        truth.add_edge(0, 1);
        truth.add_edge(1, 2);
        truth.add_edge(2, 3);
        truth.add_edge(3, 0);
        CHECK(topology_error(truth, truth).percent_error == 0);

        DirectedGraph est(4);
        est.add_edge(0, 1);
        est.add_edge(1, 2);
        est.add_edge(1, 0);
        est.add_edge(2, 0);
        const TopologyScore s = topology_error(est, truth);
        CHECK(s.true_positive == 2);
        CHECK(s.false_negative == 2);
        CHECK(s.false_positive == 2);
        CHECK(s.percent_error == doctest::Approx(100.0));

        DirectedGraph miss1add2 = truth;
        miss1add2.edges.pop_back();
        miss1add2.add_edge(0, 2);
        miss1add2.add_edge(2, 1);
        CHECK(topology_error(miss1add2, truth).percent_error == doctest::Approx(75.0));
        CHECK(topology_error(DirectedGraph(4), truth).percent_error == doctest::Approx(100.0));
        CHECK_THROWS_AS(topology_error(DirectedGraph(3), truth), Error);
    }
}
