#include "doctest.h"

#include <vector>

#include "infoflow/dynamics.hpp"
#include "infoflow/freeze.hpp"
#include "infoflow/operator.hpp"

using namespace infoflow;

TEST_SUITE("freeze")
{
    TEST_CASE("hand example")
    {
        Mat data(3, 2);
        data << 1, 2, 3, 4, 5, 6;
        const PairedDataset p = freeze_dataset(make_series(data), {0});
        REQUIRE(p.pairs() == 2);
        Mat in(2, 2), out(2, 2);
        in << 1, 2, 3, 4;
        out << 1, 4, 3, 6;
        CHECK(p.inputs == in);
        CHECK(p.targets == out);
        CHECK(p.frozen_idx == IndexSet{0});
    }

    TEST_CASE("rejected freeze sets")
    {
        Mat data(3, 2);
        data << 1, 2, 3, 4, 5, 6;
        CHECK_THROWS_AS(freeze_dataset(make_series(data), {0, 1}), Error);
        CHECK_THROWS_AS(freeze_dataset(make_series(data), {}), Error);
        CHECK_THROWS_AS(freeze_dataset(make_series(data), {2}), Error);
    }

    TEST_CASE("constant series")
    {
        const Mat data = Mat::Constant(5, 3, 1.5);
        const PairedDataset p = freeze_dataset(make_series(data), {1});
        CHECK(p.inputs == p.targets);
    }

    TEST_CASE("structural invariants on random data")
    {
        const TimeSeries ts = simulate_lti({feedback5_matrix(), 1.0}, 1.0, 60, 4);
        for (const IndexSet &s : std::vector<IndexSet>{{0}, {2, 4}, {0, 1, 3}}) {
            const PairedDataset p = freeze_dataset(ts, s);
            REQUIRE(p.pairs() == ts.steps() - 1);
            const IndexSet rest = complement(s, 5);
            for (int t = 0; t < p.pairs(); ++t) {
                CHECK(p.inputs.row(t) == ts.data.row(t));
                for (int c : s) CHECK(p.targets(t, c) == p.inputs(t, c));
                for (int c : rest) CHECK(p.targets(t, c) == ts.data(t + 1, c));
            }
        }
    }

    TEST_CASE("ensemble pairs stay inside each run")
    {
        const auto runs = simulate_lti_ensemble({feedback5_matrix(), 1.0}, 3, 4, 1.0, 2);
        const PairedDataset p = freeze_dataset(std::span<const TimeSeries>(runs), {1});
        REQUIRE(p.pairs() == 12);
        for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 4; ++t) {
                CHECK(p.inputs.row(4 * r + t) == runs[r].data.row(t));
                CHECK(p.targets(4 * r + t, 0) == runs[r].data(t + 1, 0));
            }
    }

    TEST_CASE("frozen fit of noise-free lti")
    {
        Mat A = feedback5_matrix() + 0.05 * Mat::Identity(5, 5);
        const TimeSeries ts = simulate_lti({A, 0.0}, 5.0, 40, 8);
        const IndexSet s{1, 3};
        const PairedDataset p = freeze_dataset(ts, s);
        const Dictionary lin = linear_dictionary(data_box(ts.data));
        const Mat Af = system_matrix(edmd(lift(p, lin)));
        for (int i = 0; i < 5; ++i) {
            const bool frozen = i == 1 || i == 3;
            for (int j = 0; j < 5; ++j) {
                const double expect = frozen ? (i == j ? 1.0 : 0.0) : A(i, j);
                CHECK(std::abs(Af(i, j) - expect) < 1e-6);
            }
        }
    }

    TEST_CASE("validate catches moved frozen coordinates")
    {
        Mat data(3, 2);
        data << 1, 2, 3, 4, 5, 6;
        PairedDataset p = freeze_dataset(make_series(data), {0});
        p.targets(1, 0) = 9;
        CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("pair 1"), Error);
    }
}
