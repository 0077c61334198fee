#include <benchmark/benchmark.h>

#include <random>

#include "infoflow/dynamics.hpp"
#include "infoflow/it_linear.hpp"
#include "infoflow/it_nonlinear.hpp"

using namespace infoflow;

namespace {

Exec exec_of(const benchmark::State &st) { return st.range(0) ? Exec::parallel : Exec::serial; }

const Box &unit_box()
{
    static const Box b{Vec::Zero(2), Vec::Ones(2)};
    return b;
}

void BM_lift(benchmark::State &st)
{
    const Dictionary d = rbf_dictionary(grid_centers(unit_box(), 100), 0.1, unit_box());
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PairedDataset p;
    p.inputs.resize(20000, 2);
    p.targets.resize(20000, 2);
    for (int i = 0; i < p.inputs.size(); ++i) {
        p.inputs.data()[i] = u(eng);
        p.targets.data()[i] = u(eng);
    }
    for (auto _ : st) benchmark::DoNotOptimize(lift(p, d, exec_of(st)));
}

void BM_transfer_matrix(benchmark::State &st)
{
    Mat A = Mat::Zero(10, 10);
    for (int i = 0; i < 10; ++i) {
        A(i, i) = 0.5;
        A((i + 1) % 10, i) = 0.3;
    }
    const TimeSeries ts = simulate_lti({A, 1.0}, 1.0, 2000, 1);
    for (auto _ : st) benchmark::DoNotOptimize(transfer_matrix_datadriven(ts, {}, exec_of(st)));
}

void BM_joint_probability(benchmark::State &st)
{
    const Partition part = build_partition(unit_box(), {8, 8});
    const Dictionary d = rbf_dictionary(grid_centers(unit_box(), 144), 0.05, unit_box());
    const Mat Th = cell_integrals(d, part);
    std::mt19937_64 eng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Mat M(144, 144);
    for (int i = 0; i < M.size(); ++i) M.data()[i] = u(eng);
    M = M.array().colwise() / M.rowwise().sum().array();
    const DensityCoefficients w = stationary_coefficients(M, total_integrals(d));
    for (auto _ : st)
        benchmark::DoNotOptimize(joint_probability(w, M, Th, JointMode::responsibility, {}, exec_of(st)));
}

}  // namespace

// argument 0 is the serial reference, 1 the OpenMP path
BENCHMARK(BM_lift)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transfer_matrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_joint_probability)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
