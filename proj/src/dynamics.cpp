#include "infoflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace infoflow {

Vec NormalStream::vector(int n)
{
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = (*this)();
    return v;
}

double NormalStream::uniform(double lo, double hi)
{
    boost::random::uniform_real_distribution<double> u(lo, hi);
    return u(eng_);
}

void LinearSystem::validate() const
{
    if (A.rows() != A.cols() || A.rows() == 0) throw Error("system matrix must be square");
    if (!A.allFinite()) throw Error("system matrix has non-finite entries");
    if (!(sigma >= 0)) throw Error("sigma must be nonnegative");
}

double MapSystem::param(const std::string &name) const
{
    auto it = params.find(name);
    if (it == params.end()) throw Error("map parameter '" + name + "' missing");
    return it->second;
}

void MapSystem::validate() const
{
    if (!(noise_gamma >= 0)) throw Error("noise gamma must be nonnegative");
    switch (kind) {
    case MapKind::henon:
        param("a");
        param("b");
        break;
    case MapKind::coupled_logistic:
        param("r");
        param("c");
        param("d");
        break;
    case MapKind::custom:
        if (!custom) throw Error("custom map needs a step function");
        break;
    }
}

Vec MapSystem::step(const Vec &z) const
{
    switch (kind) {
    case MapKind::henon: {
        Vec out(2);
        out(0) = 1.0 - param("a") * z(0) * z(0) + z(1);
        out(1) = param("b") * z(0);
        return out;
    }
    case MapKind::coupled_logistic: {
        Vec out(2);
        out(0) = param("r") * z(0) * (1.0 - z(0)) + param("c") * z(1);
        out(1) = param("d") * z(1);
        return out;
    }
    case MapKind::custom:
        return custom(z);
    }
    throw Error("unknown map kind");
}

MapSystem henon_map(double gamma, double a, double b)
{
    MapSystem s;
    s.kind = MapKind::henon;
    s.params = {{"a", a}, {"b", b}};
    s.noise_gamma = gamma;
    return s;
}

MapSystem coupled_logistic_map(double gamma)
{
    MapSystem s;
    s.kind = MapKind::coupled_logistic;
    s.params = {{"r", 2.0}, {"c", 2.0}, {"d", 0.8}};
    s.noise_gamma = gamma;
    return s;
}

namespace {

TimeSeries run_lti(const LinearSystem &sys, const Vec &z0, int steps, NormalStream &rng)
{
    const int n = static_cast<int>(sys.A.rows());
    Mat data(steps + 1, n);
    data.row(0) = z0.transpose();
    Vec z = z0;
    for (int t = 0; t < steps; ++t) {
        Vec next = sys.A * z;
        if (sys.sigma > 0) next += sys.sigma * rng.vector(n);
        data.row(t + 1) = next.transpose();
        z = next;
    }
    return make_series(std::move(data));
}

void check_lti_args(const LinearSystem &sys, const Vec &z0, int steps)
{
    sys.validate();
    if (z0.size() != sys.A.rows()) throw Error("initial state dimension does not match A");
    if (!z0.allFinite()) throw Error("initial state is not finite");
    if (steps < 1) throw Error("steps must be >= 1");
}

}  // namespace

TimeSeries simulate_lti(const LinearSystem &sys, const Vec &z0, int steps, std::uint64_t seed)
{
    check_lti_args(sys, z0, steps);
    NormalStream rng(seed);
    return run_lti(sys, z0, steps, rng);
}

TimeSeries simulate_lti(const LinearSystem &sys, double z0_scale, int steps, std::uint64_t seed)
{
    sys.validate();
    NormalStream rng(seed);
    Vec z0 = z0_scale * rng.vector(static_cast<int>(sys.A.rows()));
    check_lti_args(sys, z0, steps);
    return run_lti(sys, z0, steps, rng);
}

std::vector<TimeSeries> simulate_lti_ensemble(const LinearSystem &sys, int count, int steps,
                                              double z0_scale, std::uint64_t seed)
{
    sys.validate();
    if (count < 1) throw Error("ensemble needs at least one trajectory");
    NormalStream rng(seed);
    std::vector<TimeSeries> out;
    for (int r = 0; r < count; ++r) {
        Vec z0 = z0_scale * rng.vector(static_cast<int>(sys.A.rows()));
        check_lti_args(sys, z0, steps);
        out.push_back(run_lti(sys, z0, steps, rng));
    }
    return out;
}

namespace {

TimeSeries run_map(const MapSystem &sys, const Vec &z0, int steps, NormalStream &rng)
{
    const int n = static_cast<int>(z0.size());
    Mat data(steps + 1, n);
    data.row(0) = z0.transpose();
    Vec z = z0;
    for (int t = 0; t < steps; ++t) {
        Vec next = sys.step(z);
        if (next.size() != n) throw Error("map changed the state dimension");
        if (sys.noise_gamma > 0) next += sys.noise_gamma * rng.vector(n);
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > sys.divergence_bound)
            throw Error("trajectory diverged at step " + std::to_string(t + 1));
        data.row(t + 1) = next.transpose();
        z = next;
    }
    std::vector<std::string> labels =
        n == 2 ? std::vector<std::string>{"x", "y"} : default_labels(n);
    return make_series(std::move(data), labels);
}

}  // namespace

TimeSeries simulate_map(const MapSystem &sys, const Vec &z0, int steps, std::uint64_t seed)
{
    sys.validate();
    if (steps < 1) throw Error("steps must be >= 1");
    if (!z0.allFinite()) throw Error("initial state is not finite");
    NormalStream rng(seed);
    return run_map(sys, z0, steps, rng);
}

std::vector<TimeSeries> simulate_map_ensemble(const MapSystem &sys, const Box &init, int count,
                                              int steps, std::uint64_t seed)
{
    sys.validate();
    init.validate();
    if (count < 1 || steps < 1) throw Error("ensemble needs count >= 1 and steps >= 1");
    NormalStream rng(seed);
    std::vector<TimeSeries> out;
    for (int r = 0; r < count; ++r) {
        Vec z0(init.dims());
        for (int d = 0; d < init.dims(); ++d) z0(d) = rng.uniform(init.lo(d), init.hi(d));
        out.push_back(run_map(sys, z0, steps, rng));
    }
    return out;
}

Mat mass_spring_continuous(double M_mass, double m_mass, double k, double d)
{
    if (!(M_mass > 0 && m_mass > 0 && k > 0 && d > 0))
        throw Error("mass-spring-damper parameters must be positive");
    Mat Ac(4, 4);
    Ac << 0, 1, 0, 0,
        -2 * k / M_mass, -2 * d / M_mass, k / M_mass, d / M_mass,
        0, 0, 0, 1,
        k / m_mass, d / m_mass, -2 * k / m_mass, -2 * d / m_mass;
    return Ac;
}

LinearSystem mass_spring_damper(double M_mass, double m_mass, double k, double d, double dt)
{
    if (!(dt > 0)) throw Error("dt must be positive");
    Mat Ac = mass_spring_continuous(M_mass, m_mass, k, d);
    LinearSystem sys;
    sys.A = (Ac * dt).exp();
    return sys;
}

Mat feedback5_matrix()
{
    Mat A(5, 5);
    A << 0, 0, 0, 1, 0,
        1, 0, 0, 0, 0,
        0, 1, 0, 0, 0,
        0, 0, 1, 0, 0,
        0, 0, 0, 1, 0;
    return 0.9 * A;
}

DirectedGraph graph_from_matrix(const Mat &A, double tol)
{
    DirectedGraph g(static_cast<int>(A.rows()));
    for (int i = 0; i < A.cols(); ++i)
        for (int j = 0; j < A.rows(); ++j)
            if (std::abs(A(j, i)) > tol) g.add_edge(i, j, A(j, i));
    return g;
}

double spectral_radius(const Mat &A)
{
    if (A.size() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool has_cycle(const DirectedGraph &g)
{
    std::vector<std::vector<int>> out(g.n);
    for (const auto &e : g.edges) out[e.from].push_back(e.to);
    std::vector<int> state(g.n, 0);  // 0 new, 1 on stack, 2 done
    for (int root = 0; root < g.n; ++root) {
        if (state[root]) continue;
        std::vector<std::pair<int, size_t>> stack{{root, 0}};
        state[root] = 1;
        while (!stack.empty()) {
            auto &[v, next] = stack.back();
            if (next < out[v].size()) {
                int w = out[v][next++];
                if (state[w] == 1) return true;
                if (state[w] == 0) {
                    state[w] = 1;
                    stack.push_back({w, 0});
                }
            } else {
                state[v] = 2;
                stack.pop_back();
            }
        }
    }
    return false;
}

LinearSystem network_to_system(const DirectedGraph &g, double spectral_target, std::uint64_t seed)
{
    if (g.n < 1) throw Error("graph has no nodes");
    if (!(spectral_target > 0 && spectral_target < 1))
        throw Error("spectral target must lie in (0,1)");
    DirectedGraph sorted = g;
    sorted.sort_edges();
    NormalStream rng(seed);
    LinearSystem sys;
    sys.A = Mat::Zero(g.n, g.n);
    for (const auto &e : sorted.edges) sys.A(e.to, e.from) = rng.uniform(0.5, 1.5);
    if (sorted.edges.empty()) return sys;
    // A nonnegative matrix has positive spectral radius iff its graph has a cycle;
    // testing the graph avoids trusting eigenvalues of a nilpotent matrix.
    if (has_cycle(sorted)) {
        sys.A *= spectral_target / spectral_radius(sys.A);
    } else {
        double row = sys.A.cwiseAbs().rowwise().sum().maxCoeff();
        sys.A *= spectral_target / row;
    }
    return sys;
}

DirectedGraph watts_strogatz_directed(int n, int k_ring, double p_rewire, std::uint64_t seed)
{
    if (k_ring < 2 || k_ring % 2 != 0) throw Error("k_ring must be a positive even integer");
    if (n <= k_ring) throw Error("need n > k_ring");
    if (!(p_rewire >= 0 && p_rewire <= 1)) throw Error("p_rewire must lie in [0,1]");

    std::vector<std::set<int>> ring(n);
    for (int i = 0; i < n; ++i)
        for (int s = 1; s <= k_ring / 2; ++s) {
            ring[i].insert((i + s) % n);
            ring[i].insert((i - s + n) % n);
        }

    NormalStream rng(seed);
    boost::random::uniform_int_distribution<int> pick(0, n - 1);
    DirectedGraph g(n);
    for (int i = 0; i < n; ++i) {
        std::set<int> taken = ring[i];
        for (int j : ring[i]) {
            int target = j;
            if (rng.uniform(0.0, 1.0) < p_rewire && static_cast<int>(taken.size()) < n - 1) {
                do {
                    target = pick(rng.engine());
                } while (target == i || taken.count(target));
                taken.insert(target);
            }
            g.add_edge(i, target);
        }
    }
    g.sort_edges();
    return g;
}

}  // namespace infoflow
