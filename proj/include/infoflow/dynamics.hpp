#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "infoflow/types.hpp"

namespace infoflow {

// Seeded standard-normal stream: mt19937_64 engine with Boost's ziggurat
// normal sampler, both of which are specified bit-for-bit.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
    double operator()() { return dist_(eng_); }
    Vec vector(int n);
    double uniform(double lo, double hi);
    std::mt19937_64 &engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    boost::random::normal_distribution<double> dist_;
};

struct LinearSystem {
    Mat A;
    double sigma = 0.0;

    void validate() const;
};

enum class MapKind { henon, coupled_logistic, custom };

struct MapSystem {
    MapKind kind = MapKind::henon;
    std::map<std::string, double> params;
    double noise_gamma = 0.0;
    double divergence_bound = 1e6;
    int dims = 2;
    std::function<Vec(const Vec &)> custom;  // MapKind::custom only

    double param(const std::string &name) const;
    void validate() const;
    Vec step(const Vec &z) const;
};

MapSystem henon_map(double gamma, double a = 1.4, double b = 0.3);
MapSystem coupled_logistic_map(double gamma = 0.0);

TimeSeries simulate_lti(const LinearSystem &sys, const Vec &z0, int steps, std::uint64_t seed);
// Initial state drawn as z0_scale * N(0, I) from the head of the seeded stream.
TimeSeries simulate_lti(const LinearSystem &sys, double z0_scale, int steps, std::uint64_t seed);
// Independent short trajectories sharing one seeded stream.
std::vector<TimeSeries> simulate_lti_ensemble(const LinearSystem &sys, int count, int steps,
                                              double z0_scale, std::uint64_t seed);

TimeSeries simulate_map(const MapSystem &sys, const Vec &z0, int steps, std::uint64_t seed);
// Trajectories started uniformly inside init.
std::vector<TimeSeries> simulate_map_ensemble(const MapSystem &sys, const Box &init, int count,
                                              int steps, std::uint64_t seed);

LinearSystem mass_spring_damper(double M_mass, double m_mass, double k, double d, double dt);
Mat mass_spring_continuous(double M_mass, double m_mass, double k, double d);

// Five-node loop z1->z2->z3->z4->z1 with the extra branch z4->z5.
Mat feedback5_matrix();
DirectedGraph graph_from_matrix(const Mat &A, double tol = 0.0);

LinearSystem network_to_system(const DirectedGraph &g, double spectral_target, std::uint64_t seed);
DirectedGraph watts_strogatz_directed(int n, int k_ring, double p_rewire, std::uint64_t seed);

double spectral_radius(const Mat &A);
bool has_cycle(const DirectedGraph &g);

}  // namespace infoflow
