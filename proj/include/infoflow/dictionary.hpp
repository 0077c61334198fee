#pragma once

#include <optional>
#include <string>

#include "infoflow/parallel.hpp"
#include "infoflow/types.hpp"

namespace infoflow {

// Uniform axis-aligned grid. Cells are numbered row-major, last coordinate fastest.
struct Partition {
    Box domain;
    std::vector<int> resolution;

    int dims() const { return static_cast<int>(resolution.size()); }
    int cells() const;
    double width(int d) const { return (domain.hi(d) - domain.lo(d)) / resolution[d]; }
    double edge(int d, int i) const;
    double cell_volume() const;
    std::vector<int> multi_index(int cell) const;
    int flat_index(const std::vector<int> &mi) const;
    Box cell_box(int cell) const;
    Vec cell_center(int cell) const;
    // -1 when z lies outside the domain; the upper face belongs to the last cell.
    int cell_of(const Vec &z) const;
    // Index of the cell's projection onto the coordinates in idx, numbered the same way.
    int projected_index(int cell, const IndexSet &idx) const;
    int projected_cells(const IndexSet &idx) const;
};

Partition build_partition(const Box &domain, std::vector<int> resolution);
// 16 per axis, reduced so that the cell count stays <= 4096.
std::vector<int> default_resolution(int dims);

enum class DictKind { linear, gaussian_rbf, indicator };

struct Dictionary {
    DictKind kind = DictKind::linear;
    Box domain;
    Mat centers;           // K x N, gaussian_rbf
    double sigma_rbf = 0;  // gaussian_rbf
    Vec norm;              // density normalization constants, gaussian_rbf
    std::optional<Partition> partition;  // indicator

    int size() const;
    int state_dims() const { return domain.dims(); }
    std::string describe() const;
};

Dictionary linear_dictionary(const Box &domain);
Dictionary rbf_dictionary(const Mat &centers, double sigma, const Box &domain);
Dictionary indicator_dictionary(const Partition &part);

RowVec evaluate(const Dictionary &dict, const Vec &z);
// Row m holds Psi(data.row(m)).
Mat evaluate_rows(const Dictionary &dict, const Mat &data, Exec exec = Exec::parallel);

struct GramInfo {
    double jitter = 0;
    double min_eig = 0;
    double max_eig = 0;
};

Mat gram(const Dictionary &dict, GramInfo *info = nullptr);
Mat cell_integrals(const Dictionary &dict, const Partition &part);
Vec total_integrals(const Dictionary &dict);

// k-means++ seeding followed by Lloyd iterations; deterministic under seed.
Mat kmeans_centers(const Mat &data, int k, std::uint64_t seed, int max_iter = 300);
Mat grid_centers(const Box &box, int k);

// Declarative dictionary description, e.g. "rbf:200:0.01" or
// {"kind":"gaussian_rbf","count":200,"sigma":0.01,"centers":"kmeans","seed":7}.
struct DictSpec {
    DictKind kind = DictKind::linear;
    int count = 0;
    double sigma = 0;
    std::string centers = "kmeans";
    std::uint64_t seed = 7;
    std::vector<int> resolution;  // indicator
};

DictSpec parse_dict_spec(const std::string &text);
Dictionary build_dictionary(const DictSpec &spec, const Mat &data, const Box &domain);

}  // namespace infoflow
