#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace infoflow {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using IndexSet = std::vector<int>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Row t of data is the state z_t.
struct TimeSeries {
    Mat data;
    std::vector<std::string> labels;
    std::optional<double> dt;

    int steps() const { return static_cast<int>(data.rows()); }
    int dims() const { return static_cast<int>(data.cols()); }
    int label_index(const std::string &name) const;
    void validate() const;
};

std::vector<std::string> default_labels(int n, const std::string &prefix = "z");
TimeSeries make_series(Mat data, std::vector<std::string> labels = {});

struct Box {
    Vec lo, hi;

    int dims() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec &z) const;
    double volume() const;
    void validate() const;
};

// Bounding box of the rows of data, padded by pad * extent on each side.
Box data_box(const Mat &data, double pad = 0.05);

struct Edge {
    int from = 0;
    int to = 0;
    double weight = 1.0;
};

struct DirectedGraph {
    int n = 0;
    std::vector<Edge> edges;

    explicit DirectedGraph(int nodes = 0) : n(nodes) {}
    void add_edge(int from, int to, double weight = 1.0);
    bool has_edge(int from, int to) const;
    Mat adjacency() const;  // adjacency(from, to) = 1 for each edge
    void sort_edges();
};

// Sorted complement of idx in {0..n-1}.
IndexSet complement(const IndexSet &idx, int n);
IndexSet normalized(IndexSet idx, int n);
Mat select(const Mat &m, const IndexSet &rows, const IndexSet &cols);

}  // namespace infoflow
