#include "infoflow/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace infoflow {

int TimeSeries::label_index(const std::string &name) const
{
    auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) {
        std::string all;
        for (const auto &l : labels) all += (all.empty() ? "" : ", ") + l;
        throw Error("unknown label '" + name + "' (labels: " + all + ")");
    }
    return static_cast<int>(it - labels.begin());
}

void TimeSeries::validate() const
{
    if (data.rows() < 2) throw Error("time series needs at least 2 rows");
    if (static_cast<Eigen::Index>(labels.size()) != data.cols())
        throw Error("label count does not match column count");
    if (!data.allFinite()) throw Error("time series contains non-finite values");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw Error("labels must be unique");
    if (dt && !(*dt > 0)) throw Error("dt must be positive");
}

std::vector<std::string> default_labels(int n, const std::string &prefix)
{
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

TimeSeries make_series(Mat data, std::vector<std::string> labels)
{
    TimeSeries ts;
    if (labels.empty()) labels = default_labels(static_cast<int>(data.cols()));
    ts.data = std::move(data);
    ts.labels = std::move(labels);
    return ts;
}

bool Box::contains(const Vec &z) const
{
    for (int d = 0; d < dims(); ++d)
        if (z(d) < lo(d) || z(d) > hi(d)) return false;
    return true;
}

double Box::volume() const { return (hi - lo).prod(); }

void Box::validate() const
{
    if (lo.size() != hi.size() || lo.size() == 0) throw Error("box dimension mismatch");
    for (int d = 0; d < dims(); ++d) {
        if (!std::isfinite(lo(d)) || !std::isfinite(hi(d)) || !(lo(d) < hi(d)))
            throw Error("degenerate box along coordinate " + std::to_string(d));
    }
}

Box data_box(const Mat &data, double pad)
{
    Box b;
    b.lo = data.colwise().minCoeff().transpose();
    b.hi = data.colwise().maxCoeff().transpose();
    Vec ext = b.hi - b.lo;
    for (int d = 0; d < ext.size(); ++d) {
        // flat coordinates still need a cell of positive width
        if (ext(d) <= 0) ext(d) = std::max(1.0, std::abs(b.lo(d)));
    }
    b.lo -= pad * ext;
    b.hi += pad * ext;
    return b;
}

void DirectedGraph::add_edge(int from, int to, double weight)
{
    if (from < 0 || from >= n || to < 0 || to >= n) throw Error("edge endpoint out of range");
    if (has_edge(from, to)) throw Error("duplicate edge");
    edges.push_back({from, to, weight});
}

bool DirectedGraph::has_edge(int from, int to) const
{
    return std::any_of(edges.begin(), edges.end(),
                       [&](const Edge &e) { return e.from == from && e.to == to; });
}

Mat DirectedGraph::adjacency() const
{
    Mat a = Mat::Zero(n, n);
    for (const auto &e : edges) a(e.from, e.to) = 1.0;
    return a;
}

void DirectedGraph::sort_edges()
{
    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
}

IndexSet complement(const IndexSet &idx, int n)
{
    std::vector<bool> in(n, false);
    for (int i : idx) in.at(i) = true;
    IndexSet out;
    for (int i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

IndexSet normalized(IndexSet idx, int n)
{
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (int i : idx)
        if (i < 0 || i >= n) throw Error("index " + std::to_string(i) + " out of range");
    return idx;
}

Mat select(const Mat &m, const IndexSet &rows, const IndexSet &cols)
{
    Mat out(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

}  // namespace infoflow
