#include "infoflow/inference.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>

namespace infoflow {

DirectedGraph it_topology(const TransferResult &tr, double threshold, int n)
{
    if (!(threshold > 0)) throw Error("threshold must be positive");
    DirectedGraph g(n);
    for (const auto &p : tr.pairs) {
        if (p.from.size() != 1 || p.to.size() != 1) continue;
        if (p.from[0] == p.to[0]) continue;
        if (std::abs(p.T) >= threshold) g.add_edge(p.from[0], p.to[0], p.T);
    }
    g.sort_edges();
    return g;
}

void GrangerConfig::validate() const
{
    if (p < 1 || q < 1 || r < 0) throw Error("Granger lags need p >= 1, q >= 1, r >= 0");
    if (!(alpha > 0 && alpha < 1)) throw Error("significance level must lie in (0, 1)");
}

namespace {

struct Design {
    Mat X;
    std::vector<std::string> names;
};

void add_lags(Design &d, const TimeSeries &ts, int coord, int lags, int t0)
{
    const int rows = ts.steps() - t0;
    const std::string label = ts.labels.empty() ? "z" + std::to_string(coord + 1) : ts.labels[coord];
    for (int l = 1; l <= lags; ++l) {
        d.X.conservativeResize(rows, d.X.cols() + 1);
        d.X.col(d.X.cols() - 1) = ts.data.col(coord).segment(t0 - l, rows);
        d.names.push_back("lag " + std::to_string(l) + " of " + label);
    }
}

double ols_rss(const Design &d, const Vec &y)
{
    Eigen::ColPivHouseholderQR<Mat> qr(d.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < d.X.cols()) {
        // columns beyond the rank in pivot order are the dependent ones
        std::string bad;
        for (Eigen::Index k = qr.rank(); k < d.X.cols(); ++k) {
            if (!bad.empty()) bad += ", ";
            bad += d.names[qr.colsPermutation().indices()(k)];
        }
        throw Error("rank-deficient Granger regression (collinear columns: " + bad + ")");
    }
    const Vec b = qr.solve(y);
    return (y - d.X * b).squaredNorm();
}

}  // namespace

GrangerResult granger(const TimeSeries &ts, const IndexSet &predictor_idx, const IndexSet &predictee_idx,
                      const GrangerConfig &cfg)
{
    cfg.validate();
    ts.validate();
    const int N = ts.dims();
    const IndexSet Y = normalized(predictor_idx, N), X = normalized(predictee_idx, N);
    if (X.size() != 1) throw Error("Granger predictee must be a single coordinate");
    if (Y.empty()) throw Error("Granger predictor is empty");
    if (std::find(Y.begin(), Y.end(), X[0]) != Y.end()) throw Error("predictor and predictee overlap");
    IndexSet used = Y;
    used.push_back(X[0]);
    const IndexSet Z = complement(normalized(used, N), N);

    if (ts.steps() <= cfg.p + cfg.q + cfg.r * static_cast<int>(Z.size()) + 5)
        throw Error("series too short for the requested Granger lags");
    const int t0 = std::max({cfg.p, cfg.q, cfg.r});
    const int rows = ts.steps() - t0;
    const Vec target = ts.data.col(X[0]).segment(t0, rows);
    if ((target.array() - target.mean()).abs().maxCoeff() == 0)
        throw Error("degenerate variance: predictee series is constant");

    Design d{Mat::Ones(rows, 1), {"constant"}};
    add_lags(d, ts, X[0], cfg.p, t0);
    for (int z : Z) add_lags(d, ts, z, cfg.r, t0);
    const double rss_r = ols_rss(d, target);
    for (int y : Y) add_lags(d, ts, y, cfg.q, t0);
    const double rss_f = ols_rss(d, target);

    const int df1 = cfg.q * static_cast<int>(Y.size());
    const int df2 = rows - static_cast<int>(d.X.cols());
    if (df2 < 1) throw Error("series too short for the requested Granger lags");
    if (!(rss_f > 0) || !(rss_r > 0)) throw Error("degenerate variance: regression fits exactly");

    GrangerResult g;
    g.G = std::log(rss_r / rss_f);
    g.F = std::max(0.0, ((rss_r - rss_f) / df1) / (rss_f / df2));
    boost::math::fisher_f dist(df1, df2);
    g.p_value = boost::math::cdf(boost::math::complement(dist, g.F));
    g.significant = g.p_value < cfg.alpha;
    return g;
}

DirectedGraph granger_topology(const TimeSeries &ts, const GrangerConfig &cfg, Exec exec)
{
    const int n = ts.dims();
    std::vector<GrangerResult> res(static_cast<size_t>(n) * n);
    std::string err;
    auto one = [&](int k) {
        const int i = k / n, j = k % n;
        if (i != j) res[k] = granger(ts, {i}, {j}, cfg);
    };
    if (exec == Exec::serial) {
        for (int k = 0; k < n * n; ++k) one(k);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
        for (int k = 0; k < n * n; ++k) {
            try {
                one(k);
            } catch (const std::exception &e) {
#pragma omp critical
                err = e.what();
            }
        }
        if (!err.empty()) throw Error(err);
    }
    DirectedGraph g(n);
    for (int k = 0; k < n * n; ++k)
        if (k / n != k % n && res[k].significant) g.add_edge(k / n, k % n, res[k].G);
    return g;
}

DirectedGraph dmd_threshold_topology(const Mat &A_hat, double threshold)
{
    if (A_hat.rows() != A_hat.cols()) throw Error("system matrix is not square");
    const int n = static_cast<int>(A_hat.rows());
    DirectedGraph g(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i != j && std::abs(A_hat(i, j)) >= threshold) g.add_edge(j, i, A_hat(i, j));
    g.sort_edges();
    return g;
}

TopologyScore topology_error(const DirectedGraph &estimated, const DirectedGraph &truth)
{
    if (estimated.n != truth.n) throw Error("graphs have different node counts");
    TopologyScore s;
    int true_count = 0;
    for (const auto &e : truth.edges) {
        if (e.from == e.to) continue;
        ++true_count;
        if (estimated.has_edge(e.from, e.to))
            ++s.true_positive;
        else
            ++s.false_negative;
    }
    for (const auto &e : estimated.edges)
        if (e.from != e.to && !truth.has_edge(e.from, e.to)) ++s.false_positive;
    s.percent_error = 100.0 * (s.false_positive + s.false_negative) / std::max(1, true_count);
    return s;
}

}  // namespace infoflow
