#include <algorithm>
#include <limits>

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "infoflow/dictionary.hpp"
#include "infoflow/dynamics.hpp"

namespace infoflow {

Mat kmeans_centers(const Mat &data, int k, std::uint64_t seed, int max_iter)
{
    const int m = static_cast<int>(data.rows());
    if (k < 1) throw Error("k-means needs k >= 1");
    if (m < k) throw Error("k-means needs at least k data points");

    NormalStream rng(seed);
    Mat c(k, data.cols());
    std::vector<double> d2(m, std::numeric_limits<double>::infinity());

    boost::random::uniform_int_distribution<int> first(0, m - 1);
    c.row(0) = data.row(first(rng.engine()));
    for (int j = 1; j < k; ++j) {
        double total = 0;
        for (int t = 0; t < m; ++t) {
            d2[t] = std::min(d2[t], (data.row(t) - c.row(j - 1)).squaredNorm());
            total += d2[t];
        }
        if (!(total > 0))
            throw Error("k-means: data has fewer than " + std::to_string(k) + " distinct points");
        boost::random::discrete_distribution<int, double> pick(d2.begin(), d2.end());
        c.row(j) = data.row(pick(rng.engine()));
    }

    std::vector<int> assign(m, -1);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (int t = 0; t < m; ++t) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                double d = (data.row(t) - c.row(j)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = j;
                }
            }
            if (assign[t] != best) {
                assign[t] = best;
                changed = true;
            }
        }
        if (!changed) break;

        Mat sum = Mat::Zero(k, data.cols());
        std::vector<int> count(k, 0);
        for (int t = 0; t < m; ++t) {
            sum.row(assign[t]) += data.row(t);
            ++count[assign[t]];
        }
        for (int j = 0; j < k; ++j) {
            if (count[j] > 0) {
                c.row(j) = sum.row(j) / count[j];
                continue;
            }
            // empty cluster: move it to the point worst served by its center
            int far = 0;
            double fd = -1;
            for (int t = 0; t < m; ++t) {
                double d = (data.row(t) - c.row(assign[t])).squaredNorm();
                if (d > fd) {
                    fd = d;
                    far = t;
                }
            }
            c.row(j) = data.row(far);
            assign[far] = j;
        }
    }
    return c;
}

}  // namespace infoflow
