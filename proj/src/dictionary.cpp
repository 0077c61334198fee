#include "infoflow/dictionary.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <omp.h>

namespace infoflow {

int Partition::cells() const
{
    int c = 1;
    for (int r : resolution) c *= r;
    return c;
}

double Partition::edge(int d, int i) const
{
    if (i == resolution[d]) return domain.hi(d);
    return domain.lo(d) + i * width(d);
}

double Partition::cell_volume() const
{
    double v = 1;
    for (int d = 0; d < dims(); ++d) v *= width(d);
    return v;
}

std::vector<int> Partition::multi_index(int cell) const
{
    std::vector<int> mi(dims());
    for (int d = dims() - 1; d >= 0; --d) {
        mi[d] = cell % resolution[d];
        cell /= resolution[d];
    }
    return mi;
}

int Partition::flat_index(const std::vector<int> &mi) const
{
    int c = 0;
    for (int d = 0; d < dims(); ++d) c = c * resolution[d] + mi[d];
    return c;
}

Box Partition::cell_box(int cell) const
{
    auto mi = multi_index(cell);
    Box b;
    b.lo.resize(dims());
    b.hi.resize(dims());
    for (int d = 0; d < dims(); ++d) {
        b.lo(d) = edge(d, mi[d]);
        b.hi(d) = edge(d, mi[d] + 1);
    }
    return b;
}

Vec Partition::cell_center(int cell) const
{
    Box b = cell_box(cell);
    return 0.5 * (b.lo + b.hi);
}

int Partition::cell_of(const Vec &z) const
{
    if (z.size() != dims()) throw Error("point dimension does not match partition");
    std::vector<int> mi(dims());
    for (int d = 0; d < dims(); ++d) {
        if (!(z(d) >= domain.lo(d) && z(d) <= domain.hi(d))) return -1;
        int i = static_cast<int>(std::floor((z(d) - domain.lo(d)) / width(d)));
        mi[d] = std::min(std::max(i, 0), resolution[d] - 1);
    }
    return flat_index(mi);
}

int Partition::projected_index(int cell, const IndexSet &idx) const
{
    auto mi = multi_index(cell);
    int c = 0;
    for (int d : idx) c = c * resolution[d] + mi[d];
    return c;
}

int Partition::projected_cells(const IndexSet &idx) const
{
    int c = 1;
    for (int d : idx) c *= resolution[d];
    return c;
}

Partition build_partition(const Box &domain, std::vector<int> resolution)
{
    domain.validate();
    if (static_cast<int>(resolution.size()) != domain.dims())
        throw Error("partition resolution must give one count per coordinate");
    for (int r : resolution)
        if (r < 1) throw Error("partition resolution must be >= 1 per axis");
    return Partition{domain, std::move(resolution)};
}

std::vector<int> default_resolution(int dims)
{
    int r = 16;
    while (r > 1 && std::pow(static_cast<double>(r), dims) > 4096.0) --r;
    return std::vector<int>(dims, r);
}

int Dictionary::size() const
{
    switch (kind) {
    case DictKind::linear:
        return domain.dims();
    case DictKind::gaussian_rbf:
        return static_cast<int>(centers.rows());
    case DictKind::indicator:
        return partition->cells();
    }
    return 0;
}

std::string Dictionary::describe() const
{
    std::ostringstream os;
    switch (kind) {
    case DictKind::linear:
        os << "linear:" << domain.dims();
        break;
    case DictKind::gaussian_rbf:
        os << "rbf:" << centers.rows() << ":" << sigma_rbf;
        break;
    case DictKind::indicator:
        os << "indicator:";
        for (int d = 0; d < partition->dims(); ++d)
            os << (d ? "x" : "") << partition->resolution[d];
        break;
    }
    return os.str();
}

namespace {

// integral of exp(-(t-mu)^2 / (2 s^2)) over [a,b]
double gauss_mass(double a, double b, double mu, double s)
{
    const double r = s * std::numbers::sqrt2;
    return s * std::sqrt(std::numbers::pi / 2.0) * (std::erf((b - mu) / r) - std::erf((a - mu) / r));
}

}  // namespace

Dictionary linear_dictionary(const Box &domain)
{
    domain.validate();
    Dictionary d;
    d.kind = DictKind::linear;
    d.domain = domain;
    return d;
}

Dictionary rbf_dictionary(const Mat &centers, double sigma, const Box &domain)
{
    domain.validate();
    if (centers.rows() < 1) throw Error("rbf dictionary needs at least one center");
    if (centers.cols() != domain.dims()) throw Error("rbf centers do not match domain dimension");
    if (!(sigma > 0)) throw Error("rbf sigma must be positive");
    Dictionary d;
    d.kind = DictKind::gaussian_rbf;
    d.domain = domain;
    d.centers = centers;
    d.sigma_rbf = sigma;
    d.norm.resize(centers.rows());
    for (int k = 0; k < centers.rows(); ++k) {
        double mass = 1;
        for (int j = 0; j < domain.dims(); ++j)
            mass *= gauss_mass(domain.lo(j), domain.hi(j), centers(k, j), sigma);
        if (!(mass > 0)) throw Error("rbf center " + std::to_string(k) + " has no mass in the domain");
        d.norm(k) = 1.0 / mass;
    }
    return d;
}

Dictionary indicator_dictionary(const Partition &part)
{
    Dictionary d;
    d.kind = DictKind::indicator;
    d.domain = part.domain;
    d.partition = part;
    return d;
}

RowVec evaluate(const Dictionary &dict, const Vec &z)
{
    if (z.size() != dict.state_dims()) throw Error("state dimension does not match dictionary");
    switch (dict.kind) {
    case DictKind::linear:
        return z.transpose();
    case DictKind::gaussian_rbf: {
        const double inv = 1.0 / (2 * dict.sigma_rbf * dict.sigma_rbf);
        RowVec out(dict.size());
        for (int k = 0; k < dict.size(); ++k)
            out(k) = dict.norm(k) * std::exp(-(dict.centers.row(k).transpose() - z).squaredNorm() * inv);
        return out;
    }
    case DictKind::indicator: {
        RowVec out = RowVec::Zero(dict.size());
        int c = dict.partition->cell_of(z);
        if (c >= 0) out(c) = 1.0 / dict.partition->cell_volume();
        return out;
    }
    }
    throw Error("unknown dictionary kind");
}

Mat evaluate_rows(const Dictionary &dict, const Mat &data, Exec exec)
{
    const Eigen::Index m = data.rows();
    Mat out(m, dict.size());
    if (exec == Exec::serial) {
        for (Eigen::Index t = 0; t < m; ++t) out.row(t) = evaluate(dict, data.row(t).transpose());
        return out;
    }
    std::string err;
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (Eigen::Index t = 0; t < m; ++t) {
        try {
            out.row(t) = evaluate(dict, data.row(t).transpose());
        } catch (const std::exception &e) {
#pragma omp critical
            err = e.what();
        }
    }
    if (!err.empty()) throw Error(err);
    return out;
}

namespace {

Mat rbf_gram(const Dictionary &dict)
{
    const int K = dict.size();
    const double s = dict.sigma_rbf;
    Mat L(K, K);
    for (int i = 0; i < K; ++i) {
        for (int j = i; j < K; ++j) {
            double v = dict.norm(i) * dict.norm(j);
            for (int d = 0; d < dict.state_dims(); ++d) {
                const double mi = dict.centers(i, d), mj = dict.centers(j, d);
                const double m = 0.5 * (mi + mj);
                v *= std::exp(-(mi - mj) * (mi - mj) / (4 * s * s)) * (s * std::sqrt(std::numbers::pi) / 2) *
                     (std::erf((dict.domain.hi(d) - m) / s) - std::erf((dict.domain.lo(d) - m) / s));
            }
            L(i, j) = L(j, i) = v;
        }
    }
    return L;
}

Mat linear_gram(const Box &b)
{
    const int n = b.dims();
    const double vol = b.volume();
    Mat L(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double ai = b.lo(i), bi = b.hi(i), aj = b.lo(j), bj = b.hi(j);
            L(i, j) = i == j ? vol * (ai * ai + ai * bi + bi * bi) / 3.0 : vol * 0.25 * (ai + bi) * (aj + bj);
        }
    return L;
}

}  // namespace

Mat gram(const Dictionary &dict, GramInfo *info)
{
    Mat L;
    switch (dict.kind) {
    case DictKind::linear:
        L = linear_gram(dict.domain);
        break;
    case DictKind::gaussian_rbf:
        L = rbf_gram(dict);
        break;
    case DictKind::indicator:
        L = Mat::Identity(dict.size(), dict.size()) / dict.partition->cell_volume();
        break;
    }
    L = 0.5 * (L + L.transpose());

    Eigen::SelfAdjointEigenSolver<Mat> es(L, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0) || lmin <= 1e-13 * lmax)
        throw Error("Gram matrix is numerically singular (min/max eigenvalue " +
                    std::to_string(lmin / lmax) + "); remove duplicated dictionary functions");

    const double scale = L.trace() / L.rows();
    for (double eps = 1e-10; eps <= 1e-6 * 1.0001; eps *= 10) {
        const double jit = eps * scale;
        Mat Lj = L + jit * Mat::Identity(L.rows(), L.cols());
        Eigen::LLT<Mat> llt(Lj);
        if (llt.info() == Eigen::Success && lmin + jit >= 0.5 * jit) {
            if (info) *info = {jit, lmin + jit, lmax + jit};
            return Lj;
        }
    }
    throw Error("Gram matrix is not positive definite within the jitter tolerance");
}

Mat cell_integrals(const Dictionary &dict, const Partition &part)
{
    if (part.dims() != dict.state_dims()) throw Error("partition dimension does not match dictionary");
    for (int d = 0; d < part.dims(); ++d) {
        const double tol = 1e-12 * (dict.domain.hi(d) - dict.domain.lo(d));
        if (part.domain.lo(d) < dict.domain.lo(d) - tol || part.domain.hi(d) > dict.domain.hi(d) + tol)
            throw Error("partition domain is not contained in the dictionary domain");
    }
    const int K = dict.size(), C = part.cells();
    Mat Th(K, C);
    switch (dict.kind) {
    case DictKind::linear:
        for (int c = 0; c < C; ++c) {
            Box b = part.cell_box(c);
            Th.col(c) = b.volume() * 0.5 * (b.lo + b.hi);
        }
        break;
    case DictKind::gaussian_rbf: {
        // separable: per-axis bin masses, then products over the multi-index
        std::vector<Mat> axis(part.dims());
        for (int d = 0; d < part.dims(); ++d) {
            axis[d].resize(K, part.resolution[d]);
            for (int k = 0; k < K; ++k)
                for (int i = 0; i < part.resolution[d]; ++i)
                    axis[d](k, i) = gauss_mass(part.edge(d, i), part.edge(d, i + 1), dict.centers(k, d), dict.sigma_rbf);
        }
        for (int c = 0; c < C; ++c) {
            auto mi = part.multi_index(c);
            for (int k = 0; k < K; ++k) {
                double v = dict.norm(k);
                for (int d = 0; d < part.dims(); ++d) v *= axis[d](k, mi[d]);
                Th(k, c) = v;
            }
        }
        break;
    }
    case DictKind::indicator: {
        const Partition &own = *dict.partition;
        for (int k = 0; k < K; ++k) {
            Box bk = own.cell_box(k);
            for (int c = 0; c < C; ++c) {
                Box bc = part.cell_box(c);
                double v = 1;
                for (int d = 0; d < part.dims() && v > 0; ++d)
                    v *= std::max(0.0, std::min(bk.hi(d), bc.hi(d)) - std::max(bk.lo(d), bc.lo(d)));
                Th(k, c) = v / bk.volume();
            }
        }
        break;
    }
    }
    return Th;
}

Vec total_integrals(const Dictionary &dict)
{
    switch (dict.kind) {
    case DictKind::linear:
        return dict.domain.volume() * 0.5 * (dict.domain.lo + dict.domain.hi);
    case DictKind::gaussian_rbf: {
        Vec out(dict.size());
        for (int k = 0; k < dict.size(); ++k) {
            double v = dict.norm(k);
            for (int d = 0; d < dict.state_dims(); ++d)
                v *= gauss_mass(dict.domain.lo(d), dict.domain.hi(d), dict.centers(k, d), dict.sigma_rbf);
            out(k) = v;
        }
        return out;
    }
    case DictKind::indicator:
        return Vec::Ones(dict.size());
    }
    throw Error("unknown dictionary kind");
}

Mat grid_centers(const Box &box, int k)
{
    box.validate();
    const int n = box.dims();
    int per = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(k), 1.0 / n) + 1e-9)));
    std::vector<int> res(n, per);
    // grow axes one at a time while the total stays <= k
    for (int d = 0; d < n; ++d) {
        int total = 1;
        for (int r : res) total *= r;
        if (total / res[d] * (res[d] + 1) <= k) ++res[d];
    }
    Partition p = build_partition(box, res);
    Mat c(p.cells(), n);
    for (int i = 0; i < p.cells(); ++i) c.row(i) = p.cell_center(i).transpose();
    return c;
}

DictSpec parse_dict_spec(const std::string &text)
{
    DictSpec s;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.empty()) throw Error("empty dictionary spec");
    try {
        if (parts[0] == "linear") {
            s.kind = DictKind::linear;
        } else if (parts[0] == "rbf" || parts[0] == "gaussian_rbf") {
            if (parts.size() < 3) throw Error("rbf spec needs rbf:<count>:<sigma>");
            s.kind = DictKind::gaussian_rbf;
            s.count = std::stoi(parts[1]);
            s.sigma = std::stod(parts[2]);
            if (parts.size() > 3) s.centers = parts[3];
        } else if (parts[0] == "indicator") {
            s.kind = DictKind::indicator;
            if (parts.size() > 1) {
                std::stringstream rs(parts[1]);
                for (std::string r; std::getline(rs, r, 'x');) s.resolution.push_back(std::stoi(r));
            }
        } else {
            throw Error("unknown dictionary kind '" + parts[0] + "'");
        }
    } catch (const std::invalid_argument &) {
        throw Error("malformed dictionary spec '" + text + "'");
    }
    return s;
}

Dictionary build_dictionary(const DictSpec &spec, const Mat &data, const Box &domain)
{
    switch (spec.kind) {
    case DictKind::linear:
        return linear_dictionary(domain);
    case DictKind::gaussian_rbf: {
        if (spec.count < 1) throw Error("rbf dictionary needs a positive count");
        Mat centers = spec.centers == "grid" ? grid_centers(domain, spec.count)
                                             : kmeans_centers(data, spec.count, spec.seed);
        return rbf_dictionary(centers, spec.sigma, domain);
    }
    case DictKind::indicator: {
        auto res = spec.resolution;
        if (res.empty()) res = default_resolution(domain.dims());
        if (res.size() == 1 && domain.dims() > 1) res.assign(domain.dims(), res[0]);
        return indicator_dictionary(build_partition(domain, res));
    }
    }
    throw Error("unknown dictionary kind");
}

}  // namespace infoflow
