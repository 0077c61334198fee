#include "infoflow/it_nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "infoflow/freeze.hpp"

namespace infoflow {

namespace {

RowVec normalize_mass(RowVec w, const Vec &mass)
{
    const double s = w.dot(mass.transpose());
    if (!(std::abs(s) > 0)) throw Error("density has zero total mass");
    return w / s;
}

}  // namespace

DensityCoefficients stationary_coefficients(const Mat &M, const Vec &mass)
{
    const int K = static_cast<int>(M.rows());
    if (M.cols() != K || mass.size() != K) throw Error("shape mismatch in stationary density");
    DensityCoefficients out;
    out.kind = DensityCoefficients::Kind::stationary;

    RowVec w = normalize_mass(RowVec::Ones(K), mass);
    for (int it = 0; it < 20000; ++it) {
        RowVec next = w * M;
        const double change = (next - w).cwiseAbs().sum();
        w = next;
        if (change < 1e-14) break;
    }
    w = normalize_mass(w, mass);
    if ((w * M - w).cwiseAbs().sum() <= 1e-8 * std::max(1.0, w.cwiseAbs().sum())) {
        out.w = w;
        if ((M - Mat::Identity(K, K)).cwiseAbs().maxCoeff() == 0) out.kind = DensityCoefficients::Kind::uniform;
        return out;
    }

    // slow or periodic chain: take the left eigenvector closest to 1 directly
    Eigen::EigenSolver<Mat> es(M.transpose());
    int best = 0;
    for (int i = 1; i < K; ++i)
        if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = i;
    if (std::abs(es.eigenvalues()(best) - 1.0) > 1e-6)
        throw Error("dominant eigenvalue of the density evolution is not 1");
    out.w = normalize_mass(es.eigenvectors().col(best).real().transpose(), mass);
    return out;
}

DensityCoefficients cell_concentrated_coefficients(int cell, const Dictionary &dict, const Partition &part,
                                                   const Mat &Lambda, const Mat &Theta)
{
    if (cell < 0 || cell >= part.cells()) throw Error("cell index out of range");
    if (Theta.rows() != dict.size() || Theta.cols() != part.cells()) throw Error("Theta shape mismatch");
    const double vol = part.cell_volume();
    const Vec b = Theta.col(cell) / vol;
    Eigen::LLT<Mat> llt(Lambda);
    if (llt.info() != Eigen::Success) throw Error("Gram matrix is singular");
    const Vec w = llt.solve(b);
    // |f - Psi w|^2 = |f|^2 - b.w with |f|^2 = 1/vol
    const double rel = std::sqrt(std::max(0.0, 1.0 - vol * b.dot(w)));
    if (rel > 0.1)
        throw Error("dictionary cannot represent cell " + std::to_string(cell) + " (relative residual " +
                    std::to_string(rel) + "); use a finer dictionary");
    const double s = w.dot(Theta.col(cell));
    DensityCoefficients out;
    out.kind = DensityCoefficients::Kind::cell_concentrated;
    out.cell = cell;
    out.w = (w / s).transpose();
    return out;
}

JointDistribution joint_probability(const DensityCoefficients &w, const Mat &M, const Mat &Theta, JointMode mode,
                                    const JointInputs &extra, Exec exec)
{
    const int K = static_cast<int>(M.rows()), n = static_cast<int>(Theta.cols());
    if (M.cols() != K || Theta.rows() != K || w.w.size() != K) throw Error("shape mismatch in joint probability");
    if (mode == JointMode::concentrated && (!extra.dict || !extra.part || !extra.Lambda))
        throw Error("concentrated mode needs the dictionary, partition and Gram matrix");

    const RowVec p = w.w * Theta;
    Mat Gamma(n, n);
    std::string err;
    auto row = [&](int i) {
        if (mode == JointMode::responsibility) {
            // p_i * (wbar M Theta) with wbar = w .* Theta_i / p_i
            Gamma.row(i) = (w.w.cwiseProduct(Theta.col(i).transpose()) * M) * Theta;
        } else {
            const DensityCoefficients wb =
                cell_concentrated_coefficients(i, *extra.dict, *extra.part, *extra.Lambda, Theta);
            Gamma.row(i) = p(i) * ((wb.w * M) * Theta);
        }
    };
    if (exec == Exec::serial) {
        for (int i = 0; i < n; ++i) row(i);
    } else {
#pragma omp parallel for schedule(static) num_threads(max_threads())
        for (int i = 0; i < n; ++i) {
            try {
                row(i);
            } catch (const std::exception &e) {
#pragma omp critical
                err = e.what();
            }
        }
        if (!err.empty()) throw Error(err);
    }

    JointDistribution J;
    J.raw_mass = Gamma.sum();
    J.min_raw = Gamma.minCoeff();
    if (std::abs(J.raw_mass - 1.0) > 0.05)
        throw Error("joint distribution has total mass " + std::to_string(J.raw_mass) + " (bad operator fit?)");
    J.Gamma = Gamma.cwiseMax(0.0);
    J.Gamma /= J.Gamma.sum();
    return J;
}

Mat marginalize_subspace(const Mat &Gamma, const IndexSet &y_idx, const Partition &part)
{
    const IndexSet y = normalized(y_idx, part.dims());
    if (y.empty()) throw Error("target subspace is empty");
    const int n = part.cells();
    if (Gamma.rows() != n || Gamma.cols() != n) throw Error("joint distribution does not match partition");
    const int m = part.projected_cells(y);
    std::vector<int> proj(n);
    for (int c = 0; c < n; ++c) proj[c] = part.projected_index(c, y);
    Mat Q = Mat::Zero(m, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Q(proj[i], proj[j]) += Gamma(i, j);
    return Q;
}

double discrete_entropy(const Mat &Q)
{
    if (Q.size() == 0) throw Error("empty distribution");
    if (Q.minCoeff() < -1e-10) throw Error("distribution has negative entries");
    double h = 0;
    for (Eigen::Index k = 0; k < Q.size(); ++k) {
        const double q = Q.data()[k];
        if (q >= 1e-12) h -= q * std::log(q);
    }
    return h;
}

Mat count_joint(const PairedDataset &pairs, const Partition &part)
{
    pairs.validate();
    const int n = part.cells();
    Mat counts = Mat::Zero(n, n);
    for (int p = 0; p < pairs.pairs(); ++p) {
        const int a = part.cell_of(pairs.inputs.row(p).transpose());
        const int b = part.cell_of(pairs.targets.row(p).transpose());
        if (a >= 0 && b >= 0) counts(a, b) += 1;
    }
    Mat P = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        const double r = counts.row(i).sum();
        if (r > 0) P.row(i) = counts.row(i) / r;
    }
    const RowVec pi = stationary_coefficients(P, Vec::Ones(n)).w;
    return pi.transpose().asDiagonal() * P;
}

NonlinearTransferSet transfer_nonlinear(std::span<const TimeSeries> runs, const std::vector<SubspacePair> &pairs_in,
                                        const NonlinearOptions &opt)
{
    if (pairs_in.empty()) throw Error("no subspace pairs requested");
    const PairedDataset pairs = consecutive_pairs(runs);
    const int N = pairs.dims();
    std::vector<SubspacePair> req;
    NonlinearTransferSet out;
    std::vector<int> source_of;
    for (const auto &sp : pairs_in) {
        SubspacePair r{normalized(sp.from, N), normalized(sp.to, N)};
        if (r.from.empty() || r.to.empty()) throw Error("source and target subspaces must be nonempty");
        for (int i : r.from)
            if (std::find(r.to.begin(), r.to.end(), i) != r.to.end()) throw Error("source and target subspaces overlap");
        auto it = std::find(out.sources.begin(), out.sources.end(), r.from);
        source_of.push_back(static_cast<int>(it - out.sources.begin()));
        if (it == out.sources.end()) out.sources.push_back(r.from);
        req.push_back(std::move(r));
    }

    std::vector<PairedDataset> frozen_pairs;
    for (const IndexSet &x : out.sources) frozen_pairs.push_back(freeze_pairs(pairs, x));
    // centers see every fitted target set; frozen targets mostly lie off the attractor
    const int P = pairs.pairs();
    Mat all((2 + static_cast<int>(frozen_pairs.size())) * P, N);
    all.topRows(P) = pairs.inputs;
    all.middleRows(P, P) = pairs.targets;
    for (size_t k = 0; k < frozen_pairs.size(); ++k) all.middleRows((2 + k) * P, P) = frozen_pairs[k].targets;
    const Box domain = data_box(all);
    out.dict = build_dictionary(opt.dict, all, domain);
    out.part = build_partition(domain, opt.resolution.empty() ? default_resolution(N) : opt.resolution);
    if (pairs.pairs() < 10 * out.dict.size())
        out.result.warnings.push_back("only " + std::to_string(pairs.pairs()) + " pairs for " +
                                      std::to_string(out.dict.size()) + " dictionary functions");
    const Mat Lambda = gram(out.dict);
    const Mat Theta = cell_integrals(out.dict, out.part);

    out.full = nsdmd(lift(pairs, out.dict, opt.exec), Lambda, opt.lambda_reg, opt.solver);
    for (const PairedDataset &fp : frozen_pairs)
        out.frozen.push_back(nsdmd(lift(fp, out.dict, opt.exec), Lambda, opt.lambda_reg, opt.solver));
    out.full.dict_id = out.dict.describe();
    for (auto &f : out.frozen) f.dict_id = out.full.dict_id;
    auto warn = [&](const OperatorApprox &op, const std::string &what) {
        if (op.converged) return;
        std::ostringstream os;
        os << what << ": nsdmd stopped at the iteration cap (" << op.iterations << ") before its tolerance; "
           << "constraint violation " << op.feasibility;
        out.result.warnings.push_back(os.str());
    };
    warn(out.full, "full fit");
    for (size_t k = 0; k < out.frozen.size(); ++k) warn(out.frozen[k], "frozen fit " + std::to_string(k));

    const Mat M = markov_matrix(out.full.K, Lambda);
    out.w = stationary_coefficients(M, total_integrals(out.dict));
    const JointInputs extra{&out.dict, &out.part, &Lambda};
    out.Gamma = joint_probability(out.w, M, Theta, opt.mode, extra, opt.exec).Gamma;
    for (const auto &f : out.frozen)
        out.Gamma_frozen.push_back(joint_probability(out.w, markov_matrix(f.K, Lambda), Theta, opt.mode, extra, opt.exec).Gamma);

    for (size_t k = 0; k < req.size(); ++k) {
        PairTransfer pt;
        pt.from = req[k].from;
        pt.to = req[k].to;
        pt.H = discrete_entropy(marginalize_subspace(out.Gamma, pt.to, out.part));
        pt.H_frozen = discrete_entropy(marginalize_subspace(out.Gamma_frozen[source_of[k]], pt.to, out.part));
        pt.T = pt.H - pt.H_frozen;
        out.result.pairs.push_back(pt);
    }
    out.result.labels = runs[0].labels.empty() ? default_labels(N) : runs[0].labels;
    out.result.t = "stationary";
    out.result.mode = "nonlinear";
    return out;
}

NonlinearTransfer transfer_nonlinear(std::span<const TimeSeries> runs, const IndexSet &x_idx, const IndexSet &y_idx,
                                     const NonlinearOptions &opt)
{
    NonlinearTransferSet set = transfer_nonlinear(runs, {SubspacePair{x_idx, y_idx}}, opt);
    NonlinearTransfer out;
    out.result = std::move(set.result);
    out.dict = std::move(set.dict);
    out.part = std::move(set.part);
    out.full = std::move(set.full);
    out.frozen = std::move(set.frozen[0]);
    out.w = std::move(set.w);
    out.Gamma = std::move(set.Gamma);
    out.Gamma_frozen = std::move(set.Gamma_frozen[0]);
    return out;
}

NonlinearTransfer transfer_nonlinear(const TimeSeries &ts, const IndexSet &x_idx, const IndexSet &y_idx,
                                     const NonlinearOptions &opt)
{
    return transfer_nonlinear(std::span<const TimeSeries>(&ts, 1), x_idx, y_idx, opt);
}

}  // namespace infoflow
