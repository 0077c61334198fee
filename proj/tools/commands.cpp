#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "infoflow/dynamics.hpp"
#include "infoflow/it_nonlinear.hpp"

namespace infoflow::cli {

namespace {

void stamp(json &j, const GlobalOptions &g, const std::string &command)
{
    j["command"] = command;
    if (g.reproducible) return;
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream os;
    os << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    j["generated_at"] = os.str();
}

void emit_json(const json &j, const std::string &path)
{
    if (path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(j, path);
}

std::string join(const std::vector<std::string> &v)
{
    std::string s;
    for (const auto &x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

std::vector<TimeSeries> load_runs(const std::vector<std::string> &inputs)
{
    if (inputs.empty()) throw CLI::RequiredError("input");
    std::vector<TimeSeries> runs;
    for (const auto &path : inputs) {
        auto r = read_runs_csv(path);
        for (auto &ts : r) {
            if (!runs.empty() && ts.labels != runs.front().labels)
                throw Error(path + ": labels differ from " + inputs.front());
            runs.push_back(std::move(ts));
        }
    }
    return runs;
}

DictSpec dict_from_text(const std::string &text)
{
    if (!text.empty() && text.front() == '{') {
        try {
            return dict_spec_from_json(json::parse(text));
        } catch (const json::exception &e) {
            throw Error("dictionary spec: " + std::string(e.what()));
        }
    }
    return parse_dict_spec(text);
}

std::map<std::string, double> parse_params(const std::vector<std::string> &items)
{
    std::map<std::string, double> out;
    for (const auto &s : items) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected name=value, got '" + s + "'");
        try {
            out[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
        } catch (const std::exception &) {
            throw CLI::ValidationError("--param", "not a number in '" + s + "'");
        }
    }
    return out;
}

double take(std::map<std::string, double> &p, const std::string &name, double fallback)
{
    auto it = p.find(name);
    if (it == p.end()) return fallback;
    const double v = it->second;
    p.erase(it);
    return v;
}

Vec to_vec(const std::vector<double> &v)
{
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

TimeSeries matrix_csv(const std::string &path)
{
    TimeSeries m = read_csv(path);
    if (m.steps() != m.dims()) throw Error(path + ": system matrix must be square with one header label per column");
    return m;
}

}  // namespace

std::pair<IndexSet, IndexSet> parse_pair(const std::string &text, const std::vector<std::string> &labels)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error("pair '" + text + "' must look like from:to");
    auto side = [&](const std::string &s) {
        IndexSet idx;
        std::stringstream ss(s);
        for (std::string name; std::getline(ss, name, '+');) {
            auto it = std::find(labels.begin(), labels.end(), name);
            if (it == labels.end())
                throw Error("unknown label '" + name + "' in pair '" + text + "'; labels are: " + join(labels));
            idx.push_back(static_cast<int>(it - labels.begin()));
        }
        if (idx.empty()) throw Error("empty side in pair '" + text + "'");
        return normalized(idx, static_cast<int>(labels.size()));
    };
    return {side(text.substr(0, colon)), side(text.substr(colon + 1))};
}

int cmd_generate(const GenerateOptions &o, const GlobalOptions &g)
{
    if (o.system.empty()) throw CLI::RequiredError("--system");
    if (!o.steps) throw CLI::RequiredError("--steps");
    if (!o.seed) throw CLI::RequiredError("--seed");
    if (o.out.empty()) throw CLI::RequiredError("--out");
    auto params = parse_params(o.params);
    const int steps = *o.steps;
    const std::uint64_t seed = *o.seed;

    std::vector<TimeSeries> runs;
    std::optional<DirectedGraph> truth;
    Mat A;
    std::vector<std::string> labels;
    const bool linear = o.system == "feedback5" || o.system == "mass_spring" || o.system == "small_world" ||
                        o.system == "lti";
    if (linear) {
        LinearSystem sys;
        sys.sigma = o.sigma;
        if (o.system == "feedback5") {
            sys.A = feedback5_matrix();
            truth = graph_from_matrix(sys.A);
        } else if (o.system == "mass_spring") {
            const double M = take(params, "M", 10), m = take(params, "m", 1), k = take(params, "k", 1),
                         d = take(params, "d", 5), dt = take(params, "dt", 0.1);
            sys.A = mass_spring_damper(M, m, k, d, dt).A;
            labels = {"x1", "v1", "x2", "v2"};
        } else if (o.system == "small_world") {
            const std::uint64_t gs = o.graph_seed.value_or(seed);
            const DirectedGraph net = watts_strogatz_directed(o.nodes, o.k_ring, o.rewire, gs);
            sys.A = network_to_system(net, o.spectral, gs).A;
            truth = net;
        } else {
            if (o.matrix.empty()) throw CLI::RequiredError("--matrix");
            const TimeSeries m = matrix_csv(o.matrix);
            sys.A = m.data;
            labels = m.labels;
            truth = graph_from_matrix(sys.A);
        }
        sys.validate();
        A = sys.A;
        if (o.runs == 1 && !o.z0.empty()) {
            if (static_cast<int>(o.z0.size()) != A.rows()) throw Error("--z0 needs " + std::to_string(A.rows()) + " values");
            runs.push_back(simulate_lti(sys, to_vec(o.z0), steps, seed));
        } else if (o.runs == 1) {
            runs.push_back(simulate_lti(sys, o.z0_scale, steps, seed));
        } else {
            if (!o.z0.empty()) throw Error("--z0 applies to a single run; ensembles draw z0_scale * N(0, I)");
            runs = simulate_lti_ensemble(sys, o.runs, steps, o.z0_scale, seed);
        }
    } else {
        MapSystem sys = o.system == "henon" ? henon_map(o.gamma, take(params, "a", 1.4), take(params, "b", 0.3))
                                            : coupled_logistic_map(o.gamma);
        labels = {"x", "y"};
        if (o.runs == 1) {
            Vec z0 = o.z0.empty() ? Vec(Vec::Constant(2, o.system == "henon" ? 0.1 : 0.5)) : to_vec(o.z0);
            if (o.z0.empty() && o.system == "two_state") z0(1) = 0.2;
            if (z0.size() != 2) throw Error("--z0 needs 2 values");
            runs.push_back(simulate_map(sys, z0, steps, seed));
        } else {
            if (o.init_lo.size() != 2 || o.init_hi.size() != 2)
                throw Error("map ensembles need --init-lo and --init-hi with 2 values each");
            runs = simulate_map_ensemble(sys, Box{to_vec(o.init_lo), to_vec(o.init_hi)}, o.runs, steps, seed);
        }
    }
    if (!params.empty()) throw CLI::ValidationError("--param", "'" + params.begin()->first + "' does not apply to " + o.system);
    if (!labels.empty())
        for (auto &r : runs) r.labels = labels;
    labels = runs.front().labels;

    std::filesystem::create_directories(o.out);
    const std::filesystem::path dir(o.out);
    write_runs_csv(runs, (dir / "data.csv").string());
    json meta{{"system", o.system}, {"steps", steps}, {"seed", seed}, {"runs", o.runs}, {"labels", labels}};
    if (linear) {
        meta["sigma"] = o.sigma;
        write_csv(make_series(A, labels), (dir / "A.csv").string());
    } else {
        meta["gamma"] = o.gamma;
    }
    if (truth) {
        write_json(graph_to_json(*truth, labels), (dir / "truth.json").string());
        write_dot(*truth, labels, (dir / "truth.dot").string(), "w");
    }
    stamp(meta, g, "generate");
    write_json(meta, (dir / "meta.json").string());
    std::cout << "wrote " << runs.size() << " run(s) x " << runs.front().steps() << " rows to " << (dir / "data.csv").string()
              << "\n";
    return 0;
}

int cmd_fit(const FitOptions &o, const GlobalOptions &g)
{
    if (o.out.empty()) throw CLI::RequiredError("--out");
    const auto runs = load_runs(o.inputs);
    const PairedDataset pairs = consecutive_pairs(runs);
    Mat all(2 * pairs.pairs(), pairs.dims());
    all << pairs.inputs, pairs.targets;
    const Box domain = data_box(all);
    const DictSpec spec = dict_from_text(o.dict);
    const Dictionary dict = build_dictionary(spec, pairs.inputs, domain);
    const LiftedData ld = lift(pairs, dict);

    SolverOptions sopt;
    if (o.max_iter > 0) sopt.nsdmd_max_iter = o.max_iter;
    const Method method = parse_method(o.method);
    OperatorApprox op;
    if (method == Method::edmd) {
        if (o.lambda != 0) throw CLI::ValidationError("--lambda", "edmd has no robustness weight; use --method robust");
        op = edmd(ld);
    } else if (method == Method::robust_edmd) {
        op = robust_edmd(ld, o.lambda, sopt);
    } else {
        if (spec.kind == DictKind::linear) throw Error("nsdmd needs a density dictionary (rbf or indicator)");
        op = nsdmd(ld, gram(dict), o.lambda, sopt);
    }
    op.dict_id = dict.describe();

    json j = operator_to_json(op);
    j["labels"] = runs.front().labels;
    j["pairs"] = pairs.pairs();
    j["dict_spec"] = dict_spec_to_json(spec);
    j["domain"] = {{"lo", std::vector<double>(domain.lo.data(), domain.lo.data() + domain.dims())},
                   {"hi", std::vector<double>(domain.hi.data(), domain.hi.data() + domain.dims())}};
    const auto sp = spectrum(op.K, std::min<int>(o.eigen_count, static_cast<int>(op.K.rows())));
    j["spectrum"] = json::array();
    for (const auto &e : sp) j["spectrum"].push_back({e.value.real(), e.value.imag()});
    stamp(j, g, "fit");
    write_json(j, o.out);

    if (!o.eigen_csv.empty()) {
        const Partition part = build_partition(domain, default_resolution(domain.dims()));
        Mat centers(part.cells(), domain.dims());
        for (int c = 0; c < part.cells(); ++c) centers.row(c) = part.cell_center(c).transpose();
        const Mat Psi = evaluate_rows(dict, centers);
        Mat out(part.cells(), domain.dims() + 3 * static_cast<int>(sp.size()));
        out.leftCols(domain.dims()) = centers;
        std::vector<std::string> cols = runs.front().labels;
        for (size_t k = 0; k < sp.size(); ++k) {
            const Eigen::VectorXcd phi = Psi.cast<std::complex<double>>() * sp[k].vector;
            const int c0 = domain.dims() + 3 * static_cast<int>(k);
            out.col(c0) = phi.real();
            out.col(c0 + 1) = phi.imag();
            out.col(c0 + 2) = phi.cwiseAbs();
            for (const char *part_name : {"re", "im", "abs"}) cols.push_back(part_name + std::to_string(k + 1));
        }
        write_matrix_csv(out, {}, cols, o.eigen_csv);
    }

    std::cout << method_name(op.method) << " on " << op.dict_id << ": residual " << op.residual << ", "
              << op.iterations << " iterations\n";
    if (method == Method::nsdmd) {
        const Feasibility f = nsdmd_feasibility(op.K, op.Lambda);
        if (f.violation() > sopt.tol_feas) {
            std::cerr << "error: nsdmd constraints violated by " << f.violation() << " (min K " << f.min_K << ", min M "
                      << f.min_M << ", row-sum error " << f.row_sum_err << "); diagnostics in " << o.out << "\n";
            return 2;
        }
        if (!op.converged) std::cerr << "warning: nsdmd hit the iteration cap before reaching its tolerance\n";
    } else if (!op.converged) {
        std::cerr << "warning: solver hit the iteration cap before reaching its tolerance\n";
    }
    return 0;
}

int cmd_transfer(const TransferOptions &o, const GlobalOptions &g)
{
    TransferResult tr;
    if (!o.matrix.empty()) {
        if (!o.inputs.empty()) throw CLI::ValidationError("--matrix", "analytic transfer takes no data files");
        if (!o.sigma) throw CLI::RequiredError("--sigma");
        const TimeSeries m = matrix_csv(o.matrix);
        const CovarianceState cov = o.steady_state ? steady_state_covariance(m.data, *o.sigma)
                                                   : propagate_covariance(m.data, Mat::Identity(m.dims(), m.dims()),
                                                                          *o.sigma, o.t_steps);
        if (o.pairs.empty()) {
            tr = transfer_matrix_analytic(m.data, *o.sigma, cov);
        } else {
            tr.t = o.steady_state ? "steady_state" : std::to_string(o.t_steps);
            tr.sigma = *o.sigma;
            for (const auto &p : o.pairs) {
                auto [from, to] = parse_pair(p, m.labels);
                SubspaceSplit split{complement(to, m.dims()), to, from};
                split.validate(m.dims());
                PairTransfer pt;
                pt.from = from;
                pt.to = to;
                pt.H = gaussian_conditional_entropy(m.data, cov.Sigma, *o.sigma, to, split.x_idx);
                pt.H_frozen = gaussian_conditional_entropy(m.data, cov.Sigma, *o.sigma, to, split.x2_idx());
                pt.T = pt.H - pt.H_frozen;
                tr.pairs.push_back(pt);
            }
        }
        tr.labels = m.labels;
        tr.mode = "linear_analytic";
    } else {
        const auto runs = load_runs(o.inputs);
        const auto &labels = runs.front().labels;
        std::vector<SubspacePair> req;
        for (const auto &p : o.pairs) {
            auto [from, to] = parse_pair(p, labels);
            req.push_back({from, to});
        }
        if (o.mode == "linear") {
            LinearTransferOptions lo;
            lo.lambda_reg = o.lambda;
            lo.sigma_hint = o.sigma;
            lo.steady_state = o.steady_state;
            lo.t_steps = o.t_steps;
            if (req.empty()) {
                tr = transfer_matrix_datadriven(runs, lo);
            } else {
                for (const auto &r : req) {
                    const int n = static_cast<int>(labels.size());
                    SubspaceSplit split{complement(r.to, n), r.to, r.from};
                    const TransferResult one = transfer_linear_datadriven(runs, split, lo);
                    if (tr.pairs.empty()) tr = one;
                    else tr.pairs.insert(tr.pairs.end(), one.pairs.begin(), one.pairs.end());
                }
            }
        } else {
            if (o.sigma) throw CLI::ValidationError("--sigma", "applies to linear mode only");
            NonlinearOptions no;
            no.dict = dict_from_text(o.dict.empty() ? "rbf:200:0.01" : o.dict);
            no.resolution = o.resolution;
            no.lambda_reg = o.lambda;
            if (req.empty()) {
                const int n = static_cast<int>(labels.size());
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        if (i != j) req.push_back({{i}, {j}});
            }
            tr = transfer_nonlinear(runs, req, no).result;
        }
        tr.labels = labels;
    }

    json j = transfer_to_json(tr);
    j["threshold"] = o.threshold;
    stamp(j, g, "transfer");
    emit_json(j, o.out);
    if (!o.heatmap.empty()) {
        const int n = static_cast<int>(tr.labels.size());
        for (const auto &p : tr.pairs)
            if (p.from.size() != 1 || p.to.size() != 1) throw Error("--heatmap needs single-coordinate pairs");
        write_matrix_csv(tr.matrix(n), tr.labels, tr.labels, o.heatmap);
    }
    for (const auto &w : tr.warnings) std::cerr << "warning: " << w << "\n";
    if (!o.out.empty())
        for (const auto &p : j.at("pairs"))
            std::cout << "T[" << p.at("from").get<std::string>() << " -> " << p.at("to").get<std::string>()
                      << "] = " << p.at("T").get<double>() << "\n";
    return 0;
}

int cmd_topology(const TopologyOptions &o, const GlobalOptions &g)
{
    DirectedGraph graph;
    std::vector<std::string> labels;
    std::string weight = "T";
    double threshold = 0;
    if (o.method == "it") {
        TransferResult tr;
        threshold = o.threshold.value_or(kDefaultTransferThreshold);
        if (!o.transfer.empty()) {
            if (!o.inputs.empty()) throw CLI::ValidationError("--transfer", "give either a transfer JSON or data");
            const json j = read_json(o.transfer);
            tr = transfer_from_json(j);
            if (!o.threshold && j.contains("threshold")) threshold = j.at("threshold").get<double>();
        } else {
            const auto runs = load_runs(o.inputs);
            LinearTransferOptions lo;
            lo.lambda_reg = o.lambda;
            tr = transfer_matrix_datadriven(runs, lo);
            tr.labels = runs.front().labels;
        }
        labels = tr.labels;
        graph = it_topology(tr, threshold, static_cast<int>(labels.size()));
    } else {
        if (!o.transfer.empty()) throw CLI::ValidationError("--transfer", "only the it method reads a transfer JSON");
        const auto runs = load_runs(o.inputs);
        labels = runs.front().labels;
        if (o.method == "granger") {
            if (runs.size() != 1) throw Error("granger needs a single trajectory, got " + std::to_string(runs.size()));
            if (o.threshold) throw CLI::ValidationError("--threshold", "granger uses --alpha");
            GrangerConfig cfg{o.p, o.q, o.r, o.alpha};
            graph = granger_topology(runs.front(), cfg);
            weight = "G";
            threshold = o.alpha;
        } else {
            threshold = o.threshold.value_or(kDefaultDmdThreshold);
            graph = dmd_threshold_topology(fit_linear(consecutive_pairs(runs), o.lambda).A_hat, threshold);
            weight = "A";
        }
    }

    if (o.out.empty())
        write_dot(graph, labels, std::cout, weight);
    else
        write_dot(graph, labels, o.out, weight);
    if (!o.graph_json.empty()) {
        json j = graph_to_json(graph, labels);
        j["method"] = o.method;
        j["threshold"] = threshold;
        stamp(j, g, "topology");
        write_json(j, o.graph_json);
    }
    std::ostream &log = o.out.empty() ? std::cerr : std::cout;
    log << o.method << ": " << graph.edges.size() << " edges\n";
    if (!o.truth.empty()) {
        std::vector<std::string> truth_labels;
        const DirectedGraph raw = graph_from_json(read_json(o.truth), &truth_labels);
        if (truth_labels.size() != labels.size()) throw Error(o.truth + ": node count differs from the data");
        DirectedGraph truth(static_cast<int>(labels.size()));
        for (const auto &e : raw.edges) {
            auto idx = [&](int k) {
                auto it = std::find(labels.begin(), labels.end(), truth_labels[k]);
                if (it == labels.end()) throw Error(o.truth + ": node '" + truth_labels[k] + "' not in the data labels (" + join(labels) + ")");
                return static_cast<int>(it - labels.begin());
            };
            truth.add_edge(idx(e.from), idx(e.to), e.weight);
        }
        const TopologyScore sc = topology_error(graph, truth);
        json j = score_to_json(sc);
        j["method"] = o.method;
        j["threshold"] = threshold;
        stamp(j, g, "topology");
        if (o.score.empty())
            log << j.dump(2) << "\n";
        else
            write_json(j, o.score);
        log << "error " << sc.percent_error << "% (TP " << sc.true_positive << ", FP " << sc.false_positive << ", FN "
            << sc.false_negative << ")\n";
    } else if (!o.score.empty()) {
        throw CLI::RequiredError("--truth");
    }
    return 0;
}

}  // namespace infoflow::cli
