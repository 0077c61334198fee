#include "infoflow/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace infoflow {

namespace {

std::string trim(const std::string &s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_number(const std::string &f, const std::string &where)
{
    double v = 0;
    const char *b = f.data(), *e = f.data() + f.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw Error(where + ": not a number: '" + f + "'");
    return v;
}

std::ofstream open_out(const std::string &path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << std::setprecision(17);
    return out;
}

std::string label_of(const std::vector<std::string> &labels, int i)
{
    return i < static_cast<int>(labels.size()) ? labels[i] : "z" + std::to_string(i + 1);
}

int label_lookup(const std::vector<std::string> &labels, const std::string &name)
{
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == name) return static_cast<int>(i);
    throw Error("unknown node '" + name + "'");
}

}  // namespace

TimeSeries parse_csv(std::istream &in, const std::string &source)
{
    TimeSeries ts;
    std::string line;
    int lineno = 0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        const std::string where = source + ":" + std::to_string(lineno);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto pos = t.find("dt=");
            if (pos != std::string::npos) ts.dt = parse_number(trim(t.substr(pos + 3)), where);
            continue;
        }
        auto fields = split_fields(t);
        if (!have_header) {
            ts.labels = fields;
            for (const auto &f : fields)
                if (f.empty()) throw Error(where + ": empty column label");
            have_header = true;
            continue;
        }
        if (fields.size() != ts.labels.size())
            throw Error(where + ": expected " + std::to_string(ts.labels.size()) + " fields, got " +
                        std::to_string(fields.size()));
        std::vector<double> row;
        for (const auto &f : fields) row.push_back(parse_number(f, where));
        rows.push_back(std::move(row));
    }
    if (!have_header) throw Error(source + ": missing header line");
    ts.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ts.labels.size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) ts.data(r, c) = rows[r][c];
    ts.validate();
    return ts;
}

TimeSeries read_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_csv(in, path);
}

void write_csv(const TimeSeries &ts, std::ostream &out)
{
    const auto labels = ts.labels.empty() ? default_labels(ts.dims()) : ts.labels;
    out << std::setprecision(17);
    if (ts.dt) out << "# dt=" << *ts.dt << "\n";
    for (int c = 0; c < ts.dims(); ++c) out << (c ? "," : "") << labels[c];
    out << "\n";
    for (int r = 0; r < ts.steps(); ++r) {
        for (int c = 0; c < ts.dims(); ++c) out << (c ? "," : "") << ts.data(r, c);
        out << "\n";
    }
}

void write_csv(const TimeSeries &ts, const std::string &path)
{
    auto out = open_out(path);
    write_csv(ts, out);
}

std::vector<TimeSeries> read_runs_csv(const std::string &path)
{
    const TimeSeries raw = read_csv(path);
    if (raw.labels.empty() || raw.labels[0] != "run") return {raw};
    if (raw.dims() < 2) throw Error(path + ": no state columns after 'run'");
    std::vector<std::string> labels(raw.labels.begin() + 1, raw.labels.end());
    std::vector<TimeSeries> runs;
    std::vector<double> seen;
    int start = 0;
    for (int r = 1; r <= raw.steps(); ++r) {
        if (r < raw.steps() && raw.data(r, 0) == raw.data(start, 0)) continue;
        const double id = raw.data(start, 0);
        if (std::find(seen.begin(), seen.end(), id) != seen.end())
            throw Error(path + ": rows of run " + std::to_string(id) + " are not contiguous");
        seen.push_back(id);
        TimeSeries ts = make_series(raw.data.block(start, 1, r - start, raw.dims() - 1), labels);
        ts.dt = raw.dt;
        runs.push_back(std::move(ts));
        start = r;
    }
    if (runs.empty()) throw Error(path + ": no data rows");
    return runs;
}

void write_runs_csv(std::span<const TimeSeries> runs, const std::string &path)
{
    if (runs.empty()) throw Error("no runs to write");
    if (runs.size() == 1) return write_csv(runs[0], path);
    auto out = open_out(path);
    const auto labels = runs[0].labels.empty() ? default_labels(runs[0].dims()) : runs[0].labels;
    if (runs[0].dt) out << "# dt=" << *runs[0].dt << "\n";
    out << "run";
    for (const auto &l : labels) out << "," << l;
    out << "\n";
    for (size_t k = 0; k < runs.size(); ++k) {
        if (runs[k].dims() != static_cast<int>(labels.size())) throw Error("runs differ in dimension");
        for (int r = 0; r < runs[k].steps(); ++r) {
            out << k;
            for (int c = 0; c < runs[k].dims(); ++c) out << "," << runs[k].data(r, c);
            out << "\n";
        }
    }
}

PairedDataset read_paired_csv(const std::string &path, std::vector<std::string> *labels)
{
    const TimeSeries raw = read_csv(path);
    if (raw.dims() % 2 != 0) throw Error(path + ": paired CSV needs an even number of columns");
    const int n = raw.dims() / 2;
    std::vector<std::string> names;
    for (int c = 0; c < n; ++c) {
        const std::string &a = raw.labels[c], &b = raw.labels[c + n];
        if (a.size() < 4 || a.substr(a.size() - 3) != "_in" || b != a.substr(0, a.size() - 3) + "_out")
            throw Error(path + ": paired columns must be <label>_in ... <label>_out");
        names.push_back(a.substr(0, a.size() - 3));
    }
    if (labels) *labels = names;
    PairedDataset p{raw.data.leftCols(n), raw.data.rightCols(n), {}};
    p.validate();
    return p;
}

void write_paired_csv(const PairedDataset &pairs, const std::vector<std::string> &labels, const std::string &path)
{
    auto out = open_out(path);
    const int n = pairs.dims();
    for (int c = 0; c < n; ++c) out << (c ? "," : "") << label_of(labels, c) << "_in";
    for (int c = 0; c < n; ++c) out << "," << label_of(labels, c) << "_out";
    out << "\n";
    for (int r = 0; r < pairs.pairs(); ++r) {
        for (int c = 0; c < n; ++c) out << (c ? "," : "") << pairs.inputs(r, c);
        for (int c = 0; c < n; ++c) out << "," << pairs.targets(r, c);
        out << "\n";
    }
}

void write_matrix_csv(const Mat &m, const std::vector<std::string> &row_names,
                      const std::vector<std::string> &col_names, const std::string &path)
{
    auto out = open_out(path);
    const bool rh = !row_names.empty();
    if (!col_names.empty()) {
        if (rh) out << "\"\"";
        for (int c = 0; c < m.cols(); ++c) out << (c || rh ? "," : "") << '"' << col_names[c] << '"';
        out << "\n";
    }
    for (int r = 0; r < m.rows(); ++r) {
        if (rh) out << '"' << row_names[r] << '"';
        for (int c = 0; c < m.cols(); ++c) out << (c || rh ? "," : "") << m(r, c);
        out << "\n";
    }
}

void write_dot(const DirectedGraph &g, const std::vector<std::string> &labels, std::ostream &out,
               const std::string &weight_name)
{
    out << "digraph G {\n";
    for (int i = 0; i < g.n; ++i) out << "  \"" << label_of(labels, i) << "\";\n";
    DirectedGraph s = g;
    s.sort_edges();
    for (const auto &e : s.edges) {
        std::ostringstream w;
        w << std::setprecision(4) << e.weight;
        out << "  \"" << label_of(labels, e.from) << "\" -> \"" << label_of(labels, e.to) << "\" [label=\""
            << weight_name << "=" << w.str() << "\"];\n";
    }
    out << "}\n";
}

void write_dot(const DirectedGraph &g, const std::vector<std::string> &labels, const std::string &path,
               const std::string &weight_name)
{
    auto out = open_out(path);
    write_dot(g, labels, out, weight_name);
}

json graph_to_json(const DirectedGraph &g, const std::vector<std::string> &labels)
{
    json j;
    j["nodes"] = json::array();
    for (int i = 0; i < g.n; ++i) j["nodes"].push_back(label_of(labels, i));
    j["edges"] = json::array();
    DirectedGraph s = g;
    s.sort_edges();
    for (const auto &e : s.edges)
        j["edges"].push_back({{"from", label_of(labels, e.from)}, {"to", label_of(labels, e.to)}, {"weight", e.weight}});
    return j;
}

DirectedGraph graph_from_json(const json &j, std::vector<std::string> *labels)
{
    if (!j.contains("nodes") || !j.contains("edges")) throw Error("graph JSON needs 'nodes' and 'edges'");
    std::vector<std::string> names = j.at("nodes").get<std::vector<std::string>>();
    DirectedGraph g(static_cast<int>(names.size()));
    for (const auto &e : j.at("edges"))
        g.add_edge(label_lookup(names, e.at("from").get<std::string>()),
                   label_lookup(names, e.at("to").get<std::string>()), e.value("weight", 1.0));
    g.sort_edges();
    if (labels) *labels = names;
    return g;
}

json matrix_to_json(const Mat &m)
{
    json j = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

Mat matrix_from_json(const json &j)
{
    if (!j.is_array()) throw Error("matrix JSON must be an array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = rows ? static_cast<int>(j[0].size()) : 0;
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw Error("ragged matrix in JSON");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json operator_to_json(const OperatorApprox &op)
{
    json j;
    j["method"] = method_name(op.method);
    j["dictionary"] = op.dict_id;
    j["lambda"] = op.lambda_reg;
    j["residual"] = op.residual;
    j["iterations"] = op.iterations;
    j["converged"] = op.converged;
    j["K"] = matrix_to_json(op.K);
    if (op.method == Method::nsdmd) {
        const Feasibility f = nsdmd_feasibility(op.K, op.Lambda);
        const auto sp = spectrum(markov_matrix(op.K, op.Lambda), 1);
        j["P"] = matrix_to_json(op.P);
        j["Lambda"] = matrix_to_json(op.Lambda);
        j["markov"] = {{"min_K", f.min_K},
                       {"min_M", f.min_M},
                       {"row_sum_error", f.row_sum_err},
                       {"violation", f.violation()},
                       {"leading_eigenvalue", sp.empty() ? 0.0 : sp[0].value.real()}};
    }
    if (op.dict_id.rfind("linear", 0) == 0) j["A"] = matrix_to_json(system_matrix(op));
    return j;
}

OperatorApprox operator_from_json(const json &j)
{
    OperatorApprox op;
    op.method = parse_method(j.at("method").get<std::string>());
    op.dict_id = j.value("dictionary", "");
    op.lambda_reg = j.value("lambda", 0.0);
    op.residual = j.value("residual", 0.0);
    op.iterations = j.value("iterations", 0);
    op.converged = j.value("converged", true);
    op.K = matrix_from_json(j.at("K"));
    if (j.contains("P")) op.P = matrix_from_json(j.at("P"));
    if (j.contains("Lambda")) op.Lambda = matrix_from_json(j.at("Lambda"));
    return op;
}

namespace {

std::string subspace_name(const IndexSet &idx, const std::vector<std::string> &labels)
{
    std::string s;
    for (int i : idx) s += (s.empty() ? "" : "+") + label_of(labels, i);
    return s;
}

IndexSet subspace_from_name(const std::string &name, const std::vector<std::string> &labels)
{
    IndexSet idx;
    std::stringstream ss(name);
    std::string part;
    while (std::getline(ss, part, '+')) idx.push_back(label_lookup(labels, part));
    return normalized(idx, static_cast<int>(labels.size()));
}

}  // namespace

json transfer_to_json(const TransferResult &tr)
{
    json j;
    j["pairs"] = json::array();
    std::vector<PairTransfer> sorted = tr.pairs;
    std::sort(sorted.begin(), sorted.end(), [](const PairTransfer &a, const PairTransfer &b) {
        return std::tie(a.from, a.to) < std::tie(b.from, b.to);
    });
    for (const auto &p : sorted)
        j["pairs"].push_back({{"from", subspace_name(p.from, tr.labels)},
                              {"to", subspace_name(p.to, tr.labels)},
                              {"T", p.T},
                              {"H", p.H},
                              {"H_frozen", p.H_frozen}});
    j["labels"] = tr.labels;
    j["t"] = tr.t;
    j["mode"] = tr.mode;
    j["sigma"] = tr.sigma;
    j["units"] = "nats";
    if (!tr.warnings.empty()) j["warnings"] = tr.warnings;
    return j;
}

TransferResult transfer_from_json(const json &j)
{
    TransferResult tr;
    tr.labels = j.at("labels").get<std::vector<std::string>>();
    tr.t = j.value("t", "steady_state");
    tr.mode = j.value("mode", "linear");
    tr.sigma = j.value("sigma", 0.0);
    for (const auto &p : j.at("pairs")) {
        PairTransfer pt;
        pt.from = subspace_from_name(p.at("from").get<std::string>(), tr.labels);
        pt.to = subspace_from_name(p.at("to").get<std::string>(), tr.labels);
        pt.T = p.at("T").get<double>();
        pt.H = p.value("H", 0.0);
        pt.H_frozen = p.value("H_frozen", 0.0);
        tr.pairs.push_back(pt);
    }
    return tr;
}

json score_to_json(const TopologyScore &s)
{
    return {{"true_positive", s.true_positive},
            {"false_positive", s.false_positive},
            {"false_negative", s.false_negative},
            {"percent_error", s.percent_error}};
}

DictSpec dict_spec_from_json(const json &j)
{
    if (j.is_string()) return parse_dict_spec(j.get<std::string>());
    if (!j.is_object()) throw Error("dictionary spec must be a string or an object");
    DictSpec s;
    const std::string kind = j.value("kind", "linear");
    if (kind == "linear") {
        s.kind = DictKind::linear;
    } else if (kind == "gaussian_rbf" || kind == "rbf") {
        s.kind = DictKind::gaussian_rbf;
        s.count = j.at("count").get<int>();
        s.sigma = j.at("sigma").get<double>();
        s.centers = j.value("centers", s.centers);
        s.seed = j.value("seed", s.seed);
    } else if (kind == "indicator") {
        s.kind = DictKind::indicator;
        s.resolution = j.value("resolution", std::vector<int>{});
    } else {
        throw Error("unknown dictionary kind '" + kind + "'");
    }
    if (s.centers != "kmeans" && s.centers != "grid") throw Error("rbf centers must be 'kmeans' or 'grid'");
    return s;
}

json dict_spec_to_json(const DictSpec &s)
{
    switch (s.kind) {
    case DictKind::linear:
        return {{"kind", "linear"}};
    case DictKind::gaussian_rbf:
        return {{"kind", "gaussian_rbf"}, {"count", s.count}, {"sigma", s.sigma}, {"centers", s.centers}, {"seed", s.seed}};
    case DictKind::indicator:
        return {{"kind", "indicator"}, {"resolution", s.resolution}};
    }
    throw Error("unknown dictionary kind");
}

json read_json(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw Error(path + ": " + e.what());
    }
}

void write_json(const json &j, const std::string &path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace infoflow
