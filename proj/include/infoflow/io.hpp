#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "infoflow/freeze.hpp"
#include "infoflow/inference.hpp"
#include "infoflow/it_linear.hpp"
#include "infoflow/operator.hpp"

namespace infoflow {

using json = nlohmann::json;

// CSV: optional "# dt=<value>" line, a header of labels, then one row per time step.
TimeSeries parse_csv(std::istream &in, const std::string &source = "<input>");
TimeSeries read_csv(const std::string &path);
void write_csv(const TimeSeries &ts, std::ostream &out);
void write_csv(const TimeSeries &ts, const std::string &path);

// Ensembles: a leading "run" column holding the trajectory id; rows of one run are contiguous.
// A file without that column is a single run.
std::vector<TimeSeries> read_runs_csv(const std::string &path);
void write_runs_csv(std::span<const TimeSeries> runs, const std::string &path);

// Paired snapshots: columns <label>_in ... then <label>_out ...
PairedDataset read_paired_csv(const std::string &path, std::vector<std::string> *labels = nullptr);
void write_paired_csv(const PairedDataset &pairs, const std::vector<std::string> &labels, const std::string &path);

// Matrix with optional row/column headers (cell centers, labels).
void write_matrix_csv(const Mat &m, const std::vector<std::string> &row_names,
                      const std::vector<std::string> &col_names, const std::string &path);

void write_dot(const DirectedGraph &g, const std::vector<std::string> &labels, std::ostream &out,
               const std::string &weight_name = "T");
void write_dot(const DirectedGraph &g, const std::vector<std::string> &labels, const std::string &path,
               const std::string &weight_name = "T");

json graph_to_json(const DirectedGraph &g, const std::vector<std::string> &labels);
DirectedGraph graph_from_json(const json &j, std::vector<std::string> *labels = nullptr);

json matrix_to_json(const Mat &m);
Mat matrix_from_json(const json &j);

json operator_to_json(const OperatorApprox &op);
OperatorApprox operator_from_json(const json &j);
json transfer_to_json(const TransferResult &tr);
TransferResult transfer_from_json(const json &j);
json score_to_json(const TopologyScore &s);

// {"kind":"gaussian_rbf","count":200,"sigma":0.01,"centers":"kmeans","seed":7}; a JSON string is
// read as the compact "rbf:200:0.01" form.
DictSpec dict_spec_from_json(const json &j);
json dict_spec_to_json(const DictSpec &s);

json read_json(const std::string &path);
void write_json(const json &j, const std::string &path);

}  // namespace infoflow
