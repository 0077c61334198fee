#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infoflow/io.hpp"

namespace infoflow::cli {

struct GlobalOptions {
    std::string config;
    bool reproducible = false;
    int threads = 0;
};

struct GenerateOptions {
    std::string system;
    std::string out;
    std::string matrix;               // lti: system matrix CSV
    std::vector<std::string> params;  // name=value
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    double sigma = 0;
    double gamma = 0;
    double z0_scale = 1;
    std::vector<double> z0;
    int runs = 1;
    std::vector<double> init_lo, init_hi;
    int nodes = 20;
    int k_ring = 4;
    double rewire = 0.2;
    double spectral = 0.9;
    std::optional<std::uint64_t> graph_seed;
};

struct FitOptions {
    std::vector<std::string> inputs;
    std::string method = "edmd";
    std::string dict = "linear";
    double lambda = 0;
    std::string out;
    std::string eigen_csv;
    int eigen_count = 3;
    int max_iter = 0;  // 0: solver default
};

struct TransferOptions {
    std::vector<std::string> inputs;
    std::string mode = "linear";
    std::vector<std::string> pairs;  // from:to, subspaces joined with '+'
    std::string dict;                // nonlinear; default rbf:200:0.01
    double lambda = 0;
    std::optional<double> sigma;
    bool steady_state = false;
    int t_steps = 1;
    std::vector<int> resolution;
    std::string matrix;  // analytic linear transfer from a known system matrix
    double threshold = kDefaultTransferThreshold;
    std::string out;
    std::string heatmap;
};

struct TopologyOptions {
    std::vector<std::string> inputs;
    std::string method = "it";
    std::string transfer;
    std::optional<double> threshold;
    std::string truth;
    std::string out;
    std::string graph_json;
    std::string score;
    int p = 1, q = 1, r = 1;
    double alpha = 0.05;
    double lambda = 0;
};

int cmd_generate(const GenerateOptions &o, const GlobalOptions &g);
int cmd_fit(const FitOptions &o, const GlobalOptions &g);
int cmd_transfer(const TransferOptions &o, const GlobalOptions &g);
int cmd_topology(const TopologyOptions &o, const GlobalOptions &g);

// "x+y:z" against the data labels; unknown names list the available labels.
std::pair<IndexSet, IndexSet> parse_pair(const std::string &text, const std::vector<std::string> &labels);

}  // namespace infoflow::cli
