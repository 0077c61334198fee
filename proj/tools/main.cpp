#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "infoflow/parallel.hpp"

using namespace infoflow;
using namespace infoflow::cli;

namespace {

struct Cli {
    CLI::App app{"Causal structure from time series via information transfer", "infoflow"};
    GlobalOptions global;
    GenerateOptions gen;
    FitOptions fit;
    TransferOptions tr;
    TopologyOptions topo;
    CLI::App *generate = nullptr, *fit_cmd = nullptr, *transfer = nullptr, *topology = nullptr;

    Cli()
    {
        app.require_subcommand(0, 1);
        app.add_option("--config", global.config, "JSON config (one command or a pipeline); flags win");
        app.add_flag("--reproducible", global.reproducible, "omit the timestamp from JSON outputs");
        app.add_option("--threads", global.threads, "thread cap (default: INFOFLOW_THREADS or all cores)")
            ->check(CLI::NonNegativeNumber);

        generate = app.add_subcommand("generate", "simulate a benchmark system");
        generate->fallthrough();
        generate->add_option("--system", gen.system, "feedback5 | mass_spring | small_world | lti | henon | two_state")
            ->check(CLI::IsMember({"feedback5", "mass_spring", "small_world", "lti", "henon", "two_state"}));
        generate->add_option("--steps", gen.steps, "time steps per run")->check(CLI::PositiveNumber);
        generate->add_option("--seed", gen.seed, "noise / initial-condition seed");
        generate->add_option("--out", gen.out, "output directory");
        generate->add_option("--sigma", gen.sigma, "process noise of linear systems")->check(CLI::NonNegativeNumber);
        generate->add_option("--gamma", gen.gamma, "noise amplitude of maps")->check(CLI::NonNegativeNumber);
        generate->add_option("--z0", gen.z0, "initial state");
        generate->add_option("--z0-scale", gen.z0_scale, "initial state drawn as scale * N(0, I) (linear)");
        generate->add_option("--runs", gen.runs, "independent trajectories")->check(CLI::PositiveNumber);
        generate->add_option("--init-lo", gen.init_lo, "map ensembles: lower corner of the start box");
        generate->add_option("--init-hi", gen.init_hi, "map ensembles: upper corner of the start box");
        generate->add_option("--param", gen.params, "system parameter name=value (henon a,b; mass_spring M,m,k,d,dt)");
        generate->add_option("--matrix", gen.matrix, "lti: system matrix CSV");
        generate->add_option("--nodes", gen.nodes, "small_world: node count")->check(CLI::PositiveNumber);
        generate->add_option("--k-ring", gen.k_ring, "small_world: ring degree")->check(CLI::PositiveNumber);
        generate->add_option("--rewire", gen.rewire, "small_world: rewiring probability")->check(CLI::Range(0.0, 1.0));
        generate->add_option("--spectral", gen.spectral, "small_world: spectral radius of the system matrix");
        generate->add_option("--graph-seed", gen.graph_seed, "small_world: graph and weight seed (default: --seed)");

        fit_cmd = app.add_subcommand("fit", "fit a Koopman / Perron-Frobenius approximation");
        fit_cmd->fallthrough();
        fit_cmd->add_option("input", fit.inputs, "data CSV file(s)");
        fit_cmd->add_option("--method", fit.method, "edmd | robust | nsdmd")
            ->check(CLI::IsMember({"edmd", "robust", "robust_edmd", "nsdmd"}));
        fit_cmd->add_option("--dict", fit.dict, "dictionary, e.g. linear, rbf:200:0.01, indicator:16x16");
        fit_cmd->add_option("--lambda", fit.lambda, "robustness weight")->check(CLI::NonNegativeNumber);
        fit_cmd->add_option("--out", fit.out, "operator JSON");
        fit_cmd->add_option("--eigen-csv", fit.eigen_csv, "leading eigenfunctions on the cell centers");
        fit_cmd->add_option("--eigen-count", fit.eigen_count, "eigenfunctions to export")->check(CLI::PositiveNumber);
        fit_cmd->add_option("--max-iter", fit.max_iter, "nsdmd iteration cap")->check(CLI::NonNegativeNumber);

        transfer = app.add_subcommand("transfer", "information transfer between coordinates");
        transfer->fallthrough();
        transfer->add_option("input", tr.inputs, "data CSV file(s)");
        transfer->add_option("--mode", tr.mode, "linear | nonlinear")->check(CLI::IsMember({"linear", "nonlinear"}));
        transfer->add_option("--pairs", tr.pairs, "from:to pairs (labels; '+' joins a subspace); default all");
        transfer->add_option("--dict", tr.dict, "nonlinear dictionary (default rbf:200:0.01)");
        transfer->add_option("--lambda", tr.lambda, "robustness weight")->check(CLI::NonNegativeNumber);
        transfer->add_option("--sigma", tr.sigma, "noise level (linear; default: residual RMS)")
            ->check(CLI::PositiveNumber);
        transfer->add_flag("--steady-state", tr.steady_state, "linear: stationary covariance instead of t steps");
        transfer->add_option("--t-steps", tr.t_steps, "linear: covariance propagated from I")->check(CLI::PositiveNumber);
        transfer->add_option("--resolution", tr.resolution, "nonlinear partition cells per axis");
        transfer->add_option("--matrix", tr.matrix, "analytic transfer from a system matrix CSV (needs --sigma)");
        transfer->add_option("--threshold", tr.threshold, "recorded with the result for topology")
            ->check(CLI::NonNegativeNumber);
        transfer->add_option("--out", tr.out, "TransferResult JSON");
        transfer->add_option("--heatmap", tr.heatmap, "transfer matrix CSV");

        topology = app.add_subcommand("topology", "reconstruct and score a causal graph");
        topology->fallthrough();
        topology->add_option("input", topo.inputs, "data CSV file(s)");
        topology->add_option("--method", topo.method, "it | granger | dmd")->check(CLI::IsMember({"it", "granger", "dmd"}));
        topology->add_option("--transfer", topo.transfer, "it: TransferResult JSON instead of data");
        topology->add_option("--threshold", topo.threshold, "edge threshold (it: |T|, dmd: |A_ij|)")
            ->check(CLI::NonNegativeNumber);
        topology->add_option("--truth", topo.truth, "ground-truth graph JSON");
        topology->add_option("--out", topo.out, "reconstructed graph DOT");
        topology->add_option("--graph-json", topo.graph_json, "reconstructed graph JSON");
        topology->add_option("--score", topo.score, "TopologyScore JSON (needs --truth)");
        topology->add_option("--p", topo.p, "granger: predictee lags")->check(CLI::PositiveNumber);
        topology->add_option("--q", topo.q, "granger: predictor lags")->check(CLI::PositiveNumber);
        topology->add_option("--r", topo.r, "granger: conditioning lags")->check(CLI::NonNegativeNumber);
        topology->add_option("--alpha", topo.alpha, "granger: significance level")->check(CLI::Range(0.0, 1.0));
        topology->add_option("--lambda", topo.lambda, "dmd: robustness weight of the fit")
            ->check(CLI::NonNegativeNumber);
    }

    CLI::App *selected() const
    {
        const auto subs = app.get_subcommands();
        return subs.empty() ? nullptr : subs.front();
    }

    int dispatch() const
    {
        if (global.threads > 0) set_max_threads(global.threads);
        const CLI::App *s = selected();
        if (s == generate) return cmd_generate(gen, global);
        if (s == fit_cmd) return cmd_fit(fit, global);
        if (s == transfer) return cmd_transfer(tr, global);
        if (s == topology) return cmd_topology(topo, global);
        throw CLI::CallForHelp();
    }
};

std::vector<std::string> strip_config(const std::vector<std::string> &args, const std::string &command)
{
    std::vector<std::string> out;
    bool command_seen = false;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            ++i;
            continue;
        }
        if (args[i].rfind("--config=", 0) == 0) continue;
        if (!command_seen && args[i] == command) {
            command_seen = true;
            continue;
        }
        out.push_back(args[i]);
    }
    return out;
}

int run(const std::vector<std::string> &args)
{
    auto cli = std::make_unique<Cli>();
    try {
        cli->app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError &e) {
        return cli->app.exit(e);
    }
    if (cli->global.config.empty()) {
        try {
            return cli->dispatch();
        } catch (const CLI::ParseError &e) {
            return cli->app.exit(e);
        }
    }

    const std::vector<ConfigStep> steps = config_steps(read_json(cli->global.config));
    const CLI::App *given = cli->selected();
    if (given && steps.size() > 1) throw Error("a pipeline config runs its own commands; drop '" + given->get_name() + "'");
    for (const ConfigStep &step : steps) {
        if (given && given->get_name() != step.command)
            throw Error("config is for '" + step.command + "', not '" + given->get_name() + "'");
        // parse the user arguments inside the step's command to learn which options they set
        std::vector<std::string> user = strip_config(args, step.command);
        std::vector<std::string> first{step.command};
        first.insert(first.end(), user.begin(), user.end());
        auto probe = std::make_unique<Cli>();
        const CLI::App *cmd = nullptr;
        try {
            probe->app.parse(std::vector<std::string>(first.rbegin(), first.rend()));
            cmd = probe->selected();
        } catch (const CLI::ParseError &e) {
            return probe->app.exit(e);
        }
        if (!cmd) throw Error("unknown command '" + step.command + "' in config");
        std::vector<std::string> full = first;
        const auto extra = config_args(probe->app, *cmd, step);
        full.insert(full.end(), extra.begin(), extra.end());

        auto exec = std::make_unique<Cli>();
        try {
            exec->app.parse(std::vector<std::string>(full.rbegin(), full.rend()));
            if (steps.size() > 1) std::fprintf(stderr, "== %s\n", step.command.c_str());
            const int rc = exec->dispatch();
            if (rc != 0) return rc;
        } catch (const CLI::ParseError &e) {
            return exec->app.exit(e);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
