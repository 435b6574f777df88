#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

namespace {

using namespace restadv;
using namespace restadv::cli;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// Applies a flat key=value configuration file by splicing "--key=value"
// arguments in right after the subcommand, so explicit flags (parsed last,
// take-last policy) override the file.
std::vector<std::string> effective_args(int argc, char** argv) {
    std::vector<std::string> raw(argv + 1, argv + argc);
    std::string config_path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == "--config") {
            if (i + 1 >= raw.size()) throw ConfigError("--config needs a file path");
            config_path = raw[++i];
        } else if (raw[i].rfind("--config=", 0) == 0) {
            config_path = raw[i].substr(9);
        } else {
            rest.push_back(raw[i]);
        }
    }
    if (config_path.empty()) return rest;
    if (rest.empty()) throw ConfigError("--config requires a subcommand");
    if (!std::filesystem::exists(config_path)) {
        throw ConfigError("config file not found: " + config_path);
    }

    std::vector<std::string> args{rest.front()};
    std::ifstream in(config_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(config_path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(config_path + ":" + std::to_string(lineno) + ": empty key");
        }
        args.push_back("--" + key + "=" + value);
    }
    args.insert(args.end(), rest.begin() + 1, rest.end());
    return args;
}

void add_common(CLI::App* cmd, CommonOptions& common, bool needs_games) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    auto* games = cmd->add_option("--games", common.games, "games CSV");
    if (needs_games) games->required();
    cmd->add_option("--drops", common.drops, "drop-list CSV");
    cmd->add_option("--out", common.out, "output directory");
    // Consumed before parsing; registered so it shows up in --help.
    cmd->add_option("--config", "flat key=value configuration file, overridden by explicit flags");
}

void add_chain(CLI::App* cmd, ChainConfig& chain) {
    cmd->add_option("--chains", chain.n_chains, "number of chains");
    cmd->add_option("--iterations", chain.n_iterations, "iterations per chain");
    cmd->add_option("--burnin", chain.n_burnin, "burn-in iterations discarded per chain");
    cmd->add_option("--seed", chain.seed, "RNG seed");
    cmd->add_option("--algorithm", [&chain](const std::vector<std::string>& vals) {
        if (vals.back() == "gibbs") {
            chain.algorithm = Algorithm::BlockedGibbs;
        } else if (vals.back() == "hmc") {
            chain.algorithm = Algorithm::Hmc;
        } else {
            return false;
        }
        return true;
    }, "sampling engine: gibbs (default) or hmc");
    cmd->add_option("--slice-width", chain.slice_width, "slice width for sigma updates");
    cmd->add_option("--hmc-step-size", chain.hmc_step_size, "HMC leapfrog step size");
    cmd->add_option("--hmc-leapfrog", chain.hmc_leapfrog_steps, "HMC leapfrog steps");
    cmd->add_flag("--hmc-no-adapt", [&chain](std::int64_t) { chain.hmc_adapt = false; },
                  "disable step-size adaptation");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian state-space analysis of NFL rest advantages"};
    app.require_subcommand(1);

    CommonOptions common;
    FitOptions fit;
    ReportOptions report;
    CompareOptions compare;
    SimulateOptions sim;
    DiagnoseOptions diag;

    auto* c_ingest = app.add_subcommand("ingest", "load, classify, and summarize a games file");
    add_common(c_ingest, common, true);

    auto* c_fit = app.add_subcommand("fit", "sample the posterior of one model");
    add_common(c_fit, common, true);
    c_fit->add_option("--model", fit.model, "model number 1-4")->check(CLI::Range(1, 4));
    add_chain(c_fit, fit.chain);
    c_fit->add_option("--draws-format", fit.draws_format, "csv, bin, or both")
        ->check(CLI::IsMember({"csv", "bin", "both"}));
    c_fit->add_flag("--no-gate", [&fit](std::int64_t) { fit.enforce_gates = false; },
                    "do not fail on convergence gates");
    c_fit->add_flag("--diagnose-all", [&fit](std::int64_t) { fit.diagnose_all = true; },
                    "convergence report over every parameter");
    c_fit->add_option("--rhat-max", fit.rhat_max, "split R-hat gate");
    c_fit->add_option("--ess-min", fit.ess_min, "effective sample size gate");

    auto* c_diag = app.add_subcommand("diagnose", "convergence report for a stored fit");
    add_common(c_diag, common, false);
    c_diag->add_option("--draws", diag.draws_file, "draws file (csv or bin)")->required();
    c_diag->add_option("--params", diag.params, "parameters to diagnose")->delimiter(',');
    c_diag->add_option("--trace", diag.trace, "parameters to trace-export")->delimiter(',');
    c_diag->add_flag("--gate", [&diag](std::int64_t) { diag.enforce_gates = true; },
                     "exit nonzero when gates fail");
    c_diag->add_option("--rhat-max", diag.rhat_max, "split R-hat gate");
    c_diag->add_option("--ess-min", diag.ess_min, "effective sample size gate");

    auto* c_compare = app.add_subcommand("compare", "PSIS-LOO comparison of two stored fits");
    add_common(c_compare, common, true);
    c_compare->add_option("--fit-a", compare.fit_a, "draws file of model A")->required();
    c_compare->add_option("--fit-b", compare.fit_b, "draws file of model B")->required();
    c_compare->add_option("--model-a", compare.model_a, "override model number of fit A");
    c_compare->add_option("--model-b", compare.model_b, "override model number of fit B");

    auto* c_report = app.add_subcommand("report", "posterior summaries and figure exports");
    add_common(c_report, common, false);
    c_report->add_option("--draws", report.draws_file, "draws file (csv or bin)")->required();
    c_report->add_option("--params", report.params, "parameters to summarize")->delimiter(',');
    c_report->add_option("--ha-seasons", report.ha_seasons, "seasons for home-advantage summaries")
        ->delimiter(',');
    c_report->add_option("--teams", report.team_paths, "teams for strength-path export")
        ->delimiter(',');

    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic dataset with known truth");
    add_common(c_sim, common, false);
    c_sim->add_option("--model", sim.model, "model number 1-4")->check(CLI::Range(1, 4));
    c_sim->add_option("--seed", sim.seed, "RNG seed");
    c_sim->add_option("--teams", sim.schedule.n_teams, "teams in the synthetic league");
    c_sim->add_option("--seasons", sim.schedule.n_seasons, "seasons to simulate");
    c_sim->add_option("--first-season", sim.schedule.first_season, "first season year");
    c_sim->add_option("--weeks", sim.schedule.weeks_per_season, "weeks per season");
    c_sim->add_flag("--no-byes", [&sim](std::int64_t) { sim.schedule.bye_weeks = false; },
                    "schedule without bye weeks");
    c_sim->add_option("--thursday-rate", sim.schedule.thursday_rate, "Thursday games per week");
    c_sim->add_option("--monday-rate", sim.schedule.monday_rate, "Monday games per week");
    c_sim->add_option("--neutral-prob", sim.schedule.neutral_prob, "neutral-site probability");
    c_sim->add_option("--moneyline-prob", sim.schedule.moneyline_prob, "moneyline coverage");
    c_sim->add_option("--true-gamma", sim.true_gamma, "autoregressive coefficient");
    c_sim->add_option("--true-sigma-teamstrength", sim.true_sigma_teamstrength, "strength innovation sd");
    c_sim->add_option("--true-sigma-game", sim.true_sigma_game, "outcome noise sd");
    c_sim->add_option("--true-ha-trend", sim.true_ha_trend, "home-advantage trend");
    c_sim->add_option("--true-ha-intercept", sim.true_ha_intercept, "home-advantage intercept");
    c_sim->add_option("--true-mnf", sim.true_mnf, "MNF effect");
    c_sim->add_option("--true-mini", sim.true_mini, "mini-bye effect");
    c_sim->add_option("--true-bye", sim.true_bye, "bye effect (constant models)");
    c_sim->add_option("--true-bye-pre", sim.true_bye_pre, "bye effect before 2011");
    c_sim->add_option("--true-bye-post", sim.true_bye_post, "bye effect from 2011 on");

    try {
        std::vector<std::string> args = effective_args(argc, argv);
        std::reverse(args.begin(), args.end());  // parse(vector) wants reversed args
        app.parse(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return 2;
    }

    for (const CLI::App* sub : app.get_subcommands()) {
        common.resolved_config = sub->config_to_str(true, false);
    }

    try {
        if (c_ingest->parsed()) return cmd_ingest(common);
        if (c_fit->parsed()) return cmd_fit(common, fit);
        if (c_diag->parsed()) return cmd_diagnose(common, diag);
        if (c_compare->parsed()) return cmd_compare(common, compare);
        if (c_report->parsed()) return cmd_report(common, report);
        if (c_sim->parsed()) return cmd_simulate(common, sim);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
