#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "restadv/params.hpp"
#include "restadv/sampler.hpp"
#include "restadv/simulate.hpp"

namespace restadv::cli {

// Configuration or I/O problems exit with code 2; computation failures
// (sampling errors, failed convergence gates, mismatched fits) with 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::filesystem::path games;
    std::filesystem::path drops;   // optional
    std::filesystem::path out = ".";
    std::string resolved_config;   // written next to outputs for provenance
};

struct FitOptions {
    int model = 2;
    ChainConfig chain;
    std::string draws_format = "both";  // csv | bin | both
    bool enforce_gates = true;
    bool diagnose_all = false;
    double rhat_max = 1.01;
    double ess_min = 400.0;
};

struct ReportOptions {
    std::filesystem::path draws_file;
    std::vector<std::string> params;       // empty = headline parameters
    std::vector<int> ha_seasons;           // empty = first and last season
    std::vector<std::string> team_paths;   // team codes for strength paths
};

struct CompareOptions {
    std::filesystem::path fit_a;
    std::filesystem::path fit_b;
    int model_a = 0;  // 0 = take from draws metadata
    int model_b = 0;
};

struct SimulateOptions {
    ScheduleTemplate schedule;
    int model = 2;
    std::uint64_t seed = 0;
    double true_gamma = 0.7;
    double true_sigma_teamstrength = 2.0;
    double true_sigma_game = 13.0;
    double true_ha_trend = -0.05;
    double true_ha_intercept = 2.0;
    double true_mnf = 0.3;
    double true_mini = 0.3;
    double true_bye = 1.0;
    double true_bye_pre = 2.2;
    double true_bye_post = 0.3;
};

struct DiagnoseOptions {
    std::filesystem::path draws_file;
    std::vector<std::string> params;  // empty = headline
    std::vector<std::string> trace;   // parameters to trace-export
    bool enforce_gates = false;
    double rhat_max = 1.01;
    double ess_min = 400.0;
};

int cmd_ingest(const CommonOptions& common);
int cmd_fit(const CommonOptions& common, const FitOptions& fit);
int cmd_diagnose(const CommonOptions& common, const DiagnoseOptions& diag);
int cmd_compare(const CommonOptions& common, const CompareOptions& cmp);
int cmd_report(const CommonOptions& common, const ReportOptions& report);
int cmd_simulate(const CommonOptions& common, const SimulateOptions& sim);

// Headline parameters of a fit: everything that is not a team-strength entry.
std::vector<std::string> headline_parameters(const PosteriorDraws& draws);

// Rebuilds the layout of a stored fit from its parameter names and variant.
ParameterLayout layout_from_draws(const PosteriorDraws& draws);

}  // namespace restadv::cli
