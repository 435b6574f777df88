#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restadv/sampler.hpp"

namespace restadv {

// Classic split-chain potential scale reduction: each chain is halved, then
// R-hat = sqrt(((n-1)/n * W + B/n) / W) over the split sequences. Returns
// nullopt (NON_COMPUTABLE) when the within-sequence variance vanishes.
// Requires >= 2 chains with >= 4 draws each.
std::optional<double> split_rhat(const std::vector<Eigen::VectorXd>& chains);

// Effective sample size from the combined autocorrelation sum with Geyer
// initial-monotone truncation, over the same split sequences as split_rhat.
// The correlation time is floored at 1, so ESS <= total retained draws.
std::optional<double> ess(const std::vector<Eigen::VectorXd>& chains);

struct ParamDiagnostic {
    std::string name;
    std::optional<double> rhat;
    std::optional<double> ess;
};

struct ConvergenceReport {
    std::vector<ParamDiagnostic> params;
    long divergences = 0;
    double rhat_threshold = 1.01;
    double ess_threshold = 400.0;

    // True when every parameter is computable and inside both gates.
    bool pass() const;
    const ParamDiagnostic* find(std::string_view name) const;
};

// Diagnostics for the named parameters (all parameters when empty).
ConvergenceReport compute_convergence(const PosteriorDraws& draws,
                                      std::span<const std::string> params = {});

// CSV: param,rhat,ess (blank cells for non-computable values).
void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path);

// Long-format trace CSV (param,chain,iteration,value) for the named
// parameters. Unknown names raise std::invalid_argument listing what exists.
void trace_export(const PosteriorDraws& draws, std::span<const std::string> params,
                  const std::filesystem::path& path);

}  // namespace restadv
