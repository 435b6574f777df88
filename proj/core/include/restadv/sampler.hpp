#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "restadv/model.hpp"
#include "restadv/params.hpp"
#include "restadv/rng.hpp"
#include "restadv/schedule.hpp"

namespace restadv {

enum class Algorithm { BlockedGibbs, Hmc };

std::string_view algorithm_name(Algorithm a);

struct ChainConfig {
    int n_chains = 4;
    int n_iterations = 3000;
    int n_burnin = 1000;
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::BlockedGibbs;

    // Blocked Gibbs: initial slice width for the log-scale sigma updates.
    double slice_width = 1.0;

    // HMC: leapfrog settings; the step size is dual-averaged toward the
    // target acceptance rate during burn-in when adapt is set.
    double hmc_step_size = 0.05;
    int hmc_leapfrog_steps = 24;
    bool hmc_adapt = true;
    double hmc_target_accept = 0.8;
    double hmc_divergence_threshold = 1000.0;

    int n_retained() const { return n_iterations - n_burnin; }
    // Throws std::invalid_argument when the protocol is unusable
    // (burn-in >= iterations, fewer than 2 chains).
    void validate() const;
};

struct PosteriorDraws {
    ChainConfig config;
    ModelVariant variant;
    std::uint64_t dataset_digest = 0;
    std::vector<std::string> names;
    // One matrix per chain, n_retained x n_params, rows in iteration order.
    std::vector<Eigen::MatrixXd> chains;
    long divergences = 0;  // HMC only

    int n_chains() const { return static_cast<int>(chains.size()); }
    int n_retained() const { return chains.empty() ? 0 : static_cast<int>(chains[0].rows()); }
    int n_params() const { return static_cast<int>(names.size()); }
    int param_index(std::string_view name) const;  // -1 when absent
    int require_param(std::string_view name) const;
    // Draws of one parameter pooled across chains, chain-major.
    Eigen::VectorXd pooled(int param) const;
    std::vector<Eigen::VectorXd> per_chain(int param) const;
};

// Starting state: strengths at zero, gamma 0.5, sigmas 3, fixed effects
// drawn from their prior scaled by 0.1.
ParameterVector initialize(const ParameterLayout& layout, const PriorConfig& priors, CounterRng& rng);

// One sweep of the blocked Gibbs kernel:
//   1. joint draw of all location parameters from their exact multivariate
//      normal full conditional (the model is linear-Gaussian given gamma and
//      the sigmas), via a sparse Cholesky of the posterior precision;
//   2. gamma from its truncated-normal full conditional on [0,1];
//   3. each sigma by slice sampling its log-scale full conditional.
class GibbsSampler {
public:
    GibbsSampler(const ParameterLayout& layout, const SeasonDataset& dataset,
                 const PriorConfig& priors, double slice_width = 1.0);

    void sweep(ParameterVector& state, CounterRng& rng);

    // Step 1 alone: redraw the location block at the state's (gamma, sigmas).
    void draw_location_block(ParameterVector& state, CounterRng& rng);

    // Mean of the location full conditional at the state's (gamma, sigmas);
    // exposed so tests can check it against dense normal equations.
    Eigen::VectorXd location_conditional_mean(const ParameterVector& state);

    const ParameterLayout& layout() const { return layout_; }

private:
    void refactorize(const ParameterVector& state);

    ParameterLayout layout_;
    PriorConfig priors_;
    double slice_width_;
    DesignMatrix design_;
    Eigen::SparseMatrix<double> xtx_;
    Eigen::VectorXd xty_;
    Eigen::Index n_games_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
    bool pattern_analyzed_ = false;
};

// Slice sampler with stepping out (Neal 2003) on an unbounded coordinate.
double slice_sample(const std::function<double(double)>& log_density, double x0, double width,
                    CounterRng& rng);

// Target for the generic HMC kernel.
struct HmcTarget {
    std::function<double(const Eigen::VectorXd&)> log_density;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

struct HmcStepResult {
    Eigen::VectorXd state;
    bool accepted = false;
    bool divergent = false;
    double energy_error = 0.0;  // H(end) - H(start)
};

struct PhasePoint {
    Eigen::VectorXd position;
    Eigen::VectorXd momentum;
};

// Leapfrog integration of Hamilton's equations under the target.
PhasePoint leapfrog(const HmcTarget& target, PhasePoint state, double step_size, int n_steps);

// One leapfrog-trajectory Metropolis step with identity mass matrix and
// exact-Hamiltonian acceptance. A trajectory whose energy error exceeds the
// divergence threshold (or turns non-finite) is rejected and flagged.
HmcStepResult hmc_step(const HmcTarget& target, const Eigen::VectorXd& position, double step_size,
                       int n_leapfrog, CounterRng& rng, double divergence_threshold = 1000.0);

// HMC target for a model posterior in unconstrained coordinates.
HmcTarget model_hmc_target(const ParameterLayout& layout, const SeasonDataset& dataset,
                           const PriorConfig& priors);

// Runs the configured number of chains (in parallel, one counter-RNG
// sub-stream per chain) and returns the retained draws. Output is
// bit-identical for identical (seed, config, dataset, variant) regardless of
// threading.
PosteriorDraws run_chains(const ParameterLayout& layout, const SeasonDataset& dataset,
                          const PriorConfig& priors, const ChainConfig& config);
PosteriorDraws run_chains(const SeasonDataset& dataset, ModelVariant variant,
                          const PriorConfig& priors, const ChainConfig& config);

}  // namespace restadv
