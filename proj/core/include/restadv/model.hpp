#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "restadv/params.hpp"
#include "restadv/schedule.hpp"

namespace restadv {

// Outcome modeled by the layout's variant: home margin for the point
// differential models, the market-expected home margin for the spread ones.
double outcome_value(const GameRecord& game, Outcome outcome);

// Mean outcome:
//   theta[home] - theta[away]
//   + (alpha_ha_trend * t(season) + alpha_ha_intercept) * I(not neutral)
//   + alpha_mnf * I(MNF) + alpha_mini * I(Mini) + bye term,
// where the bye term is alpha_bye * I(Bye) for the constant structure and
// splits at the 2011 season otherwise. Throws on a team or season the layout
// does not cover.
double expected_outcome(const ParameterLayout& layout, const ParameterVector& p, int season,
                        int home_team, int away_team, bool neutral_site,
                        const RestIndicators& indicators);
double expected_outcome(const ParameterLayout& layout, const ParameterVector& p,
                        const ClassifiedGame& game);

// Gaussian observation model with shared sigma_game. -inf if sigma_game <= 0.
double log_likelihood(const ParameterLayout& layout, const ParameterVector& p,
                      const SeasonDataset& dataset);

// Per-game log densities; sums to log_likelihood.
Eigen::VectorXd pointwise_loglik(const ParameterLayout& layout, const ParameterVector& p,
                                 const SeasonDataset& dataset);

// Log prior on the constrained scale: N(0, sigma_ts^2) initial strengths,
// N(gamma*theta_prev, sigma_ts^2) transitions, half-normal sigmas,
// Uniform(0,1) gamma, N(0, alpha_sd^2) fixed effects. -inf outside support.
double log_prior(const ParameterLayout& layout, const ParameterVector& p, const PriorConfig& priors);

double log_posterior(const ParameterLayout& layout, const ParameterVector& p,
                     const SeasonDataset& dataset, const PriorConfig& priors);

// Density in unconstrained coordinates (logit gamma, log sigmas), including
// the change-of-variable terms. This is what the gradient below and the HMC
// engine target.
double log_posterior_unconstrained(const ParameterLayout& layout, const Eigen::VectorXd& z,
                                   const SeasonDataset& dataset, const PriorConfig& priors);

// Exact gradient of log_posterior_unconstrained. Throws std::domain_error if
// the constrained parameters sit on the support boundary.
Eigen::VectorXd grad_log_posterior(const ParameterLayout& layout, const ParameterVector& p,
                                   const SeasonDataset& dataset, const PriorConfig& priors);

// Sparse design of the location block: row g has +1/-1 on the two team
// strengths and the indicator covariates on the alphas.
struct DesignMatrix {
    Eigen::SparseMatrix<double> X;  // n_games x n_locations
    Eigen::VectorXd y;
};
DesignMatrix build_design(const ParameterLayout& layout, const SeasonDataset& dataset);

// Prior precision of the location block given (gamma, sigma_teamstrength):
// per-team tridiagonal season chains plus the diagonal alpha prior.
Eigen::SparseMatrix<double> location_prior_precision(const ParameterLayout& layout, double gamma,
                                                     double sigma_teamstrength, double alpha_sd);

}  // namespace restadv
