#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "restadv/model.hpp"
#include "restadv/params.hpp"
#include "restadv/rng.hpp"
#include "restadv/schedule.hpp"

namespace restadv {

// Synthetic league on a weekly grid. Games default to Sunday; a few per week
// move to Thursday or Monday (subject to rest-feasibility rules), and each
// team takes one mid-season bye week when enabled. Rest profiles then emerge
// from the kickoff dates exactly as they do for real data, so a generated
// dataset survives a CSV round trip through the regular ingestion path with
// identical indicators.
struct ScheduleTemplate {
    int n_teams = 32;  // even, at most 32
    int first_season = 2002;
    int n_seasons = 4;        // seasons must stay inside [2002, 2023]
    int weeks_per_season = 18;
    bool bye_weeks = true;    // one bye per team, mid-season window
    // Default weekday mix calibrated so the emergent MNF / mini / bye
    // category shares sit within two points of the 2002-2023 marginals.
    double thursday_rate = 1.6;  // Thursday slots attempted per week
    double monday_rate = 1.0;    // Monday slots attempted per week
    double neutral_prob = 0.0115;
    double moneyline_prob = 1.0;  // fraction of games carrying moneylines

    int games_per_team() const { return weeks_per_season - (bye_weeks ? 1 : 0); }
    void validate() const;
};

struct SimulatedData {
    SeasonDataset dataset;  // classified, with outcomes filled
    TrueParams truth;       // realized theta paths and the supplied effects
    ParameterLayout layout;
};

// Simulates team-strength paths from the transition law (initialized from
// truth.gamma / truth.sigma_teamstrength), builds a schedule from the
// template, and fills outcomes: the variant's outcome column gets
// expected_outcome plus N(0, sigma_game^2) noise, the other column gets the
// noise-free expectation. Bit-reproducible for a given seed.
SimulatedData gen_dataset(const TrueParams& truth, ModelVariant variant,
                          const ScheduleTemplate& schedule, std::uint64_t seed);

struct GaussianPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

// Exact conditional posterior of the location block for fixed (gamma,
// sigmas): N((X'X/sg^2 + P)^-1 X'y/sg^2, (X'X/sg^2 + P)^-1), solved densely.
// Intended for oracle checks on small instances; throws above 512 locations
// or when the system is not positive definite.
GaussianPosterior analytic_posterior(const ParameterLayout& layout, const SeasonDataset& dataset,
                                     const PriorConfig& priors, double gamma,
                                     double sigma_teamstrength, double sigma_game);

}  // namespace restadv
