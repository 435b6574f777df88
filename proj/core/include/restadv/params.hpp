#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "restadv/schedule.hpp"

namespace restadv {

enum class Outcome { PointDifferential, PointSpread };
enum class ByeStructure { Constant, Split2011 };

// First season governed by the 2011 collective bargaining agreement, which
// is the cut point for the split bye effect.
inline constexpr int kCbaFirstPostSeason = 2011;

struct ModelVariant {
    Outcome outcome = Outcome::PointDifferential;
    ByeStructure bye = ByeStructure::Constant;

    // 1 = differential/constant, 2 = differential/split,
    // 3 = spread/constant,       4 = spread/split.
    int model_number() const;
    static ModelVariant from_model_number(int n);
    std::string label() const;

    bool operator==(const ModelVariant&) const = default;
};

struct PriorConfig {
    double alpha_sd = 5.0;             // N(0, sd^2) on every fixed effect
    double sigma_halfnormal_sd = 5.0;  // HalfNormal scale for both sigmas
};

// Maps (team, season) strengths and the fixed effects onto a flat location
// vector: theta's first (team-major so each team's seasons are contiguous),
// then the alphas. The three non-Gaussian parameters (gamma and the two
// sigmas) are appended after the locations in full parameter vectors.
class ParameterLayout {
public:
    ParameterLayout(std::vector<int> franchise_ids, int first_season, int n_seasons,
                    ModelVariant variant);

    // Layout spanning the teams and seasons present in a dataset.
    static ParameterLayout for_dataset(const SeasonDataset& dataset, ModelVariant variant);

    const std::vector<int>& franchise_ids() const { return franchise_ids_; }
    int n_teams() const { return static_cast<int>(franchise_ids_.size()); }
    int first_season() const { return first_season_; }
    int n_seasons() const { return n_seasons_; }
    int last_season() const { return first_season_ + n_seasons_ - 1; }
    ModelVariant variant() const { return variant_; }

    // Local team position for a franchise id, or -1.
    int team_position(int franchise_id) const;
    int season_index(int season) const;

    int theta_location(int team_pos, int season_idx) const {
        return team_pos * n_seasons_ + season_idx;
    }

    int ha_trend() const { return n_theta(); }
    int ha_intercept() const { return n_theta() + 1; }
    int mnf() const { return n_theta() + 2; }
    int mini() const { return n_theta() + 3; }
    int bye() const { return variant_.bye == ByeStructure::Constant ? n_theta() + 4 : -1; }
    int bye_pre() const { return variant_.bye == ByeStructure::Split2011 ? n_theta() + 4 : -1; }
    int bye_post() const { return variant_.bye == ByeStructure::Split2011 ? n_theta() + 5 : -1; }

    int n_theta() const { return n_teams() * n_seasons_; }
    int n_alphas() const { return variant_.bye == ByeStructure::Constant ? 5 : 6; }
    int n_locations() const { return n_theta() + n_alphas(); }
    int n_parameters() const { return n_locations() + 3; }

    int gamma_index() const { return n_locations(); }
    int sigma_teamstrength_index() const { return n_locations() + 1; }
    int sigma_game_index() const { return n_locations() + 2; }

    // Season covariate for the home-advantage trend, centered at the
    // midpoint of the modeled span so trend and intercept decorrelate.
    double season_covariate(int season) const {
        return season - 0.5 * (first_season_ + last_season());
    }

    std::vector<std::string> parameter_names() const;
    std::string location_name(int location) const;

private:
    std::vector<int> franchise_ids_;
    std::vector<int> position_;  // franchise id -> local position or -1
    int first_season_;
    int n_seasons_;
    ModelVariant variant_;
};

struct ParameterVector {
    Eigen::MatrixXd theta;  // n_teams x n_seasons, points above league average
    double gamma = 0.5;
    double sigma_teamstrength = 1.0;
    double sigma_game = 1.0;
    double alpha_ha_trend = 0.0;
    double alpha_ha_intercept = 0.0;
    double alpha_mnf = 0.0;
    double alpha_mini = 0.0;
    double alpha_bye = 0.0;       // Constant structure
    double alpha_bye_pre = 0.0;   // Split structure
    double alpha_bye_post = 0.0;

    static ParameterVector zeros(const ParameterLayout& layout);
};

// Ground truth for simulation studies; theta holds the realized paths.
using TrueParams = ParameterVector;

// Location subvector (thetas then alphas) in layout order.
Eigen::VectorXd pack_locations(const ParameterLayout& layout, const ParameterVector& p);
void unpack_locations(const ParameterLayout& layout, const Eigen::VectorXd& loc, ParameterVector& p);

// Full vector: locations, then gamma, sigma_teamstrength, sigma_game.
Eigen::VectorXd pack_parameters(const ParameterLayout& layout, const ParameterVector& p);
ParameterVector unpack_parameters(const ParameterLayout& layout, const Eigen::VectorXd& v);

// Unconstrained coordinates: locations raw, logit(gamma), log sigmas.
Eigen::VectorXd to_unconstrained(const ParameterLayout& layout, const ParameterVector& p);
ParameterVector from_unconstrained(const ParameterLayout& layout, const Eigen::VectorXd& z);

// Single-row named-column CSV (header + one value row).
void write_params_csv(const ParameterLayout& layout, const ParameterVector& p,
                      const std::filesystem::path& path);

}  // namespace restadv
