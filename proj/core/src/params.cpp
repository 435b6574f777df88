#include "restadv/params.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "restadv/csv.hpp"
#include "restadv/teams.hpp"

namespace restadv {

int ModelVariant::model_number() const {
    const int base = outcome == Outcome::PointDifferential ? 1 : 3;
    return base + (bye == ByeStructure::Split2011 ? 1 : 0);
}

ModelVariant ModelVariant::from_model_number(int n) {
    switch (n) {
        case 1: return {Outcome::PointDifferential, ByeStructure::Constant};
        case 2: return {Outcome::PointDifferential, ByeStructure::Split2011};
        case 3: return {Outcome::PointSpread, ByeStructure::Constant};
        case 4: return {Outcome::PointSpread, ByeStructure::Split2011};
        default: throw std::invalid_argument("model number must be 1-4, got " + std::to_string(n));
    }
}

std::string ModelVariant::label() const {
    std::string s = bye == ByeStructure::Constant ? "constant bye, " : "pre/post 2011 bye, ";
    s += outcome == Outcome::PointDifferential ? "point differential" : "point spread";
    return s;
}

ParameterLayout::ParameterLayout(std::vector<int> franchise_ids, int first_season, int n_seasons,
                                 ModelVariant variant)
    : franchise_ids_(std::move(franchise_ids)),
      first_season_(first_season),
      n_seasons_(n_seasons),
      variant_(variant) {
    if (franchise_ids_.empty()) throw std::invalid_argument("layout needs at least one team");
    if (n_seasons_ < 1) throw std::invalid_argument("layout needs at least one season");
    std::sort(franchise_ids_.begin(), franchise_ids_.end());
    position_.assign(kTeamCodes.size(), -1);
    for (std::size_t i = 0; i < franchise_ids_.size(); ++i) {
        const int id = franchise_ids_[i];
        if (id < 0 || id >= kNumTeams) throw std::invalid_argument("bad franchise id");
        if (position_[static_cast<std::size_t>(id)] != -1) {
            throw std::invalid_argument("duplicate franchise id in layout");
        }
        position_[static_cast<std::size_t>(id)] = static_cast<int>(i);
    }
}

ParameterLayout ParameterLayout::for_dataset(const SeasonDataset& dataset, ModelVariant variant) {
    std::set<int> teams;
    for (const auto& cg : dataset.games) {
        teams.insert(cg.game.home_team);
        teams.insert(cg.game.away_team);
    }
    if (teams.empty()) throw std::invalid_argument("cannot build a layout from an empty dataset");
    const int first = dataset.first_season();
    const int last = dataset.last_season();
    return ParameterLayout(std::vector<int>(teams.begin(), teams.end()), first, last - first + 1,
                           variant);
}

int ParameterLayout::team_position(int franchise_id) const {
    if (franchise_id < 0 || franchise_id >= static_cast<int>(position_.size())) return -1;
    return position_[static_cast<std::size_t>(franchise_id)];
}

int ParameterLayout::season_index(int season) const {
    const int idx = season - first_season_;
    return (idx >= 0 && idx < n_seasons_) ? idx : -1;
}

std::vector<std::string> ParameterLayout::parameter_names() const {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n_parameters()));
    for (int i = 0; i < n_locations(); ++i) names.push_back(location_name(i));
    names.emplace_back("gamma");
    names.emplace_back("sigma_teamstrength");
    names.emplace_back("sigma_game");
    return names;
}

std::string ParameterLayout::location_name(int location) const {
    if (location < n_theta()) {
        // Colon separator: these names travel through comma-separated files.
        const int team_pos = location / n_seasons_;
        const int season = first_season_ + location % n_seasons_;
        return "theta[" + std::string(team_code(franchise_ids_[static_cast<std::size_t>(team_pos)])) +
               ":" + std::to_string(season) + "]";
    }
    if (location == ha_trend()) return "alpha_ha_trend";
    if (location == ha_intercept()) return "alpha_ha_intercept";
    if (location == mnf()) return "alpha_mnf";
    if (location == mini()) return "alpha_mini";
    if (location == bye()) return "alpha_bye";
    if (location == bye_pre()) return "alpha_bye_pre";
    if (location == bye_post()) return "alpha_bye_post";
    throw std::out_of_range("bad location index");
}

ParameterVector ParameterVector::zeros(const ParameterLayout& layout) {
    ParameterVector p;
    p.theta = Eigen::MatrixXd::Zero(layout.n_teams(), layout.n_seasons());
    p.gamma = 0.5;
    p.sigma_teamstrength = 1.0;
    p.sigma_game = 1.0;
    return p;
}

Eigen::VectorXd pack_locations(const ParameterLayout& layout, const ParameterVector& p) {
    Eigen::VectorXd v(layout.n_locations());
    for (int t = 0; t < layout.n_teams(); ++t) {
        for (int s = 0; s < layout.n_seasons(); ++s) {
            v[layout.theta_location(t, s)] = p.theta(t, s);
        }
    }
    v[layout.ha_trend()] = p.alpha_ha_trend;
    v[layout.ha_intercept()] = p.alpha_ha_intercept;
    v[layout.mnf()] = p.alpha_mnf;
    v[layout.mini()] = p.alpha_mini;
    if (layout.variant().bye == ByeStructure::Constant) {
        v[layout.bye()] = p.alpha_bye;
    } else {
        v[layout.bye_pre()] = p.alpha_bye_pre;
        v[layout.bye_post()] = p.alpha_bye_post;
    }
    return v;
}

void unpack_locations(const ParameterLayout& layout, const Eigen::VectorXd& loc, ParameterVector& p) {
    if (loc.size() != layout.n_locations()) {
        throw std::invalid_argument("location vector length mismatch");
    }
    if (p.theta.rows() != layout.n_teams() || p.theta.cols() != layout.n_seasons()) {
        p.theta.resize(layout.n_teams(), layout.n_seasons());
    }
    for (int t = 0; t < layout.n_teams(); ++t) {
        for (int s = 0; s < layout.n_seasons(); ++s) {
            p.theta(t, s) = loc[layout.theta_location(t, s)];
        }
    }
    p.alpha_ha_trend = loc[layout.ha_trend()];
    p.alpha_ha_intercept = loc[layout.ha_intercept()];
    p.alpha_mnf = loc[layout.mnf()];
    p.alpha_mini = loc[layout.mini()];
    if (layout.variant().bye == ByeStructure::Constant) {
        p.alpha_bye = loc[layout.bye()];
    } else {
        p.alpha_bye_pre = loc[layout.bye_pre()];
        p.alpha_bye_post = loc[layout.bye_post()];
    }
}

Eigen::VectorXd pack_parameters(const ParameterLayout& layout, const ParameterVector& p) {
    Eigen::VectorXd v(layout.n_parameters());
    v.head(layout.n_locations()) = pack_locations(layout, p);
    v[layout.gamma_index()] = p.gamma;
    v[layout.sigma_teamstrength_index()] = p.sigma_teamstrength;
    v[layout.sigma_game_index()] = p.sigma_game;
    return v;
}

ParameterVector unpack_parameters(const ParameterLayout& layout, const Eigen::VectorXd& v) {
    if (v.size() != layout.n_parameters()) {
        throw std::invalid_argument("parameter vector length mismatch");
    }
    ParameterVector p = ParameterVector::zeros(layout);
    unpack_locations(layout, v.head(layout.n_locations()), p);
    p.gamma = v[layout.gamma_index()];
    p.sigma_teamstrength = v[layout.sigma_teamstrength_index()];
    p.sigma_game = v[layout.sigma_game_index()];
    return p;
}

Eigen::VectorXd to_unconstrained(const ParameterLayout& layout, const ParameterVector& p) {
    if (!(p.gamma > 0.0 && p.gamma < 1.0) || !(p.sigma_teamstrength > 0.0) || !(p.sigma_game > 0.0)) {
        throw std::domain_error("parameters on or outside the support boundary");
    }
    Eigen::VectorXd z(layout.n_parameters());
    z.head(layout.n_locations()) = pack_locations(layout, p);
    z[layout.gamma_index()] = std::log(p.gamma) - std::log1p(-p.gamma);
    z[layout.sigma_teamstrength_index()] = std::log(p.sigma_teamstrength);
    z[layout.sigma_game_index()] = std::log(p.sigma_game);
    return z;
}

ParameterVector from_unconstrained(const ParameterLayout& layout, const Eigen::VectorXd& z) {
    if (z.size() != layout.n_parameters()) {
        throw std::invalid_argument("parameter vector length mismatch");
    }
    ParameterVector p = ParameterVector::zeros(layout);
    unpack_locations(layout, z.head(layout.n_locations()), p);
    const double u = z[layout.gamma_index()];
    p.gamma = 1.0 / (1.0 + std::exp(-u));
    p.sigma_teamstrength = std::exp(z[layout.sigma_teamstrength_index()]);
    p.sigma_game = std::exp(z[layout.sigma_game_index()]);
    return p;
}

void write_params_csv(const ParameterLayout& layout, const ParameterVector& p,
                      const std::filesystem::path& path) {
    auto out = open_output(path);
    const auto names = layout.parameter_names();
    const Eigen::VectorXd v = pack_parameters(layout, p);
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i] << (i + 1 < names.size() ? ',' : '\n');
    }
    for (int i = 0; i < v.size(); ++i) {
        out << format_double(v[i]) << (i + 1 < v.size() ? ',' : '\n');
    }
}

}  // namespace restadv
