#include "restadv/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "restadv/teams.hpp"

namespace restadv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log sqrt(2*pi)

double log_normal_density(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

// log of HalfNormal(scale) density at x >= 0.
double log_halfnormal_density(double x, double scale) {
    return std::numbers::ln2 - kLogSqrt2Pi - std::log(scale) - 0.5 * (x / scale) * (x / scale);
}

struct GameTerms {
    int home_loc;
    int away_loc;
    double covariate_trend;      // season covariate, zero for neutral sites
    double covariate_intercept;  // HA indicator
    double mnf, mini;
    double bye, bye_pre, bye_post;
};

GameTerms game_terms(const ParameterLayout& layout, int season, int home_team, int away_team,
                     bool neutral_site, const RestIndicators& ind) {
    const int s = layout.season_index(season);
    if (s < 0) throw std::out_of_range("season " + std::to_string(season) + " outside the layout");
    const int hp = layout.team_position(home_team);
    const int ap = layout.team_position(away_team);
    if (hp < 0 || ap < 0) throw std::out_of_range("team not covered by the layout");

    GameTerms t{};
    t.home_loc = layout.theta_location(hp, s);
    t.away_loc = layout.theta_location(ap, s);
    t.covariate_intercept = neutral_site ? 0.0 : 1.0;
    t.covariate_trend = neutral_site ? 0.0 : layout.season_covariate(season);
    t.mnf = ind.mnf;
    t.mini = ind.mini;
    if (layout.variant().bye == ByeStructure::Constant) {
        t.bye = ind.bye;
    } else if (season < kCbaFirstPostSeason) {
        t.bye_pre = ind.bye;
    } else {
        t.bye_post = ind.bye;
    }
    return t;
}

}  // namespace

double outcome_value(const GameRecord& game, Outcome outcome) {
    return outcome == Outcome::PointDifferential ? game.margin() : game.spread_home_margin;
}

double expected_outcome(const ParameterLayout& layout, const ParameterVector& p, int season,
                        int home_team, int away_team, bool neutral_site,
                        const RestIndicators& indicators) {
    const GameTerms t = game_terms(layout, season, home_team, away_team, neutral_site, indicators);
    const int hp = layout.team_position(home_team);
    const int ap = layout.team_position(away_team);
    const int s = layout.season_index(season);
    double mean = p.theta(hp, s) - p.theta(ap, s);
    mean += p.alpha_ha_trend * t.covariate_trend + p.alpha_ha_intercept * t.covariate_intercept;
    mean += p.alpha_mnf * t.mnf + p.alpha_mini * t.mini;
    mean += p.alpha_bye * t.bye + p.alpha_bye_pre * t.bye_pre + p.alpha_bye_post * t.bye_post;
    return mean;
}

double expected_outcome(const ParameterLayout& layout, const ParameterVector& p,
                        const ClassifiedGame& game) {
    return expected_outcome(layout, p, game.game.season, game.game.home_team, game.game.away_team,
                            game.game.neutral_site, game.indicators);
}

Eigen::VectorXd pointwise_loglik(const ParameterLayout& layout, const ParameterVector& p,
                                 const SeasonDataset& dataset) {
    const Outcome outcome = layout.variant().outcome;
    Eigen::VectorXd ll(static_cast<Eigen::Index>(dataset.games.size()));
    if (!(p.sigma_game > 0.0)) {
        ll.setConstant(kNegInf);
        return ll;
    }
    for (std::size_t g = 0; g < dataset.games.size(); ++g) {
        const double y = outcome_value(dataset.games[g].game, outcome);
        const double mean = expected_outcome(layout, p, dataset.games[g]);
        ll[static_cast<Eigen::Index>(g)] = log_normal_density(y, mean, p.sigma_game);
    }
    return ll;
}

double log_likelihood(const ParameterLayout& layout, const ParameterVector& p,
                      const SeasonDataset& dataset) {
    if (!(p.sigma_game > 0.0)) return dataset.games.empty() ? 0.0 : kNegInf;
    if (dataset.games.empty()) return 0.0;
    return pointwise_loglik(layout, p, dataset).sum();
}

double log_prior(const ParameterLayout& layout, const ParameterVector& p, const PriorConfig& priors) {
    if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) return kNegInf;
    if (!(p.sigma_teamstrength > 0.0) || !(p.sigma_game > 0.0)) return kNegInf;

    double lp = 0.0;
    const double sd = p.sigma_teamstrength;
    for (int t = 0; t < layout.n_teams(); ++t) {
        lp += log_normal_density(p.theta(t, 0), 0.0, sd);
        for (int s = 1; s < layout.n_seasons(); ++s) {
            lp += log_normal_density(p.theta(t, s), p.gamma * p.theta(t, s - 1), sd);
        }
    }
    lp += log_halfnormal_density(p.sigma_teamstrength, priors.sigma_halfnormal_sd);
    lp += log_halfnormal_density(p.sigma_game, priors.sigma_halfnormal_sd);
    // gamma ~ Uniform(0,1) contributes 0.

    const double a = priors.alpha_sd;
    lp += log_normal_density(p.alpha_ha_trend, 0.0, a);
    lp += log_normal_density(p.alpha_ha_intercept, 0.0, a);
    lp += log_normal_density(p.alpha_mnf, 0.0, a);
    lp += log_normal_density(p.alpha_mini, 0.0, a);
    if (layout.variant().bye == ByeStructure::Constant) {
        lp += log_normal_density(p.alpha_bye, 0.0, a);
    } else {
        lp += log_normal_density(p.alpha_bye_pre, 0.0, a);
        lp += log_normal_density(p.alpha_bye_post, 0.0, a);
    }
    return lp;
}

double log_posterior(const ParameterLayout& layout, const ParameterVector& p,
                     const SeasonDataset& dataset, const PriorConfig& priors) {
    const double lp = log_prior(layout, p, priors);
    if (lp == kNegInf) return kNegInf;
    return lp + log_likelihood(layout, p, dataset);
}

double log_posterior_unconstrained(const ParameterLayout& layout, const Eigen::VectorXd& z,
                                   const SeasonDataset& dataset, const PriorConfig& priors) {
    const ParameterVector p = from_unconstrained(layout, z);
    const double base = log_posterior(layout, p, dataset, priors);
    if (base == kNegInf) return kNegInf;
    // d gamma / d u = gamma (1 - gamma); d sigma / d log sigma = sigma.
    const double jac = std::log(p.gamma) + std::log1p(-p.gamma) +
                       std::log(p.sigma_teamstrength) + std::log(p.sigma_game);
    return base + jac;
}

Eigen::VectorXd grad_log_posterior(const ParameterLayout& layout, const ParameterVector& p,
                                   const SeasonDataset& dataset, const PriorConfig& priors) {
    if (!(p.gamma > 0.0 && p.gamma < 1.0) || !(p.sigma_teamstrength > 0.0) || !(p.sigma_game > 0.0)) {
        throw std::domain_error("gradient requested on or outside the support boundary");
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.n_parameters());
    const Outcome outcome = layout.variant().outcome;
    const double inv_sg2 = 1.0 / (p.sigma_game * p.sigma_game);

    // Likelihood terms.
    double rss = 0.0;
    for (const auto& cg : dataset.games) {
        const GameTerms t = game_terms(layout, cg.game.season, cg.game.home_team, cg.game.away_team,
                                       cg.game.neutral_site, cg.indicators);
        const double y = outcome_value(cg.game, outcome);
        const double mean = expected_outcome(layout, p, cg);
        const double r = y - mean;
        rss += r * r;
        const double w = r * inv_sg2;
        grad[t.home_loc] += w;
        grad[t.away_loc] -= w;
        grad[layout.ha_trend()] += w * t.covariate_trend;
        grad[layout.ha_intercept()] += w * t.covariate_intercept;
        grad[layout.mnf()] += w * t.mnf;
        grad[layout.mini()] += w * t.mini;
        if (layout.variant().bye == ByeStructure::Constant) {
            grad[layout.bye()] += w * t.bye;
        } else {
            grad[layout.bye_pre()] += w * t.bye_pre;
            grad[layout.bye_post()] += w * t.bye_post;
        }
    }

    // Strength prior: initial season plus AR transitions.
    const double inv_st2 = 1.0 / (p.sigma_teamstrength * p.sigma_teamstrength);
    double sse_theta = 0.0;
    double gamma_score = 0.0;  // d/d gamma of the transition terms
    for (int t = 0; t < layout.n_teams(); ++t) {
        const double init = p.theta(t, 0);
        sse_theta += init * init;
        grad[layout.theta_location(t, 0)] -= init * inv_st2;
        for (int s = 1; s < layout.n_seasons(); ++s) {
            const double resid = p.theta(t, s) - p.gamma * p.theta(t, s - 1);
            sse_theta += resid * resid;
            grad[layout.theta_location(t, s)] -= resid * inv_st2;
            grad[layout.theta_location(t, s - 1)] += p.gamma * resid * inv_st2;
            gamma_score += p.theta(t, s - 1) * resid * inv_st2;
        }
    }

    // Alpha priors.
    const double inv_a2 = 1.0 / (priors.alpha_sd * priors.alpha_sd);
    grad[layout.ha_trend()] -= p.alpha_ha_trend * inv_a2;
    grad[layout.ha_intercept()] -= p.alpha_ha_intercept * inv_a2;
    grad[layout.mnf()] -= p.alpha_mnf * inv_a2;
    grad[layout.mini()] -= p.alpha_mini * inv_a2;
    if (layout.variant().bye == ByeStructure::Constant) {
        grad[layout.bye()] -= p.alpha_bye * inv_a2;
    } else {
        grad[layout.bye_pre()] -= p.alpha_bye_pre * inv_a2;
        grad[layout.bye_post()] -= p.alpha_bye_post * inv_a2;
    }

    // gamma on the logit scale: chain rule plus the log-Jacobian derivative.
    grad[layout.gamma_index()] =
        gamma_score * p.gamma * (1.0 - p.gamma) + (1.0 - 2.0 * p.gamma);

    // log sigma_teamstrength: n_terms Gaussian terms, half-normal prior, Jacobian.
    const int n_theta_terms = layout.n_teams() * layout.n_seasons();
    const double hn2 = priors.sigma_halfnormal_sd * priors.sigma_halfnormal_sd;
    grad[layout.sigma_teamstrength_index()] =
        -n_theta_terms + sse_theta * inv_st2 -
        p.sigma_teamstrength * p.sigma_teamstrength / hn2 + 1.0;

    // log sigma_game.
    const double n_games = static_cast<double>(dataset.games.size());
    grad[layout.sigma_game_index()] =
        -n_games + rss * inv_sg2 - p.sigma_game * p.sigma_game / hn2 + 1.0;

    return grad;
}

DesignMatrix build_design(const ParameterLayout& layout, const SeasonDataset& dataset) {
    DesignMatrix d;
    const Eigen::Index n = static_cast<Eigen::Index>(dataset.games.size());
    d.X.resize(n, layout.n_locations());
    d.y.resize(n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * 7);
    const Outcome outcome = layout.variant().outcome;
    for (Eigen::Index g = 0; g < n; ++g) {
        const auto& cg = dataset.games[static_cast<std::size_t>(g)];
        const GameTerms t = game_terms(layout, cg.game.season, cg.game.home_team, cg.game.away_team,
                                       cg.game.neutral_site, cg.indicators);
        d.y[g] = outcome_value(cg.game, outcome);
        triplets.emplace_back(g, t.home_loc, 1.0);
        triplets.emplace_back(g, t.away_loc, -1.0);
        if (t.covariate_trend != 0.0) triplets.emplace_back(g, layout.ha_trend(), t.covariate_trend);
        if (t.covariate_intercept != 0.0) {
            triplets.emplace_back(g, layout.ha_intercept(), t.covariate_intercept);
        }
        if (t.mnf != 0.0) triplets.emplace_back(g, layout.mnf(), t.mnf);
        if (t.mini != 0.0) triplets.emplace_back(g, layout.mini(), t.mini);
        if (layout.variant().bye == ByeStructure::Constant) {
            if (t.bye != 0.0) triplets.emplace_back(g, layout.bye(), t.bye);
        } else {
            if (t.bye_pre != 0.0) triplets.emplace_back(g, layout.bye_pre(), t.bye_pre);
            if (t.bye_post != 0.0) triplets.emplace_back(g, layout.bye_post(), t.bye_post);
        }
    }
    d.X.setFromTriplets(triplets.begin(), triplets.end());
    d.X.makeCompressed();
    return d;
}

Eigen::SparseMatrix<double> location_prior_precision(const ParameterLayout& layout, double gamma,
                                                     double sigma_teamstrength, double alpha_sd) {
    const int n = layout.n_locations();
    const double inv_st2 = 1.0 / (sigma_teamstrength * sigma_teamstrength);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(layout.n_theta()) * 3 + 8);
    const int S = layout.n_seasons();
    for (int t = 0; t < layout.n_teams(); ++t) {
        for (int s = 0; s < S; ++s) {
            double diag = inv_st2;  // own Gaussian term (initial or transition)
            if (s + 1 < S) diag += gamma * gamma * inv_st2;
            triplets.emplace_back(layout.theta_location(t, s), layout.theta_location(t, s), diag);
            if (s + 1 < S) {
                const double off = -gamma * inv_st2;
                triplets.emplace_back(layout.theta_location(t, s), layout.theta_location(t, s + 1), off);
                triplets.emplace_back(layout.theta_location(t, s + 1), layout.theta_location(t, s), off);
            }
        }
    }
    const double inv_a2 = 1.0 / (alpha_sd * alpha_sd);
    for (int i = layout.n_theta(); i < n; ++i) {
        triplets.emplace_back(i, i, inv_a2);
    }
    Eigen::SparseMatrix<double> P(n, n);
    P.setFromTriplets(triplets.begin(), triplets.end());
    P.makeCompressed();
    return P;
}

}  // namespace restadv
