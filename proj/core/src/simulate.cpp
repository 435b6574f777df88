#include "restadv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "restadv/teams.hpp"

namespace restadv {

namespace {

constexpr int kOffsetThursday = -3;
constexpr int kOffsetSunday = 0;
constexpr int kOffsetMonday = 1;

struct TeamState {
    int last_week = 0;
    int last_offset = 0;
    bool played = false;
    int bye_week = 0;  // 0 = none
};

int implied_moneyline(double prob) {
    // American odds for one side at probability `prob` (vig already applied).
    if (prob >= 0.5) {
        const double mag = 100.0 * prob / (1.0 - prob);
        return -static_cast<int>(std::lround(std::max(100.0, mag)));
    }
    const double mag = 100.0 * (1.0 - prob) / prob;
    return static_cast<int>(std::lround(std::max(100.0, mag)));
}

// Fisher-Yates with the counter RNG so shuffles are reproducible.
template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

void ScheduleTemplate::validate() const {
    if (n_teams < 4 || n_teams > kNumTeams || n_teams % 2 != 0) {
        throw std::invalid_argument("n_teams must be even and in [4, 32]");
    }
    if (first_season < kSeasonMin || first_season + n_seasons - 1 > kSeasonMax || n_seasons < 1) {
        throw std::invalid_argument("seasons must lie inside [2002, 2023]");
    }
    if (weeks_per_season < 2 || (bye_weeks && weeks_per_season < 8)) {
        throw std::invalid_argument("weeks_per_season too small for the requested structure");
    }
    if (thursday_rate < 0 || monday_rate < 0 || neutral_prob < 0 || neutral_prob > 1 ||
        moneyline_prob < 0 || moneyline_prob > 1) {
        throw std::invalid_argument("rates must be nonnegative (probabilities in [0,1])");
    }
}

SimulatedData gen_dataset(const TrueParams& truth, ModelVariant variant,
                          const ScheduleTemplate& schedule, std::uint64_t seed) {
    schedule.validate();
    if (!(truth.gamma >= 0.0 && truth.gamma <= 1.0) || !(truth.sigma_teamstrength > 0.0) ||
        truth.sigma_game < 0.0) {
        throw std::invalid_argument("truth outside the parameter support");
    }

    CounterRng rng(seed, 0);

    std::vector<int> franchises(static_cast<std::size_t>(schedule.n_teams));
    std::iota(franchises.begin(), franchises.end(), 0);
    ParameterLayout layout(franchises, schedule.first_season, schedule.n_seasons, variant);

    // Realize the strength paths from the transition law.
    TrueParams realized = truth;
    realized.theta.resize(schedule.n_teams, schedule.n_seasons);
    for (int t = 0; t < schedule.n_teams; ++t) {
        realized.theta(t, 0) = rng.normal(0.0, truth.sigma_teamstrength);
        for (int s = 1; s < schedule.n_seasons; ++s) {
            realized.theta(t, s) =
                rng.normal(truth.gamma * realized.theta(t, s - 1), truth.sigma_teamstrength);
        }
    }

    SeasonDataset ds;
    const int weeks = schedule.weeks_per_season;
    for (int si = 0; si < schedule.n_seasons; ++si) {
        const int season = schedule.first_season + si;
        const Date anchor = next_sunday(
            Date{std::chrono::year{season} / std::chrono::September / std::chrono::day{5}});

        std::vector<TeamState> state(static_cast<std::size_t>(schedule.n_teams));
        if (schedule.bye_weeks) {
            // Byes in pairs so weekly pairings stay even; mid-season window.
            std::vector<int> order(franchises);
            shuffle(order, rng);
            const int bye_lo = 6;
            const int bye_hi = weeks - 3;
            for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
                const int w = bye_lo + static_cast<int>(rng.below(
                                           static_cast<std::uint64_t>(bye_hi - bye_lo + 1)));
                state[static_cast<std::size_t>(order[i])].bye_week = w;
                state[static_cast<std::size_t>(order[i + 1])].bye_week = w;
            }
        }

        for (int w = 1; w <= weeks; ++w) {
            std::vector<int> active;
            for (int t = 0; t < schedule.n_teams; ++t) {
                if (state[static_cast<std::size_t>(t)].bye_week != w) active.push_back(t);
            }
            shuffle(active, rng);

            const std::size_t n_games = active.size() / 2;
            const double thu_p = n_games ? schedule.thursday_rate / static_cast<double>(n_games) : 0;
            const double mon_p = n_games ? schedule.monday_rate / static_cast<double>(n_games) : 0;

            for (std::size_t gi = 0; gi < n_games; ++gi) {
                const int home = active[2 * gi];
                const int away = active[2 * gi + 1];
                const TeamState& sh = state[static_cast<std::size_t>(home)];
                const TeamState& sa = state[static_cast<std::size_t>(away)];

                const auto rest_ok = [&](const TeamState& ts, int offset) {
                    if (!ts.played) return true;
                    const int rest = 7 * (w - ts.last_week) + offset - ts.last_offset;
                    return rest >= kRestMin && rest <= kRestMax;
                };
                // Thursday slots only for teams coming straight off a Sunday
                // game (or an opener), and never the week before a bye: the
                // post-bye rest would overrun 15 days.
                const auto thursday_ok = [&](const TeamState& ts, int team) {
                    if (state[static_cast<std::size_t>(team)].bye_week == w + 1) return false;
                    if (!ts.played) return true;
                    return ts.last_week == w - 1 && ts.last_offset == kOffsetSunday;
                };

                int offset = kOffsetSunday;
                const double u = rng.uniform();
                if (u < thu_p && thursday_ok(sh, home) && thursday_ok(sa, away)) {
                    offset = kOffsetThursday;
                } else if (u < thu_p + mon_p && rest_ok(sh, kOffsetMonday) &&
                           rest_ok(sa, kOffsetMonday)) {
                    offset = kOffsetMonday;
                }

                GameRecord g;
                g.season = season;
                g.week = w;
                g.kickoff = anchor + std::chrono::days{7 * (w - 1) + offset};
                g.home_team = home;
                g.away_team = away;
                g.neutral_site = rng.uniform() < schedule.neutral_prob;
                ds.games.push_back(ClassifiedGame{g, {}, {}});

                for (const int team : {home, away}) {
                    auto& ts = state[static_cast<std::size_t>(team)];
                    ts.last_week = w;
                    ts.last_offset = offset;
                    ts.played = true;
                }
            }
        }
    }

    ds.loaded = ds.games.size();
    ds = classify_indicators(compute_rest(std::move(ds)));

    // Outcomes: the modeled column gets observation noise, the other column
    // the exact expectation (so a noiseless template is exactly recoverable).
    for (auto& cg : ds.games) {
        const double mean = expected_outcome(layout, realized, cg);
        const double noise = rng.normal() * truth.sigma_game;
        double margin, spread;
        if (variant.outcome == Outcome::PointDifferential) {
            margin = mean + noise;
            spread = mean;
        } else {
            spread = mean + noise;
            margin = mean;
        }
        const double base = std::max(21.5, std::abs(margin) / 2.0 + 0.5);
        cg.game.home_score = base + margin / 2.0;
        cg.game.away_score = base - margin / 2.0;
        cg.game.spread_home_margin = spread;

        if (rng.uniform() < schedule.moneyline_prob) {
            // Fair win probability from the expected margin, with a 4.5%
            // overround split proportionally.
            const double p = normal_cdf(mean / 13.45);
            const double vig = 1.0225;
            cg.game.home_moneyline = implied_moneyline(std::min(0.999, std::max(0.001, p * vig)));
            cg.game.away_moneyline =
                implied_moneyline(std::min(0.999, std::max(0.001, (1.0 - p) * vig)));
        }
    }

    return SimulatedData{std::move(ds), std::move(realized), std::move(layout)};
}

GaussianPosterior analytic_posterior(const ParameterLayout& layout, const SeasonDataset& dataset,
                                     const PriorConfig& priors, double gamma,
                                     double sigma_teamstrength, double sigma_game) {
    if (layout.n_locations() > 512) {
        throw std::invalid_argument("analytic posterior is meant for small instances (<= 512 locations)");
    }
    if (!(sigma_teamstrength > 0.0) || !(sigma_game > 0.0)) {
        throw std::invalid_argument("sigmas must be positive");
    }
    const DesignMatrix design = build_design(layout, dataset);
    const Eigen::MatrixXd x = Eigen::MatrixXd(design.X);
    const double inv_sg2 = 1.0 / (sigma_game * sigma_game);
    Eigen::MatrixXd precision =
        Eigen::MatrixXd(location_prior_precision(layout, gamma, sigma_teamstrength, priors.alpha_sd));
    precision += inv_sg2 * (x.transpose() * x);

    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("analytic posterior precision is singular");
    }
    GaussianPosterior post;
    post.covariance = llt.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
    post.mean = llt.solve(inv_sg2 * (x.transpose() * design.y));
    return post;
}

}  // namespace restadv
