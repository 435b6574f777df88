#include <doctest.h>

#include <cmath>

#include "restadv/evaluation.hpp"
#include "restadv/simulate.hpp"
#include "testutil.hpp"

using namespace restadv;

namespace {

const ModelVariant kM1{Outcome::PointDifferential, ByeStructure::Constant};
const ModelVariant kM3{Outcome::PointSpread, ByeStructure::Constant};

TrueParams base_truth() {
    TrueParams t;
    t.gamma = 0.6;
    t.sigma_teamstrength = 2.0;
    t.sigma_game = 13.0;
    t.alpha_ha_trend = -0.05;
    t.alpha_ha_intercept = 2.0;
    t.alpha_mnf = 0.3;
    t.alpha_mini = 0.4;
    t.alpha_bye = 1.0;
    return t;
}

ScheduleTemplate small_template() {
    ScheduleTemplate s;
    s.n_teams = 8;
    s.n_seasons = 3;
    s.weeks_per_season = 10;
    return s;
}

}  // namespace

TEST_CASE("gen_dataset is bit-reproducible under a seed") {
    const SimulatedData a = gen_dataset(base_truth(), kM1, small_template(), 99);
    const SimulatedData b = gen_dataset(base_truth(), kM1, small_template(), 99);
    CHECK(a.dataset.content_digest() == b.dataset.content_digest());
    CHECK((a.truth.theta.array() == b.truth.theta.array()).all());

    const SimulatedData c = gen_dataset(base_truth(), kM1, small_template(), 100);
    CHECK(a.dataset.content_digest() != c.dataset.content_digest());
}

TEST_CASE("noiseless outcomes equal the mean structure exactly") {
    TrueParams truth = base_truth();
    truth.sigma_game = 0.0;
    const SimulatedData sim = gen_dataset(truth, kM1, small_template(), 7);
    for (const auto& cg : sim.dataset.games) {
        const double mean = expected_outcome(sim.layout, sim.truth, cg);
        CHECK(cg.game.margin() == doctest::Approx(mean).epsilon(1e-12));
        CHECK(cg.game.spread_home_margin == doctest::Approx(mean).epsilon(1e-12));
        CHECK(cg.game.home_score >= 0.0);
        CHECK(cg.game.away_score >= 0.0);
    }
}

TEST_CASE("spread-outcome variants put the noise on the spread column") {
    TrueParams truth = base_truth();
    truth.sigma_game = 3.0;
    const SimulatedData sim = gen_dataset(truth, kM3, small_template(), 7);
    double spread_dev = 0.0;
    for (const auto& cg : sim.dataset.games) {
        const double mean = expected_outcome(sim.layout, sim.truth, cg);
        CHECK(cg.game.margin() == doctest::Approx(mean).epsilon(1e-12));  // margin noise-free
        spread_dev += std::abs(cg.game.spread_home_margin - mean);
    }
    CHECK(spread_dev > 0.0);
}

TEST_CASE("gamma zero collapses strengths to independent prior draws") {
    TrueParams truth = base_truth();
    truth.gamma = 0.0;
    truth.sigma_teamstrength = 2.0;
    ScheduleTemplate tpl;
    tpl.n_teams = 32;
    tpl.n_seasons = 8;
    tpl.weeks_per_season = 10;
    const SimulatedData sim = gen_dataset(truth, kM1, tpl, 11);
    const auto& theta = sim.truth.theta;
    const int n = static_cast<int>(theta.size());
    CHECK(std::abs(theta.mean()) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
    const double sd = std::sqrt((theta.array() - theta.mean()).square().sum() / (n - 1));
    CHECK(sd == doctest::Approx(2.0).epsilon(0.15));
    // Lag-1 season correlation should vanish.
    double num = 0.0, den = 0.0;
    for (int t = 0; t < theta.rows(); ++t) {
        for (int s = 1; s < theta.cols(); ++s) {
            num += theta(t, s - 1) * theta(t, s);
            den += theta(t, s - 1) * theta(t, s - 1);
        }
    }
    CHECK(std::abs(num / den) < 0.1);
}

TEST_CASE("simulated outcomes average to the mean structure") {
    TrueParams truth = base_truth();
    truth.sigma_game = 10.0;
    ScheduleTemplate tpl = small_template();
    tpl.n_seasons = 6;
    const SimulatedData sim = gen_dataset(truth, kM1, tpl, 21);
    double resid_sum = 0.0;
    for (const auto& cg : sim.dataset.games) {
        resid_sum += cg.game.margin() - expected_outcome(sim.layout, sim.truth, cg);
    }
    const double n = static_cast<double>(sim.dataset.modeled());
    CHECK(std::abs(resid_sum / n) < 3.0 * 10.0 / std::sqrt(n));
}

TEST_CASE("generated schedules stay inside the rest domain") {
    const SimulatedData sim = gen_dataset(base_truth(), kM1, ScheduleTemplate{}, 5);
    for (const auto& cg : sim.dataset.games) {
        CHECK_FALSE(cg.indicators.unclassified);
        for (const int rest : {cg.rest.home_rest_days, cg.rest.away_rest_days}) {
            if (rest == kSeasonOpener) {
                CHECK(cg.game.week == 1);  // byes start later, so openers are week 1
            } else {
                CHECK(rest >= kRestMin);
                CHECK(rest <= kRestMax);
            }
        }
        if (cg.game.home_moneyline) {
            CHECK(std::abs(*cg.game.home_moneyline) >= 100);
            CHECK(std::abs(*cg.game.away_moneyline) >= 100);
        }
    }
}

TEST_CASE("synthetic data survives the CSV round trip bit-for-bit") {
    const SimulatedData sim = gen_dataset(base_truth(), kM1, small_template(), 31);
    test::TempDir dir("sim");
    write_games_csv(sim.dataset, dir.file("games.csv"));
    const SeasonDataset back = classify_indicators(compute_rest(load_games(dir.file("games.csv"))));
    REQUIRE(back.modeled() == sim.dataset.modeled());
    for (std::size_t i = 0; i < back.games.size(); ++i) {
        CHECK(back.games[i].rest.home_rest_days == sim.dataset.games[i].rest.home_rest_days);
        CHECK(back.games[i].rest.away_rest_days == sim.dataset.games[i].rest.away_rest_days);
        CHECK(back.games[i].indicators == sim.dataset.games[i].indicators);
        CHECK(back.games[i].game.home_score == sim.dataset.games[i].game.home_score);
    }
    CHECK(back.content_digest() == sim.dataset.content_digest());
}

TEST_CASE("schedule template validation") {
    ScheduleTemplate bad;
    bad.n_teams = 7;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ScheduleTemplate{};
    bad.n_seasons = 30;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ScheduleTemplate{};
    bad.weeks_per_season = 5;  // too short for byes
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.bye_weeks = false;
    CHECK_NOTHROW(bad.validate());
}

TEST_CASE("analytic posterior with no games is exactly the prior") {
    const ParameterLayout layout = test::make_layout(2, 2002, 2, kM1);
    const PriorConfig priors;
    const double gamma = 0.5, sigma_ts = 1.5;
    const GaussianPosterior post = analytic_posterior(layout, SeasonDataset{}, priors, gamma, sigma_ts, 7.0);
    CHECK(post.mean.cwiseAbs().maxCoeff() == 0.0);

    // Dense prior covariance built independently: per-team 2x2 chains.
    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(layout.n_locations(), layout.n_locations());
    const double inv = 1.0 / (sigma_ts * sigma_ts);
    for (int t = 0; t < 2; ++t) {
        precision(2 * t, 2 * t) = inv + gamma * gamma * inv;
        precision(2 * t + 1, 2 * t + 1) = inv;
        precision(2 * t, 2 * t + 1) = precision(2 * t + 1, 2 * t) = -gamma * inv;
    }
    for (int a = layout.n_theta(); a < layout.n_locations(); ++a) precision(a, a) = 1.0 / 25.0;
    const Eigen::MatrixXd expected = precision.inverse();
    CHECK((post.covariance - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("analytic posterior matches the joint-Gaussian regression on one game") {
    // One neutral game with a bye edge: y = (theta_h - theta_a) + alpha_bye + noise.
    // Treating (theta_h - theta_a, alpha_bye, y) as jointly Gaussian gives
    // posterior moments by plain regression on y, independent of the matrix
    // machinery under test.
    const ParameterLayout layout = test::make_layout(2, 2002, 1, kM1);
    const PriorConfig priors;
    const double sigma_ts = 1.4, sigma_game = 9.0, y = 12.0;
    SeasonDataset ds = test::make_dataset({{2002, 1, 0, 1, y, 0.0, true, {1, 0, 0, false}}});
    const GaussianPosterior post = analytic_posterior(layout, ds, priors, 0.5, sigma_ts, sigma_game);

    const double var_d = 2.0 * sigma_ts * sigma_ts;  // prior var of the strength difference
    const double var_a = 25.0;
    const double var_y = var_d + var_a + sigma_game * sigma_game;
    const int a_idx = layout.bye();
    CHECK(post.mean[a_idx] == doctest::Approx(var_a / var_y * y).epsilon(1e-10));
    CHECK(post.covariance(a_idx, a_idx) ==
          doctest::Approx(var_a - var_a * var_a / var_y).epsilon(1e-10));
    // Each strength moves by half the difference share.
    CHECK(post.mean[layout.theta_location(0, 0)] ==
          doctest::Approx(sigma_ts * sigma_ts / var_y * y).epsilon(1e-10));
    CHECK(post.mean[layout.theta_location(1, 0)] ==
          doctest::Approx(-sigma_ts * sigma_ts / var_y * y).epsilon(1e-10));
    // Untouched effects keep their prior.
    CHECK(post.mean[layout.mnf()] == doctest::Approx(0.0));
    CHECK(post.covariance(layout.mnf(), layout.mnf()) == doctest::Approx(25.0).epsilon(1e-10));
}

TEST_CASE("analytic posterior covariance is symmetric positive definite") {
    const SimulatedData sim = gen_dataset(base_truth(), kM1, small_template(), 3);
    const GaussianPosterior post =
        analytic_posterior(sim.layout, sim.dataset, PriorConfig{}, 0.6, 2.0, 13.0);
    CHECK((post.covariance - post.covariance.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(post.covariance);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
}
