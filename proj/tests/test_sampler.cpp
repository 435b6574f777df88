#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "restadv/diagnostics.hpp"
#include "restadv/sampler.hpp"
#include "restadv/simulate.hpp"
#include "testutil.hpp"

using namespace restadv;

namespace {

const ModelVariant kM1{Outcome::PointDifferential, ByeStructure::Constant};

SeasonDataset five_game_fixture() {
    return test::make_dataset({
        {2002, 1, 0, 1, 7.0, 3.0, false, {1, 0, 0, false}},
        {2002, 2, 2, 3, -3.0, -1.0, false, {0, -1, 0, false}},
        {2002, 3, 0, 2, 4.0, 2.0, true, {}},
        {2003, 1, 1, 3, -6.0, -3.5, false, {0, 0, -1, false}},
        {2003, 2, 0, 3, 2.0, 1.0, false, {1, 0, 1, false}},
    });
}

// Batch-means Monte Carlo standard error for a (possibly correlated) chain.
double batch_se(const Eigen::VectorXd& values, int n_batches = 20) {
    const Eigen::Index batch = values.size() / n_batches;
    Eigen::VectorXd means(n_batches);
    for (int b = 0; b < n_batches; ++b) {
        means[b] = values.segment(b * batch, batch).mean();
    }
    return test::sample_sd(means) / std::sqrt(static_cast<double>(n_batches));
}

}  // namespace

TEST_CASE("initialize yields a finite start inside the support") {
    const ParameterLayout layout = test::make_layout(4, 2002, 3, kM1);
    CounterRng rng(1, 0);
    const ParameterVector p = initialize(layout, {}, rng);
    CHECK(p.gamma > 0.0);
    CHECK(p.gamma < 1.0);
    CHECK(p.sigma_teamstrength > 0.0);
    CHECK(std::isfinite(log_posterior(layout, p, five_game_fixture(), {})));

    CounterRng other(1, 1);
    const ParameterVector q = initialize(layout, {}, other);
    CHECK(p.alpha_mnf != q.alpha_mnf);  // distinct streams, distinct starts
}

TEST_CASE("chain config validation") {
    ChainConfig config;
    config.n_chains = 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.n_chains = 4;
    config.n_burnin = 3000;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config.n_burnin = 1000;
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("slice sampler targets the density it is given") {
    // N(3, 2^2) on the raw coordinate.
    const auto logpdf = [](double x) { return -0.5 * (x - 3.0) * (x - 3.0) / 4.0; };
    CounterRng rng(77, 0);
    double x = 0.0;
    const int n = 40000;
    Eigen::VectorXd draws(n);
    for (int i = 0; i < n; ++i) {
        x = slice_sample(logpdf, x, 1.0, rng);
        draws[i] = x;
    }
    CHECK(draws.mean() == doctest::Approx(3.0).epsilon(0.02));
    CHECK(test::sample_sd(draws) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("run_chains is bit-identical for identical seeds") {
    const SeasonDataset ds = five_game_fixture();
    ChainConfig config;
    config.n_chains = 2;
    config.n_iterations = 60;
    config.n_burnin = 20;
    config.seed = 314159;

    const PosteriorDraws a = run_chains(ds, kM1, {}, config);
    const PosteriorDraws b = run_chains(ds, kM1, {}, config);
    REQUIRE(a.n_chains() == b.n_chains());
    CHECK(a.n_retained() == 40);
    for (int c = 0; c < a.n_chains(); ++c) {
        CHECK((a.chains[c].array() == b.chains[c].array()).all());  // exact, not approximate
    }

    ChainConfig reseeded = config;
    reseeded.seed = 271828;
    const PosteriorDraws d = run_chains(ds, kM1, {}, reseeded);
    CHECK((a.chains[0].array() != d.chains[0].array()).any());
}

TEST_CASE("every retained draw stays inside the support") {
    const SeasonDataset ds = five_game_fixture();
    ChainConfig config;
    config.n_chains = 2;
    config.n_iterations = 120;
    config.n_burnin = 20;
    config.seed = 5;
    const PosteriorDraws draws = run_chains(ds, kM1, {}, config);
    const int g = draws.require_param("gamma");
    const int st = draws.require_param("sigma_teamstrength");
    const int sg = draws.require_param("sigma_game");
    for (const auto& chain : draws.chains) {
        CHECK((chain.col(g).array() >= 0.0).all());
        CHECK((chain.col(g).array() <= 1.0).all());
        CHECK((chain.col(st).array() > 0.0).all());
        CHECK((chain.col(sg).array() > 0.0).all());
    }
}

TEST_CASE("gamma's conditional collapses to the prior without transitions") {
    // Single-season data: no season-to-season terms, so every sweep draws
    // gamma from Uniform(0,1).
    const SeasonDataset ds = test::make_dataset({{2002, 1, 0, 1, 3.0, 1.0, false, {}}});
    const ParameterLayout layout = test::make_layout(2, 2002, 1, kM1);
    GibbsSampler sampler(layout, ds, {});
    CounterRng rng(11, 0);
    ParameterVector state = initialize(layout, {}, rng);
    const int n = 4000;
    std::vector<double> gammas(n);
    for (int i = 0; i < n; ++i) {
        sampler.sweep(state, rng);
        gammas[static_cast<std::size_t>(i)] = state.gamma;
    }
    const double d = test::ks_statistic(gammas, [](double x) { return x; });
    CHECK(d < test::ks_critical_01(n));
}

TEST_CASE("location conditional mean solves hand-built normal equations") {
    const SeasonDataset ds = five_game_fixture();
    const ParameterLayout layout = ParameterLayout::for_dataset(ds, kM1);
    const PriorConfig priors;
    GibbsSampler sampler(layout, ds, priors);

    ParameterVector state = ParameterVector::zeros(layout);
    state.gamma = 0.6;
    state.sigma_teamstrength = 2.5;
    state.sigma_game = 9.0;

    // Dense oracle assembled with literal loops, independent of the library's
    // design and precision builders.
    const int n_loc = layout.n_locations();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, n_loc);
    Eigen::VectorXd y(5);
    for (int g = 0; g < 5; ++g) {
        const auto& cg = ds.games[static_cast<std::size_t>(g)];
        const int s = cg.game.season - 2002;
        x(g, layout.team_position(cg.game.home_team) * 2 + s) += 1.0;
        x(g, layout.team_position(cg.game.away_team) * 2 + s) -= 1.0;
        if (!cg.game.neutral_site) {
            x(g, layout.ha_trend()) = cg.game.season - 2002.5;
            x(g, layout.ha_intercept()) = 1.0;
        }
        x(g, layout.mnf()) = cg.indicators.mnf;
        x(g, layout.mini()) = cg.indicators.mini;
        x(g, layout.bye()) = cg.indicators.bye;
        y[g] = cg.game.margin();
    }
    Eigen::MatrixXd prior_precision = Eigen::MatrixXd::Zero(n_loc, n_loc);
    const double inv_st2 = 1.0 / (2.5 * 2.5);
    for (int t = 0; t < layout.n_teams(); ++t) {
        const int first = t * 2, second = t * 2 + 1;
        prior_precision(first, first) += inv_st2;                       // initial season
        prior_precision(second, second) += inv_st2;                     // transition target
        prior_precision(first, first) += 0.6 * 0.6 * inv_st2;           // transition source
        prior_precision(first, second) -= 0.6 * inv_st2;
        prior_precision(second, first) -= 0.6 * inv_st2;
    }
    for (int a = layout.n_theta(); a < n_loc; ++a) prior_precision(a, a) = 1.0 / 25.0;

    const double inv_sg2 = 1.0 / (9.0 * 9.0);
    const Eigen::MatrixXd lhs = x.transpose() * x * inv_sg2 + prior_precision;
    const Eigen::VectorXd rhs = x.transpose() * y * inv_sg2;
    const Eigen::VectorXd expected = lhs.ldlt().solve(rhs);

    const Eigen::VectorXd actual = sampler.location_conditional_mean(state);
    REQUIRE(actual.size() == expected.size());
    for (int i = 0; i < n_loc; ++i) {
        CHECK(actual[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    }
}

TEST_CASE("with no data the chain samples the prior") {
    const ParameterLayout layout = test::make_layout(3, 2002, 2, kM1);
    ChainConfig config;
    config.n_chains = 2;
    config.n_iterations = 2600;
    config.n_burnin = 100;
    config.seed = 404;
    const PosteriorDraws draws = run_chains(layout, SeasonDataset{}, {}, config);

    // Fixed effects: exact N(0, 5^2) draws, so a KS test applies.
    for (const char* name : {"alpha_mnf", "alpha_mini", "alpha_bye"}) {
        const Eigen::VectorXd v = draws.pooled(draws.require_param(name));
        std::vector<double> values(v.data(), v.data() + v.size());
        const double d = test::ks_statistic(
            values, [](double xv) { return normal_cdf(xv / 5.0); });
        CAPTURE(name);
        CHECK(d < test::ks_critical_01(values.size()));
    }

    // gamma ~ Uniform(0,1) and sigmas ~ HalfNormal(5): moment checks with
    // batch-means error bars (the sigma chains are autocorrelated).
    const Eigen::VectorXd gamma = draws.pooled(draws.require_param("gamma"));
    CHECK(gamma.mean() == doctest::Approx(0.5).epsilon(0.05));
    CHECK(test::sample_sd(gamma) == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(0.05));

    const double halfnormal_mean = 5.0 * std::sqrt(2.0 / M_PI);
    for (const char* name : {"sigma_teamstrength", "sigma_game"}) {
        const Eigen::VectorXd v = draws.pooled(draws.require_param(name));
        const double se = batch_se(v);
        CAPTURE(name);
        CHECK(std::abs(v.mean() - halfnormal_mean) < 5.0 * se + 0.05);
    }
}

TEST_CASE("sampler marginals match the analytic posterior at fixed hyperparameters") {
    // Conjugate check: with gamma and the sigmas pinned, the location draw is
    // exact, so marginal moments must agree with the dense Gaussian answer.
    SeasonDataset ds = test::make_dataset({
        {2002, 1, 0, 1, 9.0, 4.0, false, {1, 0, 0, false}},
        {2002, 2, 2, 3, -3.0, -1.0, false, {0, -1, 0, false}},
        {2002, 3, 0, 2, 4.0, 2.0, true, {}},
        {2002, 4, 3, 1, 1.0, 0.5, false, {}},
        {2003, 1, 1, 3, -6.0, -3.5, false, {0, 0, -1, false}},
        {2003, 2, 0, 3, 2.0, 1.0, false, {1, 0, 1, false}},
        {2003, 3, 2, 1, 13.0, 7.0, false, {0, 1, 0, false}},
        {2003, 4, 0, 1, -4.0, -2.0, false, {}},
    });
    const ParameterLayout layout = ParameterLayout::for_dataset(ds, kM1);
    const PriorConfig priors;
    const double gamma = 0.7, sigma_ts = 2.0, sigma_game = 10.0;

    const GaussianPosterior exact = analytic_posterior(layout, ds, priors, gamma, sigma_ts, sigma_game);

    GibbsSampler sampler(layout, ds, priors);
    ParameterVector state = ParameterVector::zeros(layout);
    state.gamma = gamma;
    state.sigma_teamstrength = sigma_ts;
    state.sigma_game = sigma_game;
    CounterRng rng(2718, 0);
    const int n = 20000;
    Eigen::MatrixXd samples(n, layout.n_locations());
    for (int i = 0; i < n; ++i) {
        sampler.draw_location_block(state, rng);
        samples.row(i) = pack_locations(layout, state).transpose();
    }

    for (int j = 0; j < layout.n_locations(); ++j) {
        const double sd = std::sqrt(exact.covariance(j, j));
        const double mean_se = sd / std::sqrt(static_cast<double>(n));
        const double sd_se = sd / std::sqrt(2.0 * static_cast<double>(n));
        CAPTURE(j);
        CHECK(std::abs(samples.col(j).mean() - exact.mean[j]) < 3.0 * mean_se);
        CHECK(std::abs(test::sample_sd(samples.col(j)) - sd) < 3.0 * sd_se);
    }
}

TEST_CASE("hmc with zero leapfrog steps is the identity and always accepts") {
    HmcTarget target;
    target.log_density = [](const Eigen::VectorXd& q) { return -0.5 * q.squaredNorm(); };
    target.gradient = [](const Eigen::VectorXd& q) -> Eigen::VectorXd { return -q; };
    CounterRng rng(1, 0);
    Eigen::VectorXd q(2);
    q << 1.5, -0.5;
    for (int i = 0; i < 20; ++i) {
        const HmcStepResult r = hmc_step(target, q, 0.3, 0, rng);
        CHECK(r.accepted);
        CHECK((r.state.array() == q.array()).all());
        CHECK(r.energy_error == 0.0);
    }
}

TEST_CASE("hmc samples a 2-d standard normal with correct moments") {
    HmcTarget target;
    target.log_density = [](const Eigen::VectorXd& q) { return -0.5 * q.squaredNorm(); };
    target.gradient = [](const Eigen::VectorXd& q) -> Eigen::VectorXd { return -q; };
    CounterRng rng(9, 0);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(2);
    const int n = 20000;
    Eigen::MatrixXd samples(n, 2);
    int accepted = 0;
    for (int i = 0; i < n; ++i) {
        const HmcStepResult r = hmc_step(target, q, 0.45, 8, rng);
        q = r.state;
        accepted += r.accepted;
        samples.row(i) = q.transpose();
    }
    CHECK(accepted > n / 2);
    for (int d = 0; d < 2; ++d) {
        const double mean_se = batch_se(samples.col(d));
        CHECK(std::abs(samples.col(d).mean()) < 3.0 * mean_se);
        CHECK(test::sample_sd(samples.col(d)) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("leapfrog retraces its path under momentum reversal") {
    const SeasonDataset ds = five_game_fixture();
    const ParameterLayout layout = ParameterLayout::for_dataset(ds, kM1);
    const PriorConfig priors;
    const HmcTarget target = model_hmc_target(layout, ds, priors);

    CounterRng rng(33, 0);
    ParameterVector p = initialize(layout, priors, rng);
    PhasePoint start;
    start.position = to_unconstrained(layout, p);
    start.momentum.resize(start.position.size());
    for (Eigen::Index i = 0; i < start.momentum.size(); ++i) start.momentum[i] = rng.normal();

    PhasePoint forward = leapfrog(target, start, 0.01, 32);
    forward.momentum = -forward.momentum;
    const PhasePoint back = leapfrog(target, forward, 0.01, 32);
    CHECK((back.position - start.position).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK((back.momentum + start.momentum).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("hmc engine agrees with the analytic posterior on a small model") {
    SeasonDataset ds = test::make_dataset({
        {2002, 1, 0, 1, 9.0, 4.0, false, {1, 0, 0, false}},
        {2002, 2, 0, 1, -1.0, 0.0, false, {}},
        {2002, 3, 1, 0, 3.0, 2.0, false, {0, 0, 1, false}},
    });
    ChainConfig config;
    config.algorithm = Algorithm::Hmc;
    config.n_chains = 2;
    config.n_iterations = 3000;
    config.n_burnin = 1000;
    config.hmc_step_size = 0.1;
    config.hmc_leapfrog_steps = 16;
    config.seed = 123;
    const PosteriorDraws draws = run_chains(ds, kM1, {}, config);
    CHECK(draws.divergences == 0);
    // Cross-engine agreement: the Gibbs run on the same data.
    ChainConfig gibbs = config;
    gibbs.algorithm = Algorithm::BlockedGibbs;
    const PosteriorDraws gd = run_chains(ds, kM1, {}, gibbs);
    for (const char* name : {"alpha_bye", "sigma_game", "gamma"}) {
        const Eigen::VectorXd h = draws.pooled(draws.require_param(name));
        const Eigen::VectorXd g = gd.pooled(gd.require_param(name));
        const double se = std::sqrt(std::pow(batch_se(h), 2) + std::pow(batch_se(g), 2));
        CAPTURE(name);
        CHECK(std::abs(h.mean() - g.mean()) < 4.0 * se + 0.02 * test::sample_sd(g));
    }
}
