#include "restadv/sampler.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace restadv {

std::string_view algorithm_name(Algorithm a) {
    return a == Algorithm::BlockedGibbs ? "gibbs" : "hmc";
}

void ChainConfig::validate() const {
    if (n_chains < 2) {
        throw std::invalid_argument("need at least 2 chains (split R-hat requires them)");
    }
    if (n_burnin < 0 || n_iterations <= 0 || n_burnin >= n_iterations) {
        throw std::invalid_argument("burn-in must be shorter than the iteration count");
    }
    if (algorithm == Algorithm::Hmc && (hmc_step_size <= 0.0 || hmc_leapfrog_steps < 0)) {
        throw std::invalid_argument("bad HMC step settings");
    }
    if (slice_width <= 0.0) {
        throw std::invalid_argument("slice width must be positive");
    }
}

int PosteriorDraws::param_index(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int PosteriorDraws::require_param(std::string_view name) const {
    const int idx = param_index(name);
    if (idx < 0) {
        throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
    }
    return idx;
}

Eigen::VectorXd PosteriorDraws::pooled(int param) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n_chains()) * n_retained());
    Eigen::Index at = 0;
    for (const auto& chain : chains) {
        v.segment(at, chain.rows()) = chain.col(param);
        at += chain.rows();
    }
    return v;
}

std::vector<Eigen::VectorXd> PosteriorDraws::per_chain(int param) const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(chains.size());
    for (const auto& chain : chains) out.emplace_back(chain.col(param));
    return out;
}

ParameterVector initialize(const ParameterLayout& layout, const PriorConfig& priors,
                           CounterRng& rng) {
    ParameterVector p = ParameterVector::zeros(layout);
    p.gamma = 0.5;
    p.sigma_teamstrength = 3.0;
    p.sigma_game = 3.0;
    const double sd = 0.1 * priors.alpha_sd;
    p.alpha_ha_trend = rng.normal(0.0, sd);
    p.alpha_ha_intercept = rng.normal(0.0, sd);
    p.alpha_mnf = rng.normal(0.0, sd);
    p.alpha_mini = rng.normal(0.0, sd);
    if (layout.variant().bye == ByeStructure::Constant) {
        p.alpha_bye = rng.normal(0.0, sd);
    } else {
        p.alpha_bye_pre = rng.normal(0.0, sd);
        p.alpha_bye_post = rng.normal(0.0, sd);
    }
    return p;
}

GibbsSampler::GibbsSampler(const ParameterLayout& layout, const SeasonDataset& dataset,
                           const PriorConfig& priors, double slice_width)
    : layout_(layout),
      priors_(priors),
      slice_width_(slice_width),
      design_(build_design(layout, dataset)),
      n_games_(design_.X.rows()) {
    xtx_ = Eigen::SparseMatrix<double>(design_.X.transpose() * design_.X);
    xtx_.makeCompressed();
    xty_ = design_.X.transpose() * design_.y;
}

void GibbsSampler::refactorize(const ParameterVector& state) {
    const double inv_sg2 = 1.0 / (state.sigma_game * state.sigma_game);
    Eigen::SparseMatrix<double> precision =
        location_prior_precision(layout_, state.gamma, state.sigma_teamstrength, priors_.alpha_sd);
    if (n_games_ > 0) {
        precision += Eigen::SparseMatrix<double>(xtx_ * inv_sg2);
    }
    precision.makeCompressed();
    if (!pattern_analyzed_) {
        llt_.analyzePattern(precision);
        pattern_analyzed_ = true;
    }
    llt_.factorize(precision);
    if (llt_.info() != Eigen::Success) {
        throw std::runtime_error("location conditional precision is not positive definite "
                                 "(gamma=" + std::to_string(state.gamma) +
                                 ", sigma_teamstrength=" + std::to_string(state.sigma_teamstrength) + ")");
    }
}

Eigen::VectorXd GibbsSampler::location_conditional_mean(const ParameterVector& state) {
    refactorize(state);
    const double inv_sg2 = 1.0 / (state.sigma_game * state.sigma_game);
    return llt_.solve((xty_ * inv_sg2).eval());
}

void GibbsSampler::draw_location_block(ParameterVector& state, CounterRng& rng) {
    // Joint location block: N(A^-1 b, A^-1) with A = X'X/sg^2 + P.
    refactorize(state);
    const double inv_sg2 = 1.0 / (state.sigma_game * state.sigma_game);
    const Eigen::VectorXd mean = llt_.solve((xty_ * inv_sg2).eval());
    Eigen::VectorXd white(layout_.n_locations());
    for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = rng.normal();
    // With P A P' = L L', solving L'v = e and undoing the permutation gives
    // a draw with covariance A^-1.
    const Eigen::VectorXd v = llt_.matrixU().solve(white);
    const Eigen::VectorXd loc = mean + llt_.permutationPinv() * v;
    unpack_locations(layout_, loc, state);
}

void GibbsSampler::sweep(ParameterVector& state, CounterRng& rng) {
    draw_location_block(state, rng);

    // (b) gamma | theta, sigma_teamstrength: truncated normal on [0,1].
    double num = 0.0, den = 0.0;
    for (int t = 0; t < layout_.n_teams(); ++t) {
        for (int s = 1; s < layout_.n_seasons(); ++s) {
            num += state.theta(t, s - 1) * state.theta(t, s);
            den += state.theta(t, s - 1) * state.theta(t, s - 1);
        }
    }
    if (den > 0.0) {
        const double sd = state.sigma_teamstrength / std::sqrt(den);
        state.gamma = truncated_normal(rng, num / den, sd, 0.0, 1.0);
    } else {
        // No informative transition terms: the conditional is the prior.
        state.gamma = rng.uniform();
    }

    // (c) sigma_teamstrength: slice sample log sigma.
    double sse_theta = 0.0;
    for (int t = 0; t < layout_.n_teams(); ++t) {
        sse_theta += state.theta(t, 0) * state.theta(t, 0);
        for (int s = 1; s < layout_.n_seasons(); ++s) {
            const double r = state.theta(t, s) - state.gamma * state.theta(t, s - 1);
            sse_theta += r * r;
        }
    }
    const double n_theta_terms = layout_.n_teams() * layout_.n_seasons();
    const double hn2 = priors_.sigma_halfnormal_sd * priors_.sigma_halfnormal_sd;
    const auto sigma_ts_logpdf = [&](double lam) {
        const double s2 = std::exp(2.0 * lam);
        return -n_theta_terms * lam - 0.5 * sse_theta / s2 - 0.5 * s2 / hn2 + lam;
    };
    state.sigma_teamstrength =
        std::exp(slice_sample(sigma_ts_logpdf, std::log(state.sigma_teamstrength), slice_width_, rng));

    // (d) sigma_game: slice sample log sigma against the residual sum of squares.
    double rss = 0.0;
    if (n_games_ > 0) {
        const Eigen::VectorXd resid = design_.y - design_.X * pack_locations(layout_, state);
        rss = resid.squaredNorm();
    }
    const double n_games = static_cast<double>(n_games_);
    const auto sigma_game_logpdf = [&](double w) {
        const double s2 = std::exp(2.0 * w);
        return -n_games * w - 0.5 * rss / s2 - 0.5 * s2 / hn2 + w;
    };
    state.sigma_game =
        std::exp(slice_sample(sigma_game_logpdf, std::log(state.sigma_game), slice_width_, rng));
}

double slice_sample(const std::function<double(double)>& log_density, double x0, double width,
                    CounterRng& rng) {
    const double f0 = log_density(x0);
    if (!std::isfinite(f0)) {
        throw std::runtime_error("slice sampler started at a zero-density point");
    }
    const double level = f0 + std::log(rng.uniform());

    double lo = x0 - width * rng.uniform();
    double hi = lo + width;
    constexpr int kMaxExpand = 1000;
    for (int i = 0; i < kMaxExpand && log_density(lo) > level; ++i) lo -= width;
    for (int i = 0; i < kMaxExpand && log_density(hi) > level; ++i) hi += width;

    constexpr int kMaxShrink = 1000;
    for (int i = 0; i < kMaxShrink; ++i) {
        const double x = rng.uniform(lo, hi);
        if (log_density(x) > level) return x;
        if (x < x0) {
            lo = x;
        } else {
            hi = x;
        }
    }
    throw std::runtime_error("slice sampler failed to find an acceptable point");
}

PhasePoint leapfrog(const HmcTarget& target, PhasePoint state, double step_size, int n_steps) {
    if (n_steps <= 0) return state;
    Eigen::VectorXd grad = target.gradient(state.position);
    for (int step = 0; step < n_steps; ++step) {
        state.momentum += 0.5 * step_size * grad;
        state.position += step_size * state.momentum;
        grad = target.gradient(state.position);
        state.momentum += 0.5 * step_size * grad;
    }
    return state;
}

HmcStepResult hmc_step(const HmcTarget& target, const Eigen::VectorXd& position, double step_size,
                       int n_leapfrog, CounterRng& rng, double divergence_threshold) {
    const Eigen::Index dim = position.size();
    Eigen::VectorXd momentum(dim);
    for (Eigen::Index i = 0; i < dim; ++i) momentum[i] = rng.normal();

    const double h0 = -target.log_density(position) + 0.5 * momentum.squaredNorm();

    const PhasePoint end = leapfrog(target, PhasePoint{position, momentum}, step_size, n_leapfrog);
    const Eigen::VectorXd& q = end.position;
    const Eigen::VectorXd& p = end.momentum;

    const double h1 = -target.log_density(q) + 0.5 * p.squaredNorm();
    const double energy_error = h1 - h0;

    HmcStepResult result;
    result.energy_error = energy_error;
    if (!std::isfinite(energy_error) || energy_error > divergence_threshold) {
        result.state = position;
        result.divergent = true;
        rng.uniform();  // keep the draw count fixed per step
        return result;
    }
    const double u = rng.uniform();
    result.accepted = std::log(u) < -energy_error;
    result.state = result.accepted ? q : position;
    return result;
}

HmcTarget model_hmc_target(const ParameterLayout& layout, const SeasonDataset& dataset,
                           const PriorConfig& priors) {
    HmcTarget target;
    target.log_density = [&layout, &dataset, &priors](const Eigen::VectorXd& z) {
        return log_posterior_unconstrained(layout, z, dataset, priors);
    };
    target.gradient = [&layout, &dataset, &priors](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        // Far tails of the unconstrained coordinates can saturate the maps
        // (sigmoid hitting 1.0, exp overflowing). Such positions have zero
        // density; a zero force keeps the trajectory reversible and the
        // divergence check rejects it.
        const ParameterVector p = from_unconstrained(layout, z);
        if (!(p.gamma > 0.0 && p.gamma < 1.0) || !std::isfinite(p.sigma_teamstrength) ||
            !std::isfinite(p.sigma_game) || !(p.sigma_teamstrength > 0.0) ||
            !(p.sigma_game > 0.0)) {
            return Eigen::VectorXd::Zero(z.size());
        }
        return grad_log_posterior(layout, p, dataset, priors);
    };
    return target;
}

namespace {

struct ChainResult {
    Eigen::MatrixXd draws;
    long divergences = 0;
};

ChainResult run_gibbs_chain(const ParameterLayout& layout, const SeasonDataset& dataset,
                            const PriorConfig& priors, const ChainConfig& config, int chain) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(chain));
    GibbsSampler sampler(layout, dataset, priors, config.slice_width);

    ParameterVector state;
    bool ok = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
        state = initialize(layout, priors, rng);
        if (std::isfinite(log_posterior(layout, state, dataset, priors))) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        throw std::runtime_error("could not find a finite starting point for chain " +
                                 std::to_string(chain));
    }

    ChainResult result;
    result.draws.resize(config.n_retained(), layout.n_parameters());
    int kept = 0;
    for (int iter = 0; iter < config.n_iterations; ++iter) {
        sampler.sweep(state, rng);
        if (iter >= config.n_burnin) {
            result.draws.row(kept++) = pack_parameters(layout, state).transpose();
        }
    }
    return result;
}

ChainResult run_hmc_chain(const ParameterLayout& layout, const SeasonDataset& dataset,
                          const PriorConfig& priors, const ChainConfig& config, int chain) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(chain));
    const HmcTarget target = model_hmc_target(layout, dataset, priors);

    ParameterVector init = initialize(layout, priors, rng);
    if (!std::isfinite(log_posterior(layout, init, dataset, priors))) {
        throw std::runtime_error("non-finite log posterior at HMC initialization");
    }
    Eigen::VectorXd z = to_unconstrained(layout, init);

    // Dual averaging of the step size toward the target acceptance rate
    // (Hoffman & Gelman 2014), frozen after burn-in.
    double log_eps = std::log(config.hmc_step_size);
    double log_eps_bar = log_eps;
    double h_bar = 0.0;
    const double mu = std::log(10.0 * config.hmc_step_size);
    const double t0 = 10.0, adapt_gamma = 0.05, kappa = 0.75;

    ChainResult result;
    result.draws.resize(config.n_retained(), layout.n_parameters());
    int kept = 0;
    for (int iter = 0; iter < config.n_iterations; ++iter) {
        const bool warming = iter < config.n_burnin;
        const double eps = std::exp(warming && config.hmc_adapt ? log_eps : log_eps_bar);
        const HmcStepResult step = hmc_step(target, z, eps, config.hmc_leapfrog_steps, rng,
                                            config.hmc_divergence_threshold);
        z = step.state;
        if (step.divergent) ++result.divergences;
        if (warming && config.hmc_adapt) {
            const double accept_prob =
                step.divergent ? 0.0 : std::min(1.0, std::exp(-step.energy_error));
            const double m = iter + 1;
            h_bar = (1.0 - 1.0 / (m + t0)) * h_bar +
                    (config.hmc_target_accept - accept_prob) / (m + t0);
            log_eps = mu - std::sqrt(m) / adapt_gamma * h_bar;
            const double eta = std::pow(m, -kappa);
            log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
        }
        if (!warming) {
            result.draws.row(kept++) =
                pack_parameters(layout, from_unconstrained(layout, z)).transpose();
        }
    }
    return result;
}

}  // namespace

PosteriorDraws run_chains(const ParameterLayout& layout, const SeasonDataset& dataset,
                          const PriorConfig& priors, const ChainConfig& config) {
    config.validate();

    std::vector<ChainResult> results(static_cast<std::size_t>(config.n_chains));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.n_chains));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(config.n_chains));
    for (int c = 0; c < config.n_chains; ++c) {
        workers.emplace_back([&, c]() {
            try {
                results[static_cast<std::size_t>(c)] =
                    config.algorithm == Algorithm::BlockedGibbs
                        ? run_gibbs_chain(layout, dataset, priors, config, c)
                        : run_hmc_chain(layout, dataset, priors, config, c);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    PosteriorDraws draws;
    draws.config = config;
    draws.variant = layout.variant();
    // Content digest, not the source-file hash: it survives a CSV round trip
    // and identifies the modeled game set after drops.
    draws.dataset_digest = dataset.content_digest();
    draws.names = layout.parameter_names();
    draws.chains.reserve(results.size());
    for (auto& r : results) {
        draws.chains.push_back(std::move(r.draws));
        draws.divergences += r.divergences;
    }
    return draws;
}

PosteriorDraws run_chains(const SeasonDataset& dataset, ModelVariant variant,
                          const PriorConfig& priors, const ChainConfig& config) {
    return run_chains(ParameterLayout::for_dataset(dataset, variant), dataset, priors, config);
}

}  // namespace restadv
