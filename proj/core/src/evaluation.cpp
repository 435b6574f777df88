#include "restadv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "restadv/csv.hpp"
#include "restadv/teams.hpp"

namespace restadv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLogSqrt2Pi = 0.9189385332046727;

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

std::vector<double> sorted_values(const Eigen::VectorXd& v) {
    std::vector<double> s(v.data(), v.data() + v.size());
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

PosteriorSummary summarize_values(std::string name, const Eigen::VectorXd& values) {
    if (values.size() == 0) throw std::invalid_argument("no draws to summarize");
    const auto sorted = sorted_values(values);
    PosteriorSummary s;
    s.parameter = std::move(name);
    s.median = quantile_sorted(sorted, 0.5);
    s.ci_low = quantile_sorted(sorted, 0.025);
    s.ci_high = quantile_sorted(sorted, 0.975);
    s.prob_gt_zero = (values.array() > 0.0).cast<double>().mean();
    return s;
}

PosteriorSummary summarize(const PosteriorDraws& draws, std::string_view parameter) {
    const int idx = draws.require_param(parameter);
    return summarize_values(std::string(parameter), draws.pooled(idx));
}

ProbComparison prob_comparison(const PosteriorDraws& draws, std::string_view param_a,
                               std::string_view param_b) {
    const Eigen::VectorXd a = draws.pooled(draws.require_param(param_a));
    const Eigen::VectorXd b = draws.pooled(draws.require_param(param_b));
    ProbComparison out;
    out.a_less_b = (a.array() < b.array()).cast<double>().mean();
    out.a_greater_b = (a.array() > b.array()).cast<double>().mean();
    return out;
}

PosteriorSummary home_advantage_summary(const PosteriorDraws& draws, const ParameterLayout& layout,
                                        int season) {
    if (layout.season_index(season) < 0) {
        throw std::invalid_argument("season " + std::to_string(season) + " outside the fitted span");
    }
    const Eigen::VectorXd trend = draws.pooled(draws.require_param("alpha_ha_trend"));
    const Eigen::VectorXd intercept = draws.pooled(draws.require_param("alpha_ha_intercept"));
    const double t = layout.season_covariate(season);
    return summarize_values("mu_ha_" + std::to_string(season), trend * t + intercept);
}

Eigen::VectorXd team_strength_path(const PosteriorDraws& draws, const ParameterLayout& layout,
                                   std::string_view team) {
    const int franchise = resolve_team(team);
    if (franchise < 0 || layout.team_position(franchise) < 0) {
        throw std::invalid_argument("unknown or unfitted team '" + std::string(team) + "'");
    }
    Eigen::VectorXd path(layout.n_seasons());
    for (int s = 0; s < layout.n_seasons(); ++s) {
        const std::string name = layout.location_name(
            layout.theta_location(layout.team_position(franchise), s));
        path[s] = draws.pooled(draws.require_param(name)).mean();
    }
    return path;
}

GpdFit fit_gpd_pwm(std::span<const double> exceedances) {
    GpdFit fit;
    const std::size_t m = exceedances.size();
    if (m < 5) return fit;
    // Hosking & Wallis (1987): with F(x) = 1 - (1 - k x / a)^{1/k},
    //   a0 = E[X] = a / (1 + k),  a1 = E[X (1-F)] = a / (2 (2 + k)),
    // estimated with the (i - 0.35)/m plotting position; xi = -k.
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = (static_cast<double>(i) + 0.65) / static_cast<double>(m);
        a0 += exceedances[i];
        a1 += exceedances[i] * (1.0 - p);
    }
    a0 /= static_cast<double>(m);
    a1 /= static_cast<double>(m);
    const double denom = a0 - 2.0 * a1;
    if (!(a0 > 0.0) || denom == 0.0) return fit;
    const double k = a0 / denom - 2.0;
    const double scale = 2.0 * a0 * a1 / denom;
    if (!std::isfinite(k) || !(scale > 0.0)) return fit;
    fit.xi = -k;
    fit.sigma = scale;
    fit.valid = true;
    return fit;
}

double gpd_quantile(const GpdFit& fit, double p) {
    if (std::abs(fit.xi) < 1e-12) {
        return -fit.sigma * std::log1p(-p);
    }
    return fit.sigma / fit.xi * (std::pow(1.0 - p, -fit.xi) - 1.0);
}

double ElpdReport::se() const {
    const Eigen::Index n = pointwise.size();
    if (n < 2) return 0.0;
    const double mean = pointwise.mean();
    const double var = (pointwise.array() - mean).square().sum() / static_cast<double>(n - 1);
    return std::sqrt(static_cast<double>(n) * var);
}

long ElpdReport::n_high_khat() const {
    long count = 0;
    for (Eigen::Index i = 0; i < khat.size(); ++i) {
        if (std::isfinite(khat[i]) && khat[i] > khat_warn) ++count;
    }
    return count;
}

namespace {

struct GamePsis {
    double elpd = 0.0;
    double khat = kNaN;
};

GamePsis psis_one_game(const Eigen::VectorXd& loglik, int game, const PsisOptions& options) {
    const Eigen::Index s = loglik.size();
    for (Eigen::Index i = 0; i < s; ++i) {
        if (!std::isfinite(loglik[i])) {
            throw std::runtime_error("non-finite log likelihood for game " + std::to_string(game));
        }
    }
    // Importance ratios for leaving this game out are 1/p(y_g | draw); work
    // with log ratios shifted so the largest is 0 (self-normalization makes
    // the shift irrelevant).
    Eigen::VectorXd log_ratio = -loglik;
    log_ratio.array() -= log_ratio.maxCoeff();

    GamePsis out;
    const Eigen::Index tail =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(0.2 * static_cast<double>(s)),
                               static_cast<Eigen::Index>(3.0 * std::sqrt(static_cast<double>(s))));
    if (options.smooth && tail >= 5 && tail < s) {
        std::vector<std::pair<double, Eigen::Index>> order(static_cast<std::size_t>(s));
        for (Eigen::Index i = 0; i < s; ++i) {
            order[static_cast<std::size_t>(i)] = {log_ratio[i], i};
        }
        std::sort(order.begin(), order.end());
        const double threshold = std::exp(order[static_cast<std::size_t>(s - tail - 1)].first);
        std::vector<double> exceed(static_cast<std::size_t>(tail));
        for (Eigen::Index j = 0; j < tail; ++j) {
            exceed[static_cast<std::size_t>(j)] =
                std::exp(order[static_cast<std::size_t>(s - tail + j)].first) - threshold;
        }
        const GpdFit fit = fit_gpd_pwm(exceed);
        if (fit.valid) {
            out.khat = fit.xi;
            const double cap = std::exp(log_ratio.maxCoeff());  // largest raw ratio
            for (Eigen::Index j = 0; j < tail; ++j) {
                const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(tail);
                const double smoothed = std::min(threshold + gpd_quantile(fit, p), cap);
                log_ratio[order[static_cast<std::size_t>(s - tail + j)].second] = std::log(smoothed);
            }
        }
    }

    out.elpd = log_sum_exp(log_ratio + loglik) - log_sum_exp(log_ratio);
    return out;
}

}  // namespace

ElpdReport psis_loo(int n_games, int n_draws,
                    const std::function<Eigen::VectorXd(int)>& loglik_column,
                    const PsisOptions& options) {
    if (n_draws < 100) {
        throw std::invalid_argument("PSIS-LOO needs at least 100 draws, got " +
                                    std::to_string(n_draws));
    }
    ElpdReport report;
    report.khat_warn = options.khat_warn;
    report.pointwise.resize(n_games);
    report.khat.resize(n_games);
    for (int g = 0; g < n_games; ++g) {
        const Eigen::VectorXd col = loglik_column(g);
        if (col.size() != n_draws) {
            throw std::invalid_argument("log-likelihood column length mismatch");
        }
        const GamePsis r = psis_one_game(col, g, options);
        report.pointwise[g] = r.elpd;
        report.khat[g] = r.khat;
    }
    return report;
}

ElpdReport psis_loo(const Eigen::MatrixXd& loglik, const PsisOptions& options) {
    return psis_loo(static_cast<int>(loglik.cols()), static_cast<int>(loglik.rows()),
                    [&loglik](int g) -> Eigen::VectorXd { return loglik.col(g); }, options);
}

ElpdComparison elpd_compare(const ElpdReport& a, const ElpdReport& b) {
    if (a.pointwise.size() != b.pointwise.size()) {
        throw std::invalid_argument("ELPD comparison over mismatched game sets");
    }
    const Eigen::VectorXd diffs = a.pointwise - b.pointwise;
    ElpdComparison out;
    out.diff = diffs.sum();
    const Eigen::Index n = diffs.size();
    if (n >= 2) {
        const double mean = diffs.mean();
        const double var = (diffs.array() - mean).square().sum() / static_cast<double>(n - 1);
        out.se = std::sqrt(static_cast<double>(n) * var);
    }
    out.num_se = out.se > 0.0 ? std::abs(out.diff) / out.se : 0.0;
    return out;
}

FitLoglikSource::FitLoglikSource(const PosteriorDraws& draws, const ParameterLayout& layout,
                                 const SeasonDataset& dataset) {
    const int total = draws.n_chains() * draws.n_retained();
    pooled_.resize(total, draws.n_params());
    Eigen::Index at = 0;
    for (const auto& chain : draws.chains) {
        pooled_.middleRows(at, chain.rows()) = chain;
        at += chain.rows();
    }
    sigma_game_col_ = draws.require_param("sigma_game");

    const DesignMatrix design = build_design(layout, dataset);
    games_.resize(dataset.games.size());
    // Column-major sparse: collect per-game coefficient lists once.
    for (int col = 0; col < design.X.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(design.X, col); it; ++it) {
            games_[static_cast<std::size_t>(it.row())].coeffs.emplace_back(col, it.value());
        }
    }
    for (Eigen::Index g = 0; g < design.y.size(); ++g) {
        games_[static_cast<std::size_t>(g)].y = design.y[g];
    }
    // Column order must match the draws' location order.
    for (int loc = 0; loc < layout.n_locations(); ++loc) {
        if (draws.names[static_cast<std::size_t>(loc)] != layout.location_name(loc)) {
            throw std::invalid_argument("draws do not match the layout's parameter order");
        }
    }
}

Eigen::VectorXd FitLoglikSource::column(int game) const {
    const GameRow& row = games_[static_cast<std::size_t>(game)];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(pooled_.rows());
    for (const auto& [col, coeff] : row.coeffs) {
        mean += coeff * pooled_.col(col);
    }
    const auto sigma = pooled_.col(sigma_game_col_).array();
    return (-kLogSqrt2Pi - sigma.log() -
            0.5 * ((row.y - mean.array()) / sigma).square())
        .matrix();
}

void write_posterior_summaries_csv(const std::vector<PosteriorSummary>& summaries,
                                   const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "param,median,ci_low,ci_high,prob_gt_zero\n";
    for (const auto& s : summaries) {
        out << s.parameter << ',' << format_double(s.median) << ',' << format_double(s.ci_low)
            << ',' << format_double(s.ci_high) << ',' << format_double(s.prob_gt_zero) << '\n';
    }
}

void figure_export(const PosteriorDraws& draws, std::span<const std::string> params,
                   const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "param,stat,lo,hi,value\n";
    for (const auto& name : params) {
        const Eigen::VectorXd values = draws.pooled(draws.require_param(name));
        const auto sorted = sorted_values(values);
        const double q1 = quantile_sorted(sorted, 0.25);
        const double q2 = quantile_sorted(sorted, 0.5);
        const double q3 = quantile_sorted(sorted, 0.75);
        const double iqr = q3 - q1;
        double whisker_low = sorted.front();
        double whisker_high = sorted.back();
        for (double v : sorted) {
            if (v >= q1 - 1.5 * iqr) {
                whisker_low = v;
                break;
            }
        }
        for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
            if (*it <= q3 + 1.5 * iqr) {
                whisker_high = *it;
                break;
            }
        }
        const auto stat_row = [&](const char* stat, double v) {
            out << name << ',' << stat << ",,," << format_double(v) << '\n';
        };
        stat_row("whisker_low", whisker_low);
        stat_row("q1", q1);
        stat_row("median", q2);
        stat_row("q3", q3);
        stat_row("whisker_high", whisker_high);

        const double lo = sorted.front();
        const double hi = sorted.back();
        const double width = (hi - lo) / kFigureHistogramBins;
        std::vector<long> counts(kFigureHistogramBins, 0);
        if (width > 0.0) {
            for (double v : sorted) {
                auto bin = static_cast<std::size_t>((v - lo) / width);
                if (bin >= counts.size()) bin = counts.size() - 1;
                ++counts[bin];
            }
        } else {
            counts[0] = static_cast<long>(sorted.size());
        }
        for (int b = 0; b < kFigureHistogramBins; ++b) {
            out << name << ",bin," << format_double(lo + b * width) << ','
                << format_double(lo + (b + 1) * width) << ',' << counts[static_cast<std::size_t>(b)]
                << '\n';
        }
    }
}

}  // namespace restadv
