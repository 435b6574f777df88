#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "restadv/model.hpp"
#include "restadv/sampler.hpp"

namespace restadv {

// Empirical quantile with linear interpolation between order statistics
// (h = (n-1)p). Input must be sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

struct PosteriorSummary {
    std::string parameter;
    double median = 0.0;
    double ci_low = 0.0;   // 2.5th percentile
    double ci_high = 0.0;  // 97.5th percentile
    double prob_gt_zero = 0.0;
};

PosteriorSummary summarize_values(std::string name, const Eigen::VectorXd& values);

// Median, equal-tailed 95% interval, and Pr(>0) over all retained draws
// pooled across chains.
PosteriorSummary summarize(const PosteriorDraws& draws, std::string_view parameter);

struct ProbComparison {
    double a_less_b = 0.0;
    double a_greater_b = 0.0;  // ties make up the remainder
};

// Drawwise comparison of two parameters of the same fit (paired by draw).
ProbComparison prob_comparison(const PosteriorDraws& draws, std::string_view param_a,
                               std::string_view param_b);

// Posterior of the season's home advantage, reconstructed per draw from the
// trend and intercept draws.
PosteriorSummary home_advantage_summary(const PosteriorDraws& draws, const ParameterLayout& layout,
                                        int season);

// Posterior mean strength per season for one team.
Eigen::VectorXd team_strength_path(const PosteriorDraws& draws, const ParameterLayout& layout,
                                   std::string_view team);

// --- PSIS-LOO ---------------------------------------------------------------

struct GpdFit {
    double xi = 0.0;     // shape (k-hat)
    double sigma = 0.0;  // scale
    bool valid = false;
};

// Probability-weighted-moments fit of the generalized Pareto distribution to
// threshold exceedances (sorted ascending).
GpdFit fit_gpd_pwm(std::span<const double> exceedances);

double gpd_quantile(const GpdFit& fit, double p);

struct PsisOptions {
    // Tail size M = min(floor(0.2 S), floor(3 sqrt(S))); smoothing is skipped
    // (plain importance sampling) when disabled or when M < 5.
    bool smooth = true;
    double khat_warn = 0.7;
};

struct ElpdReport {
    Eigen::VectorXd pointwise;  // per-game elpd
    Eigen::VectorXd khat;       // NaN where no tail fit was made
    double khat_warn = 0.7;

    double total() const { return pointwise.sum(); }
    // SE of the total: sqrt(n * sample variance of the pointwise values).
    double se() const;
    long n_high_khat() const;
};

// Leave-one-out ELPD by Pareto-smoothed importance sampling. The matrix holds
// per-draw log likelihoods, draws x games; at least 100 draws are required
// and non-finite entries raise an error naming the game.
ElpdReport psis_loo(const Eigen::MatrixXd& loglik, const PsisOptions& options = {});
// Column-provider form for large fits (column g = log likelihoods of game g
// across pooled draws).
ElpdReport psis_loo(int n_games, int n_draws,
                    const std::function<Eigen::VectorXd(int)>& loglik_column,
                    const PsisOptions& options = {});

struct ElpdComparison {
    double diff = 0.0;    // total_a - total_b
    double se = 0.0;      // sqrt(n * var(pointwise diffs))
    double num_se = 0.0;  // |diff| / se (0 when se is 0)
};

// Pairwise comparison over a common game set; throws when the pointwise
// vectors disagree in length.
ElpdComparison elpd_compare(const ElpdReport& a, const ElpdReport& b);

// Streams per-game log likelihoods implied by stored draws, column by game.
class FitLoglikSource {
public:
    FitLoglikSource(const PosteriorDraws& draws, const ParameterLayout& layout,
                    const SeasonDataset& dataset);

    int n_games() const { return static_cast<int>(games_.size()); }
    int n_draws() const { return static_cast<int>(pooled_.rows()); }
    Eigen::VectorXd column(int game) const;

private:
    struct GameRow {
        std::vector<std::pair<int, double>> coeffs;
        double y = 0.0;
    };
    Eigen::MatrixXd pooled_;  // draws x params
    std::vector<GameRow> games_;
    int sigma_game_col_ = 0;
};

// --- exports ----------------------------------------------------------------

void write_posterior_summaries_csv(const std::vector<PosteriorSummary>& summaries,
                                   const std::filesystem::path& path);

// Boxplot statistics (1.5 IQR whiskers) plus a fixed 100-bin histogram per
// parameter. Rows: param,stat,lo,hi,value with stat in
// {whisker_low,q1,median,q3,whisker_high,bin}.
inline constexpr int kFigureHistogramBins = 100;
void figure_export(const PosteriorDraws& draws, std::span<const std::string> params,
                   const std::filesystem::path& path);

}  // namespace restadv
