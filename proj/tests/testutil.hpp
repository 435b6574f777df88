#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "restadv/model.hpp"
#include "restadv/params.hpp"
#include "restadv/rng.hpp"
#include "restadv/schedule.hpp"

namespace restadv::test {

// Minimal game description for hand-built instances; indicators are set
// directly, so rest profiles are only nominal.
struct GameSpec {
    int season = 2002;
    int week = 1;
    int home = 0;
    int away = 1;
    double margin = 0.0;
    double spread = 0.0;
    bool neutral = false;
    RestIndicators indicators{};
};

inline SeasonDataset make_dataset(const std::vector<GameSpec>& specs) {
    SeasonDataset ds;
    for (const auto& spec : specs) {
        GameRecord g;
        g.season = spec.season;
        g.week = spec.week;
        g.kickoff = parse_iso_date(std::to_string(spec.season) + "-09-01") +
                    std::chrono::days{7 * (spec.week - 1)};
        g.home_team = spec.home;
        g.away_team = spec.away;
        g.home_score = 30.0 + spec.margin / 2.0;
        g.away_score = 30.0 - spec.margin / 2.0;
        g.spread_home_margin = spec.spread;
        g.neutral_site = spec.neutral;
        ClassifiedGame cg;
        cg.game = g;
        cg.rest = RestProfile{7, 7};
        cg.indicators = spec.indicators;
        ds.games.push_back(cg);
    }
    ds.loaded = ds.games.size();
    return ds;
}

inline ParameterLayout make_layout(int n_teams, int first_season, int n_seasons,
                                   ModelVariant variant) {
    std::vector<int> ids(static_cast<std::size_t>(n_teams));
    std::iota(ids.begin(), ids.end(), 0);
    return ParameterLayout(ids, first_season, n_seasons, variant);
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> values, Cdf cdf) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = cdf(values[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
    }
    return d;
}

// Asymptotic critical value at level 0.01.
inline double ks_critical_01(std::size_t n) {
    return 1.6276 / std::sqrt(static_cast<double>(n));
}

inline double sample_mean(const Eigen::VectorXd& v) { return v.mean(); }

inline double sample_sd(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

// Central finite difference of a scalar function of a vector.
template <typename F>
Eigen::VectorXd finite_difference(const F& f, const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + step;
        const double up = f(xp);
        xp[i] = x[i] - step;
        const double down = f(xp);
        xp[i] = x[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("restadv_test_" + tag + "_" + std::to_string(++counter));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace restadv::test
