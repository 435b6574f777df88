#include "restadv/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "restadv/csv.hpp"
#include "restadv/teams.hpp"

namespace restadv {

namespace {

std::tuple<Date, int, int, int, int> game_order_key(const GameRecord& g) {
    return {g.kickoff, g.season, g.week, g.home_team, g.away_team};
}

void sort_dataset(SeasonDataset& ds) {
    std::sort(ds.games.begin(), ds.games.end(), [](const ClassifiedGame& a, const ClassifiedGame& b) {
        return game_order_key(a.game) < game_order_key(b.game);
    });
}

std::optional<int> parse_optional_moneyline(const CsvReader& csv, std::size_t col) {
    if (csv.field(col).empty()) return std::nullopt;
    const long v = csv.parse_long(col, "moneyline");
    if (std::abs(v) < 100) {
        csv.fail("moneyline magnitude below 100: " + std::to_string(v));
    }
    return static_cast<int>(v);
}

// Indicator combinations that occur on a regular NFL calendar. Anything the
// rules produce outside this set marks the rest pair as unclassifiable.
constexpr int kValidTriples[][3] = {
    // bye, mini, mnf
    {0, 0, 0},  {0, 0, 1},  {0, 0, -1},  {0, 1, 0},  {0, -1, 0},
    {0, 1, 1},  {0, -1, -1}, {1, 0, 0},  {-1, 0, 0}, {1, -1, 0},
    {-1, 1, 0}, {1, 0, 1},  {-1, 0, -1},
};

bool triple_is_valid(const RestIndicators& ind) {
    for (const auto& t : kValidTriples) {
        if (ind.bye == t[0] && ind.mini == t[1] && ind.mnf == t[2]) return true;
    }
    return false;
}

struct CellAccum {
    long n = 0;
    double point_diff_sum = 0.0;
    double wins = 0.0;
    double covers = 0.0;
    double exp_win_sum = 0.0;
    long exp_win_n = 0;

    void add(const GameRecord& g, bool home_side) {
        const double margin = home_side ? g.margin() : -g.margin();
        const double spread = home_side ? g.spread_home_margin : -g.spread_home_margin;
        ++n;
        point_diff_sum += margin;
        wins += margin > 0 ? 1.0 : (margin == 0 ? 0.5 : 0.0);
        const double edge = margin - spread;
        covers += edge > 0 ? 1.0 : (edge == 0 ? 0.5 : 0.0);
        if (g.home_moneyline && g.away_moneyline) {
            const auto [ph, pa] = implied_win_prob(*g.home_moneyline, *g.away_moneyline);
            exp_win_sum += home_side ? ph : pa;
            ++exp_win_n;
        }
    }

    SummaryRow row(std::string side, RestType type, std::string era) const {
        SummaryRow r;
        r.side = std::move(side);
        r.rest_type = type;
        r.era = std::move(era);
        r.n = n;
        if (n > 0) {
            r.point_diff = point_diff_sum / static_cast<double>(n);
            r.win_pct = wins / static_cast<double>(n);
            r.cover_pct = covers / static_cast<double>(n);
        }
        if (exp_win_n > 0) {
            r.exp_win_pct = exp_win_sum / static_cast<double>(exp_win_n);
        }
        return r;
    }
};

constexpr const char* kEras[] = {"2002-10", "2011-23", "All"};

int era_of(int season) { return season <= 2010 ? 0 : 1; }

}  // namespace

int SeasonDataset::first_season() const {
    int s = kSeasonMax + 1;
    for (const auto& g : games) s = std::min(s, g.game.season);
    return games.empty() ? kSeasonMin : s;
}

int SeasonDataset::last_season() const {
    int s = kSeasonMin - 1;
    for (const auto& g : games) s = std::max(s, g.game.season);
    return games.empty() ? kSeasonMin : s;
}

std::uint64_t SeasonDataset::content_digest() const {
    std::uint64_t h = kFnvOffset;
    auto mix_int = [&h](long v) { h = fnv1a_update(h, &v, sizeof v); };
    auto mix_double = [&h](double v) { h = fnv1a_update(h, &v, sizeof v); };
    mix_int(static_cast<long>(games.size()));
    for (const auto& cg : games) {
        const GameRecord& g = cg.game;
        mix_int(g.season);
        mix_int(g.week);
        mix_int(g.kickoff.time_since_epoch().count());
        mix_int(g.home_team);
        mix_int(g.away_team);
        mix_double(g.home_score);
        mix_double(g.away_score);
        mix_double(g.spread_home_margin);
        mix_int(g.home_moneyline ? *g.home_moneyline : -1);
        mix_int(g.away_moneyline ? *g.away_moneyline : -1);
        mix_int(g.neutral_site ? 1 : 0);
        mix_int(cg.rest.home_rest_days);
        mix_int(cg.rest.away_rest_days);
        mix_int(cg.indicators.bye * 9 + cg.indicators.mini * 3 + cg.indicators.mnf);
    }
    return h;
}

std::string_view drop_reason_name(DropReason r) {
    switch (r) {
        case DropReason::Rescheduled: return "Rescheduled";
        case DropReason::GameAfterRescheduled: return "GameAfterRescheduled";
        case DropReason::Cancelled: return "Cancelled";
        case DropReason::GameAfterCancelled: return "GameAfterCancelled";
    }
    return "?";
}

std::optional<DropReason> parse_drop_reason(std::string_view text) {
    std::string compact;
    for (char c : text) {
        if (c != ' ') compact.push_back(c);
    }
    if (compact == "Rescheduled") return DropReason::Rescheduled;
    if (compact == "GameAfterRescheduled") return DropReason::GameAfterRescheduled;
    if (compact == "Cancelled") return DropReason::Cancelled;
    if (compact == "GameAfterCancelled") return DropReason::GameAfterCancelled;
    return std::nullopt;
}

SeasonDataset load_games(const std::filesystem::path& games_csv) {
    CsvReader csv(games_csv);
    const std::size_t c_season = static_cast<std::size_t>(csv.require_column("season"));
    const std::size_t c_week = static_cast<std::size_t>(csv.require_column("week"));
    const std::size_t c_date = static_cast<std::size_t>(csv.require_column("date"));
    const std::size_t c_home = static_cast<std::size_t>(csv.require_column("home"));
    const std::size_t c_away = static_cast<std::size_t>(csv.require_column("away"));
    const std::size_t c_hs = static_cast<std::size_t>(csv.require_column("home_score"));
    const std::size_t c_as = static_cast<std::size_t>(csv.require_column("away_score"));
    const std::size_t c_spread = static_cast<std::size_t>(csv.require_column("spread_home_margin"));
    const std::size_t c_hml = static_cast<std::size_t>(csv.require_column("home_ml"));
    const std::size_t c_aml = static_cast<std::size_t>(csv.require_column("away_ml"));
    const std::size_t c_neutral = static_cast<std::size_t>(csv.require_column("neutral"));

    SeasonDataset ds;
    std::set<std::tuple<int, int, int, int>> seen_keys;
    while (csv.next_row()) {
        GameRecord g;
        g.season = static_cast<int>(csv.parse_long(c_season, "season"));
        if (g.season < kSeasonMin || g.season > kSeasonMax) {
            csv.fail("season out of range [2002, 2023]: " + std::to_string(g.season));
        }
        g.week = static_cast<int>(csv.parse_long(c_week, "week"));
        if (g.week < 1) csv.fail("week must be positive");
        try {
            g.kickoff = parse_iso_date(csv.field(c_date));
        } catch (const std::invalid_argument& e) {
            csv.fail(e.what());
        }
        g.home_team = resolve_team(csv.field(c_home));
        if (g.home_team < 0) csv.fail("unknown team code '" + std::string(csv.field(c_home)) + "'");
        g.away_team = resolve_team(csv.field(c_away));
        if (g.away_team < 0) csv.fail("unknown team code '" + std::string(csv.field(c_away)) + "'");
        if (g.home_team == g.away_team) csv.fail("home and away team are the same franchise");
        g.home_score = csv.parse_double(c_hs, "home_score");
        g.away_score = csv.parse_double(c_as, "away_score");
        if (g.home_score < 0 || g.away_score < 0) csv.fail("negative score");
        g.spread_home_margin = csv.parse_double(c_spread, "spread_home_margin");
        g.home_moneyline = parse_optional_moneyline(csv, c_hml);
        g.away_moneyline = parse_optional_moneyline(csv, c_aml);
        const std::string_view neutral = csv.field(c_neutral);
        if (neutral == "0") {
            g.neutral_site = false;
        } else if (neutral == "1") {
            g.neutral_site = true;
        } else {
            csv.fail("neutral must be 0 or 1");
        }
        if (!seen_keys.insert({g.season, g.week, g.home_team, g.away_team}).second) {
            csv.fail("duplicate game key (season, week, home, away)");
        }
        ds.games.push_back(ClassifiedGame{g, {}, {}});
    }
    ds.loaded = ds.games.size();
    ds.provenance = fnv1a_file(games_csv);
    sort_dataset(ds);
    return ds;
}

DropList load_drops(const std::filesystem::path& drops_csv) {
    CsvReader csv(drops_csv);
    const std::size_t c_season = static_cast<std::size_t>(csv.require_column("season"));
    const std::size_t c_week = static_cast<std::size_t>(csv.require_column("week"));
    const std::size_t c_home = static_cast<std::size_t>(csv.require_column("home"));
    const std::size_t c_away = static_cast<std::size_t>(csv.require_column("away"));
    const std::size_t c_reason = static_cast<std::size_t>(csv.require_column("reason"));

    DropList drops;
    std::set<std::tuple<int, int, int, int>> seen;
    while (csv.next_row()) {
        DropEntry e;
        e.season = static_cast<int>(csv.parse_long(c_season, "season"));
        e.week = static_cast<int>(csv.parse_long(c_week, "week"));
        e.home_team = resolve_team(csv.field(c_home));
        if (e.home_team < 0) csv.fail("unknown team code '" + std::string(csv.field(c_home)) + "'");
        e.away_team = resolve_team(csv.field(c_away));
        if (e.away_team < 0) csv.fail("unknown team code '" + std::string(csv.field(c_away)) + "'");
        const auto reason = parse_drop_reason(csv.field(c_reason));
        if (!reason) csv.fail("unknown drop reason '" + std::string(csv.field(c_reason)) + "'");
        e.reason = *reason;
        if (!seen.insert({e.season, e.week, e.home_team, e.away_team}).second) {
            csv.fail("duplicate drop entry");
        }
        drops.entries.push_back(e);
    }
    return drops;
}

SeasonDataset compute_rest(SeasonDataset dataset) {
    sort_dataset(dataset);
    // (season, team) -> date of the previous kickoff.
    std::map<std::pair<int, int>, Date> last_kickoff;
    for (auto& cg : dataset.games) {
        const GameRecord& g = cg.game;
        for (const bool home : {true, false}) {
            const int team = home ? g.home_team : g.away_team;
            int& rest = home ? cg.rest.home_rest_days : cg.rest.away_rest_days;
            const auto key = std::make_pair(g.season, team);
            const auto it = last_kickoff.find(key);
            if (it == last_kickoff.end()) {
                rest = kSeasonOpener;
            } else {
                const int days = days_between(it->second, g.kickoff);
                if (days == 0) {
                    throw std::runtime_error("team " + std::string(team_code(team)) +
                                             " has two games on " + to_iso_string(g.kickoff));
                }
                rest = days;
            }
            last_kickoff[key] = g.kickoff;
        }
    }
    return dataset;
}

RestIndicators classify_rest(int home_rest, int away_rest) {
    RestIndicators ind;
    if (home_rest == kSeasonOpener || away_rest == kSeasonOpener) {
        return ind;
    }
    const bool in_domain = home_rest >= kRestMin && home_rest <= kRestMax &&
                           away_rest >= kRestMin && away_rest <= kRestMax;
    if (!in_domain) {
        ind.unclassified = true;
        return ind;
    }

    const int diff = home_rest - away_rest;
    if (diff != 0 && std::min(home_rest, away_rest) <= 6) {
        ind.mnf = diff > 0 ? 1 : -1;
    }
    const bool home_mid = home_rest >= 9 && home_rest <= 11;
    const bool away_mid = away_rest >= 9 && away_rest <= 11;
    if (home_mid != away_mid && std::abs(diff) >= 2) {
        ind.mini = home_mid ? 1 : -1;
    }
    ind.bye = (home_rest >= 12 ? 1 : 0) - (away_rest >= 12 ? 1 : 0);

    if (!triple_is_valid(ind)) {
        ind = RestIndicators{};
        ind.unclassified = true;
    }
    return ind;
}

SeasonDataset classify_indicators(SeasonDataset dataset) {
    for (auto& cg : dataset.games) {
        cg.indicators = classify_rest(cg.rest.home_rest_days, cg.rest.away_rest_days);
    }
    return dataset;
}

ApplyDropsResult apply_drops(SeasonDataset dataset, const DropList& drops) {
    ApplyDropsResult result;
    std::set<std::tuple<int, int, int, int>> keys;
    for (const auto& e : drops.entries) {
        keys.insert({e.season, e.week, e.home_team, e.away_team});
    }
    std::set<std::tuple<int, int, int, int>> matched;
    auto& games = dataset.games;
    const auto removed_begin = std::remove_if(games.begin(), games.end(), [&](const ClassifiedGame& cg) {
        const std::tuple<int, int, int, int> key{cg.game.season, cg.game.week, cg.game.home_team,
                                                 cg.game.away_team};
        if (keys.count(key)) {
            matched.insert(key);
            return true;
        }
        return false;
    });
    const std::size_t removed = static_cast<std::size_t>(games.end() - removed_begin);
    games.erase(removed_begin, games.end());
    dataset.dropped += removed;

    for (const auto& e : drops.entries) {
        if (!matched.count({e.season, e.week, e.home_team, e.away_team})) {
            result.unmatched.push_back(e);
        }
    }
    for (const auto& cg : games) {
        if (cg.indicators.unclassified) result.unclassified_remaining.push_back(cg);
    }
    result.dataset = std::move(dataset);
    return result;
}

double moneyline_implied_prob(int line) {
    if (std::abs(line) < 100) {
        throw std::invalid_argument("moneyline magnitude below 100: " + std::to_string(line));
    }
    if (line > 0) {
        return 100.0 / (line + 100.0);
    }
    const double mag = -static_cast<double>(line);
    return mag / (mag + 100.0);
}

std::pair<double, double> implied_win_prob(int home_moneyline, int away_moneyline) {
    const double qh = moneyline_implied_prob(home_moneyline);
    const double qa = moneyline_implied_prob(away_moneyline);
    const double total = qh + qa;
    return {qh / total, qa / total};
}

std::string_view rest_type_name(RestType t) {
    switch (t) {
        case RestType::EquivalentRest: return "EquivalentRest";
        case RestType::Mnf: return "MNF";
        case RestType::Mini: return "Mini";
        case RestType::Bye: return "Bye";
    }
    return "?";
}

std::vector<SummaryRow> summary_table(const SeasonDataset& dataset) {
    // accum[side][type][era]: side 0 = away, 1 = home; era 0 = pre, 1 = post, 2 = all.
    CellAccum accum[2][4][3];
    auto add = [&](int side, RestType type, const GameRecord& g) {
        const int e = era_of(g.season);
        accum[side][static_cast<int>(type)][e].add(g, side == 1);
        accum[side][static_cast<int>(type)][2].add(g, side == 1);
    };
    for (const auto& cg : dataset.games) {
        if (cg.indicators.unclassified) continue;
        const auto& ind = cg.indicators;
        if (!ind.any()) {
            add(0, RestType::EquivalentRest, cg.game);
            add(1, RestType::EquivalentRest, cg.game);
            continue;
        }
        if (ind.mnf != 0) add(ind.mnf > 0 ? 1 : 0, RestType::Mnf, cg.game);
        if (ind.mini != 0) add(ind.mini > 0 ? 1 : 0, RestType::Mini, cg.game);
        if (ind.bye != 0) add(ind.bye > 0 ? 1 : 0, RestType::Bye, cg.game);
    }

    std::vector<SummaryRow> rows;
    for (int side = 0; side < 2; ++side) {
        for (const RestType type : {RestType::EquivalentRest, RestType::Mnf, RestType::Mini, RestType::Bye}) {
            for (int e = 0; e < 3; ++e) {
                rows.push_back(accum[side][static_cast<int>(type)][e].row(
                    side == 0 ? "Away" : "Home", type, kEras[e]));
            }
        }
    }
    return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "side,rest_type,era,n,point_diff,win_pct,exp_win_pct,cover_pct\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_fixed(*v, 3) : std::string{}; };
    for (const auto& r : rows) {
        out << r.side << ',' << rest_type_name(r.rest_type) << ',' << r.era << ',' << r.n << ','
            << cell(r.point_diff) << ',' << cell(r.win_pct) << ',' << cell(r.exp_win_pct) << ','
            << cell(r.cover_pct) << '\n';
    }
}

namespace {

void write_game_fields(std::ostream& out, const GameRecord& g) {
    out << g.season << ',' << g.week << ',' << to_iso_string(g.kickoff) << ','
        << team_code(g.home_team) << ',' << team_code(g.away_team) << ','
        << format_double(g.home_score) << ',' << format_double(g.away_score) << ','
        << format_double(g.spread_home_margin) << ','
        << (g.home_moneyline ? std::to_string(*g.home_moneyline) : std::string{}) << ','
        << (g.away_moneyline ? std::to_string(*g.away_moneyline) : std::string{}) << ','
        << (g.neutral_site ? '1' : '0');
}

std::string rest_field(int rest) {
    return rest == kSeasonOpener ? std::string("opener") : std::to_string(rest);
}

}  // namespace

void write_games_csv(const SeasonDataset& dataset, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "season,week,date,home,away,home_score,away_score,spread_home_margin,home_ml,away_ml,neutral\n";
    for (const auto& cg : dataset.games) {
        write_game_fields(out, cg.game);
        out << '\n';
    }
}

void write_classified_csv(const SeasonDataset& dataset, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "season,week,date,home,away,home_score,away_score,spread_home_margin,home_ml,away_ml,neutral,"
           "home_rest,away_rest,bye,mini,mnf,unclassified\n";
    for (const auto& cg : dataset.games) {
        write_game_fields(out, cg.game);
        out << ',' << rest_field(cg.rest.home_rest_days) << ',' << rest_field(cg.rest.away_rest_days)
            << ',' << cg.indicators.bye << ',' << cg.indicators.mini << ',' << cg.indicators.mnf << ','
            << (cg.indicators.unclassified ? 1 : 0) << '\n';
    }
}

IndicatorCounts count_indicators(const SeasonDataset& dataset) {
    IndicatorCounts c;
    for (const auto& cg : dataset.games) {
        if (cg.indicators.unclassified) {
            ++c.unclassified;
            continue;
        }
        if (cg.rest.home_rest_days == kSeasonOpener || cg.rest.away_rest_days == kSeasonOpener) {
            ++c.openers;
        }
        const auto& ind = cg.indicators;
        if (!ind.any()) ++c.equivalent;
        if (ind.mnf > 0) ++c.mnf_home;
        if (ind.mnf < 0) ++c.mnf_away;
        if (ind.mini > 0) ++c.mini_home;
        if (ind.mini < 0) ++c.mini_away;
        if (ind.bye > 0) ++c.bye_home;
        if (ind.bye < 0) ++c.bye_away;
    }
    return c;
}

}  // namespace restadv
