#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "restadv/calendar.hpp"

namespace restadv {

inline constexpr int kSeasonMin = 2002;
inline constexpr int kSeasonMax = 2023;

// Rest-day bounds of a regular schedule; anything outside (other than a
// season opener) is a scheduling anomaly.
inline constexpr int kRestMin = 4;
inline constexpr int kRestMax = 15;

// Sentinel for a team's first game of a season.
inline constexpr int kSeasonOpener = -1;

struct GameRecord {
    int season = 0;
    int week = 0;
    Date kickoff{};
    int home_team = -1;  // franchise index, see teams.hpp
    int away_team = -1;
    double home_score = 0.0;
    double away_score = 0.0;
    // Market-expected home margin: positive means the home side is favored.
    // (The conventionally quoted home spread is the negative of this.)
    double spread_home_margin = 0.0;
    std::optional<int> home_moneyline;
    std::optional<int> away_moneyline;
    bool neutral_site = false;

    double margin() const { return home_score - away_score; }
};

struct RestProfile {
    int home_rest_days = kSeasonOpener;
    int away_rest_days = kSeasonOpener;
};

// Signed rest-advantage indicators: +1 home side holds the edge, -1 away.
struct RestIndicators {
    int bye = 0;
    int mini = 0;
    int mnf = 0;
    // Set when the rest pair falls outside the regular scheduling domain or
    // produces an indicator combination never seen on a regular calendar.
    bool unclassified = false;

    bool any() const { return bye != 0 || mini != 0 || mnf != 0; }
    bool operator==(const RestIndicators&) const = default;
};

enum class DropReason {
    Rescheduled,
    GameAfterRescheduled,
    Cancelled,
    GameAfterCancelled,
};

std::string_view drop_reason_name(DropReason r);
std::optional<DropReason> parse_drop_reason(std::string_view text);

struct DropEntry {
    int season = 0;
    int week = 0;
    int home_team = -1;
    int away_team = -1;
    DropReason reason = DropReason::Rescheduled;
};

struct DropList {
    std::vector<DropEntry> entries;
};

struct ClassifiedGame {
    GameRecord game;
    RestProfile rest;
    RestIndicators indicators;
};

struct SeasonDataset {
    std::vector<ClassifiedGame> games;
    std::uint64_t provenance = 0;  // FNV-1a digest of the source
    std::size_t loaded = 0;
    std::size_t dropped = 0;

    std::size_t modeled() const { return games.size(); }
    int first_season() const;
    int last_season() const;
    // Digest over in-memory contents (used for synthetic datasets and for
    // pairing fits with the data they were drawn against).
    std::uint64_t content_digest() const;
};

// --- ingestion ------------------------------------------------------------

// Loads the games CSV (schema:
//   season,week,date,home,away,home_score,away_score,spread_home_margin,home_ml,away_ml,neutral
// ). Rows are validated, team codes canonicalized, and the result ordered by
// kickoff date then (season, week, home, away). Rest and indicators are not
// yet set. Throws std::runtime_error with file/line context.
SeasonDataset load_games(const std::filesystem::path& games_csv);

DropList load_drops(const std::filesystem::path& drops_csv);

// Fills each game's RestProfile: whole days since the team's previous
// kickoff in the same season, or kSeasonOpener for its first game. Throws if
// a team has two games on one date.
SeasonDataset compute_rest(SeasonDataset dataset);

// Indicator rules for one rest pair (values in [4,15] or kSeasonOpener):
//   MNF:  at least one day of rest difference and the disadvantaged team on
//         six days or less; sign points at the better-rested side.
//   Mini: exactly one side rested 9-11 days and the gap is two days or more;
//         sign points at the 9-11 side.
//   Bye:  I(home_rest >= 12) - I(away_rest >= 12).
// Season openers classify as (0,0,0). Out-of-domain rests flag unclassified.
RestIndicators classify_rest(int home_rest, int away_rest);

// Applies classify_rest to every game.
SeasonDataset classify_indicators(SeasonDataset dataset);

struct ApplyDropsResult {
    SeasonDataset dataset;
    // Drop entries that matched no loaded game (warning, not fatal).
    std::vector<DropEntry> unmatched;
    // Games still flagged unclassified after the drops were applied; on a
    // clean dataset the drop list covers all of them.
    std::vector<ClassifiedGame> unclassified_remaining;
};

ApplyDropsResult apply_drops(SeasonDataset dataset, const DropList& drops);

// --- betting-market helpers ------------------------------------------------

// Raw implied probability of one American moneyline (|line| >= 100).
double moneyline_implied_prob(int line);

// Both lines converted and normalized to sum to one (proportional vig
// removal). Throws std::invalid_argument when |line| < 100.
std::pair<double, double> implied_win_prob(int home_moneyline, int away_moneyline);

// --- summary table ----------------------------------------------------------

enum class RestType { EquivalentRest, Mnf, Mini, Bye };
std::string_view rest_type_name(RestType t);

struct SummaryRow {
    std::string side;       // "Away" / "Home"
    RestType rest_type = RestType::EquivalentRest;
    std::string era;        // "2002-10" / "2011-23" / "All"
    long n = 0;
    std::optional<double> point_diff;
    std::optional<double> win_pct;
    std::optional<double> exp_win_pct;  // mean implied win prob, lines present
    std::optional<double> cover_pct;
};

// One row per side x rest-type x era, from the advantaged side's
// perspective. A game with all-zero indicators counts as equivalent rest for
// both sides; a nonzero indicator adds the game to that category for the
// advantaged side only. Ties and pushes count half. Games still flagged
// unclassified are excluded.
std::vector<SummaryRow> summary_table(const SeasonDataset& dataset);

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

// Games CSV writer (same schema as load_games); also used for synthetic data.
void write_games_csv(const SeasonDataset& dataset, const std::filesystem::path& path);

// Extended CSV with rest and indicator columns appended.
void write_classified_csv(const SeasonDataset& dataset, const std::filesystem::path& path);

// Per-category counts used for ingest reporting.
struct IndicatorCounts {
    long mnf_home = 0, mnf_away = 0;
    long mini_home = 0, mini_away = 0;
    long bye_home = 0, bye_away = 0;
    long equivalent = 0;  // all-zero indicator games (openers included)
    long openers = 0;
    long unclassified = 0;
};
IndicatorCounts count_indicators(const SeasonDataset& dataset);

}  // namespace restadv
