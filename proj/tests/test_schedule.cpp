#include <doctest.h>

#include <set>

#include "restadv/schedule.hpp"
#include "restadv/teams.hpp"
#include "rest_table.hpp"
#include "testutil.hpp"

using namespace restadv;
using restadv::test::kRestRows;

TEST_CASE("classify_rest reproduces every enumerated indicator row exactly") {
    for (const auto& row : kRestRows) {
        const RestIndicators ind = classify_rest(row.home_rest, row.away_rest);
        CAPTURE(row.home_rest);
        CAPTURE(row.away_rest);
        CHECK_FALSE(ind.unclassified);
        CHECK(ind.bye == row.bye);
        CHECK(ind.mini == row.mini);
        CHECK(ind.mnf == row.mnf);
    }
}

TEST_CASE("classify_rest is antisymmetric over the whole rest domain") {
    for (int a = kRestMin; a <= kRestMax; ++a) {
        for (int b = kRestMin; b <= kRestMax; ++b) {
            const RestIndicators ab = classify_rest(a, b);
            const RestIndicators ba = classify_rest(b, a);
            CAPTURE(a);
            CAPTURE(b);
            CHECK(ab.bye == -ba.bye);
            CHECK(ab.mini == -ba.mini);
            CHECK(ab.mnf == -ba.mnf);
            CHECK(ab.unclassified == ba.unclassified);
            CHECK_FALSE(ab.unclassified);  // every in-domain pair classifies
        }
    }
}

TEST_CASE("equal rest and season openers carry no indicators") {
    for (int a = kRestMin; a <= kRestMax; ++a) {
        CHECK(classify_rest(a, a) == RestIndicators{});
    }
    CHECK(classify_rest(kSeasonOpener, kSeasonOpener) == RestIndicators{});
    CHECK(classify_rest(kSeasonOpener, 7) == RestIndicators{});
    CHECK(classify_rest(14, kSeasonOpener) == RestIndicators{});
}

TEST_CASE("out-of-domain rest flags the pair for dropping") {
    CHECK(classify_rest(3, 7).unclassified);
    CHECK(classify_rest(7, 16).unclassified);
    CHECK(classify_rest(20, 2).unclassified);
}

namespace {

const char* kGamesHeader =
    "season,week,date,home,away,home_score,away_score,spread_home_margin,home_ml,away_ml,neutral\n";

}  // namespace

TEST_CASE("load_games parses, canonicalizes, and orders rows") {
    test::TempDir dir("load");
    test::write_file(dir.file("games.csv"),
                     std::string(kGamesHeader) +
                         "2019,2,2019-09-15,KC,OAK,28,10,6.5,-280,230,0\n"
                         "2019,1,2019-09-08,NE,PIT,33,3,5.5,,,0\n"
                         "2019,1,2019-09-09,NO,HOU,30,28,7,-320,260,1\n");
    const SeasonDataset ds = load_games(dir.file("games.csv"));
    CHECK(ds.loaded == 3);
    CHECK(ds.modeled() == 3);
    CHECK(ds.games[0].game.home_team == resolve_team("NE"));
    CHECK(ds.games[1].game.neutral_site);
    CHECK(ds.games[2].game.away_team == resolve_team("LV"));  // OAK folded into LV
    CHECK(ds.games[0].game.home_moneyline == std::nullopt);
    CHECK(ds.games[2].game.home_moneyline == -280);
    CHECK(ds.provenance != 0);
}

TEST_CASE("load_games handles the empty file and rejects bad rows") {
    test::TempDir dir("load_err");
    test::write_file(dir.file("empty.csv"), kGamesHeader);
    CHECK(load_games(dir.file("empty.csv")).modeled() == 0);

    test::write_file(dir.file("same.csv"),
                     std::string(kGamesHeader) + "2019,1,2019-09-08,NE,NE,10,3,1,,,0\n");
    CHECK_THROWS_WITH_AS(load_games(dir.file("same.csv")),
                         doctest::Contains("same franchise"), std::runtime_error);

    test::write_file(dir.file("team.csv"),
                     std::string(kGamesHeader) + "2019,1,2019-09-08,XXX,NE,10,3,1,,,0\n");
    CHECK_THROWS_WITH_AS(load_games(dir.file("team.csv")),
                         doctest::Contains("unknown team"), std::runtime_error);

    test::write_file(dir.file("dup.csv"), std::string(kGamesHeader) +
                                              "2019,1,2019-09-08,NE,PIT,10,3,1,,,0\n"
                                              "2019,1,2019-09-08,NE,PIT,10,3,1,,,0\n");
    CHECK_THROWS_WITH_AS(load_games(dir.file("dup.csv")),
                         doctest::Contains("duplicate game key"), std::runtime_error);

    // Malformed rows carry the line number.
    test::write_file(dir.file("short.csv"),
                     std::string(kGamesHeader) + "2019,1,2019-09-08,NE,PIT,10,3\n");
    CHECK_THROWS_WITH_AS(load_games(dir.file("short.csv")), doctest::Contains(":2:"),
                         std::runtime_error);

    test::write_file(dir.file("ml.csv"),
                     std::string(kGamesHeader) + "2019,1,2019-09-08,NE,PIT,10,3,1,-50,120,0\n");
    CHECK_THROWS_AS(load_games(dir.file("ml.csv")), std::runtime_error);

    test::write_file(dir.file("season.csv"),
                     std::string(kGamesHeader) + "1999,1,1999-09-08,NE,PIT,10,3,1,,,0\n");
    CHECK_THROWS_WITH_AS(load_games(dir.file("season.csv")), doctest::Contains("season"),
                         std::runtime_error);
}

TEST_CASE("compute_rest counts whole days since the previous kickoff") {
    test::TempDir dir("rest");
    test::write_file(dir.file("games.csv"), std::string(kGamesHeader) +
                                                "2023,1,2023-09-10,NE,PIT,10,3,1,,,0\n"
                                                "2023,1,2023-09-11,NYJ,BUF,10,3,1,,,0\n"
                                                "2023,2,2023-09-17,NE,NYJ,10,3,1,,,0\n"
                                                "2023,2,2023-09-17,PIT,CLE,10,3,1,,,0\n");
    const SeasonDataset ds = compute_rest(load_games(dir.file("games.csv")));
    // Week-2 NE hosted NYJ: Sunday-to-Sunday for NE, Monday-to-Sunday for NYJ.
    const auto& g = ds.games[2];
    CHECK(g.game.home_team == resolve_team("NE"));
    CHECK(g.rest.home_rest_days == 7);
    CHECK(g.rest.away_rest_days == 6);
    CHECK(ds.games[0].rest.home_rest_days == kSeasonOpener);
    CHECK(ds.games[3].rest.away_rest_days == kSeasonOpener);  // CLE's first game
}

TEST_CASE("compute_rest rejects two games for one team on the same date") {
    test::TempDir dir("rest2");
    test::write_file(dir.file("games.csv"), std::string(kGamesHeader) +
                                                "2023,1,2023-09-10,NE,PIT,10,3,1,,,0\n"
                                                "2023,1,2023-09-10,BUF,NE,10,3,1,,,0\n");
    CHECK_THROWS_WITH_AS(compute_rest(load_games(dir.file("games.csv"))),
                         doctest::Contains("two games"), std::runtime_error);
}

TEST_CASE("rest within a season resets across seasons") {
    test::TempDir dir("rest3");
    test::write_file(dir.file("games.csv"), std::string(kGamesHeader) +
                                                "2022,18,2023-01-08,NE,PIT,10,3,1,,,0\n"
                                                "2023,1,2023-09-10,NE,PIT,10,3,1,,,0\n");
    const SeasonDataset ds = compute_rest(load_games(dir.file("games.csv")));
    CHECK(ds.games[1].rest.home_rest_days == kSeasonOpener);
}

TEST_CASE("apply_drops removes listed games and reports unmatched entries") {
    test::TempDir dir("drops");
    test::write_file(dir.file("games.csv"), std::string(kGamesHeader) +
                                                "2022,17,2023-01-02,CIN,BUF,0,0,-1,,,0\n"
                                                "2022,17,2023-01-01,NE,MIA,23,21,2,,,0\n"
                                                "2022,18,2023-01-08,BUF,NE,35,23,7,,,0\n");
    SeasonDataset ds = classify_indicators(compute_rest(load_games(dir.file("games.csv"))));

    SUBCASE("empty drop list leaves the dataset unchanged") {
        const ApplyDropsResult r = apply_drops(ds, DropList{});
        CHECK(r.dataset.modeled() == 3);
        CHECK(r.dataset.dropped == 0);
        CHECK(r.unmatched.empty());
    }

    SUBCASE("listed game is removed with its reason") {
        test::write_file(dir.file("drops.csv"),
                         "season,week,home,away,reason\n"
                         "2022,17,CIN,BUF,Cancelled\n"
                         "2022,18,BUF,NE,Game After Cancelled\n"
                         "2013,1,NE,PIT,Rescheduled\n");
        const DropList drops = load_drops(dir.file("drops.csv"));
        CHECK(drops.entries.size() == 3);
        CHECK(drops.entries[1].reason == DropReason::GameAfterCancelled);
        const ApplyDropsResult r = apply_drops(ds, drops);
        CHECK(r.dataset.modeled() == 1);
        CHECK(r.dataset.dropped == 2);
        REQUIRE(r.unmatched.size() == 1);
        CHECK(r.unmatched[0].season == 2013);
    }
}

TEST_CASE("implied win probabilities normalize the vig away") {
    const auto symmetric_neg = implied_win_prob(-110, -110);
    CHECK(symmetric_neg.first == doctest::Approx(0.5));
    CHECK(symmetric_neg.second == doctest::Approx(0.5));
    const auto symmetric_pos = implied_win_prob(100, 100);
    CHECK(symmetric_pos.first == doctest::Approx(0.5));

    // Direct arithmetic: q_h = 200/300, q_a = 100/270, then normalize.
    const double qh = 200.0 / 300.0;
    const double qa = 100.0 / 270.0;
    const auto p = implied_win_prob(-200, 170);
    CHECK(p.first == doctest::Approx(qh / (qh + qa)).epsilon(1e-12));
    CHECK(p.second == doctest::Approx(qa / (qh + qa)).epsilon(1e-12));

    CHECK_THROWS_AS(implied_win_prob(-50, 120), std::invalid_argument);

    for (int h : {-400, -150, 105, 250}) {
        for (int a : {-300, -120, 110, 330}) {
            const auto [ph, pa] = implied_win_prob(h, a);
            CHECK(ph + pa == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(ph > 0.0);
            CHECK(ph < 1.0);
        }
    }
}

namespace {

SeasonDataset summary_fixture() {
    // Hand-built games with known cell contributions.
    std::vector<test::GameSpec> specs;
    // Pre-era home bye advantage, margin +7 vs spread +3: win and cover.
    specs.push_back({2002, 10, 0, 1, 7.0, 3.0, false, RestIndicators{1, 0, 0, false}});
    // Pre-era away bye advantage, margin -3: away wins by 3, spread 0 -> away covers.
    specs.push_back({2003, 10, 2, 3, -3.0, 0.0, false, RestIndicators{-1, 0, 0, false}});
    // Post-era tie with a push on the spread, equivalent rest.
    specs.push_back({2012, 5, 4, 5, 0.0, 0.0, false, RestIndicators{}});
    // Post-era home MNF + mini advantage together.
    specs.push_back({2015, 8, 6, 7, -2.0, 4.0, false, RestIndicators{0, 1, 1, false}});
    SeasonDataset ds = test::make_dataset(specs);
    ds.games[0].game.home_moneyline = -150;
    ds.games[0].game.away_moneyline = 130;
    return ds;
}

const SummaryRow& find_row(const std::vector<SummaryRow>& rows, const std::string& side,
                           RestType type, const std::string& era) {
    for (const auto& r : rows) {
        if (r.side == side && r.rest_type == type && r.era == era) return r;
    }
    REQUIRE(false);
    return rows.front();
}

}  // namespace

TEST_CASE("summary table aggregates by advantaged side, category, and era") {
    const auto rows = summary_table(summary_fixture());
    CHECK(rows.size() == 2 * 4 * 3);

    const auto& home_bye_pre = find_row(rows, "Home", RestType::Bye, "2002-10");
    CHECK(home_bye_pre.n == 1);
    CHECK(*home_bye_pre.point_diff == doctest::Approx(7.0));
    CHECK(*home_bye_pre.win_pct == doctest::Approx(1.0));
    CHECK(*home_bye_pre.cover_pct == doctest::Approx(1.0));
    // Expected win pct from the moneylines: 150/250 normalized against 100/230.
    const double qh = 150.0 / 250.0, qa = 100.0 / 230.0;
    CHECK(*home_bye_pre.exp_win_pct == doctest::Approx(qh / (qh + qa)));

    const auto& away_bye_pre = find_row(rows, "Away", RestType::Bye, "2002-10");
    CHECK(away_bye_pre.n == 1);
    CHECK(*away_bye_pre.point_diff == doctest::Approx(3.0));  // away perspective
    CHECK_FALSE(away_bye_pre.exp_win_pct.has_value());        // no lines on that game

    // Tie counts half a win, push counts half a cover.
    const auto& home_eq_post = find_row(rows, "Home", RestType::EquivalentRest, "2011-23");
    CHECK(home_eq_post.n == 1);
    CHECK(*home_eq_post.win_pct == doctest::Approx(0.5));
    CHECK(*home_eq_post.cover_pct == doctest::Approx(0.5));

    // One game can contribute to two categories for the same side.
    CHECK(find_row(rows, "Home", RestType::Mnf, "2011-23").n == 1);
    CHECK(find_row(rows, "Home", RestType::Mini, "2011-23").n == 1);
    CHECK(*find_row(rows, "Home", RestType::Mnf, "All").point_diff == doctest::Approx(-2.0));

    // Empty cells stay null.
    const auto& away_mnf_pre = find_row(rows, "Away", RestType::Mnf, "2002-10");
    CHECK(away_mnf_pre.n == 0);
    CHECK_FALSE(away_mnf_pre.point_diff.has_value());
}

TEST_CASE("equivalent-rest rows mirror between home and away") {
    CounterRng rng(31, 0);
    std::vector<test::GameSpec> specs;
    for (int i = 0; i < 200; ++i) {
        test::GameSpec s;
        s.season = 2002 + static_cast<int>(rng.below(22));
        s.week = 1 + static_cast<int>(rng.below(17));
        s.home = static_cast<int>(rng.below(16)) * 2;
        s.away = s.home + 1;
        s.margin = std::round(rng.normal(0.0, 10.0));
        s.spread = std::round(rng.normal(0.0, 5.0));
        specs.push_back(s);
    }
    const auto rows = summary_table(test::make_dataset(specs));
    for (const char* era : {"2002-10", "2011-23", "All"}) {
        const auto& home = find_row(rows, "Home", RestType::EquivalentRest, era);
        const auto& away = find_row(rows, "Away", RestType::EquivalentRest, era);
        CHECK(home.n == away.n);
        if (home.n > 0) {
            CHECK(*home.point_diff == doctest::Approx(-*away.point_diff));
        }
    }
}

TEST_CASE("games csv writer round-trips through the loader") {
    test::TempDir dir("roundtrip");
    std::vector<test::GameSpec> specs;
    specs.push_back({2005, 1, 0, 1, 3.5, -2.5, false, {}});
    specs.push_back({2005, 2, 2, 3, -10.0, 0.0, true, {}});
    SeasonDataset ds = test::make_dataset(specs);
    ds.games[0].game.home_moneyline = -120;
    ds.games[0].game.away_moneyline = 100;
    write_games_csv(ds, dir.file("out.csv"));
    const SeasonDataset back = load_games(dir.file("out.csv"));
    REQUIRE(back.modeled() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.games[i].game.season == ds.games[i].game.season);
        CHECK(back.games[i].game.kickoff == ds.games[i].game.kickoff);
        CHECK(back.games[i].game.home_score == ds.games[i].game.home_score);
        CHECK(back.games[i].game.spread_home_margin == ds.games[i].game.spread_home_margin);
        CHECK(back.games[i].game.home_moneyline == ds.games[i].game.home_moneyline);
        CHECK(back.games[i].game.neutral_site == ds.games[i].game.neutral_site);
    }
}
