#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "restadv/csv.hpp"
#include "restadv/diagnostics.hpp"
#include "restadv/draws_io.hpp"
#include "restadv/evaluation.hpp"
#include "restadv/model.hpp"
#include "restadv/schedule.hpp"
#include "restadv/teams.hpp"

namespace restadv::cli {

namespace {

void ensure_exists(const std::filesystem::path& p, const char* what) {
    if (p.empty()) {
        throw ConfigError(std::string(what) + " path not given");
    }
    if (!std::filesystem::exists(p)) {
        throw ConfigError(std::string(what) + " file not found: " + p.string());
    }
}

void prepare_out_dir(const CommonOptions& common) {
    std::error_code ec;
    std::filesystem::create_directories(common.out, ec);
    if (ec || !std::filesystem::is_directory(common.out)) {
        throw ConfigError("cannot create output directory " + common.out.string());
    }
    if (!common.resolved_config.empty()) {
        auto out = open_output(common.out / "resolved_config.txt");
        out << common.resolved_config;
    }
}

struct IngestResult {
    SeasonDataset dataset;
    std::vector<DropEntry> unmatched_drops;
    std::size_t unclassified = 0;
};

IngestResult ingest_pipeline(const CommonOptions& common) {
    ensure_exists(common.games, "games");
    SeasonDataset ds = classify_indicators(compute_rest(load_games(common.games)));
    IngestResult result;
    if (!common.drops.empty()) {
        ensure_exists(common.drops, "drops");
        ApplyDropsResult dropped = apply_drops(std::move(ds), load_drops(common.drops));
        result.dataset = std::move(dropped.dataset);
        result.unmatched_drops = std::move(dropped.unmatched);
        result.unclassified = dropped.unclassified_remaining.size();
    } else {
        result.dataset = std::move(ds);
        for (const auto& cg : result.dataset.games) {
            if (cg.indicators.unclassified) ++result.unclassified;
        }
    }
    return result;
}

void print_counts(const IngestResult& ingest) {
    const SeasonDataset& ds = ingest.dataset;
    const IndicatorCounts c = count_indicators(ds);
    std::cout << "loaded: " << ds.loaded << "\n"
              << "dropped: " << ds.dropped << "\n"
              << "modeled: " << ds.modeled() << "\n"
              << "mnf advantages: home " << c.mnf_home << ", away " << c.mnf_away << " (total "
              << c.mnf_home + c.mnf_away << ")\n"
              << "mini advantages: home " << c.mini_home << ", away " << c.mini_away << " (total "
              << c.mini_home + c.mini_away << ")\n"
              << "bye advantages: home " << c.bye_home << ", away " << c.bye_away << " (total "
              << c.bye_home + c.bye_away << ")\n"
              << "equivalent rest: " << c.equivalent << " (openers " << c.openers << ")\n";
    if (c.unclassified > 0) {
        std::cout << "warning: " << c.unclassified << " unclassified games remain in the data\n";
    }
    for (const auto& e : ingest.unmatched_drops) {
        std::cout << "warning: drop entry matched no game: " << e.season << " wk" << e.week << " "
                  << team_code(e.home_team) << " vs " << team_code(e.away_team) << "\n";
    }
}

std::string model_suffix(const ModelVariant& variant) {
    return "m" + std::to_string(variant.model_number());
}

PosteriorDraws load_draws_file(const std::filesystem::path& path, int model_override) {
    ensure_exists(path, "draws");
    PosteriorDraws draws = read_draws(path);
    if (model_override > 0) {
        draws.variant = ModelVariant::from_model_number(model_override);
    }
    return draws;
}

}  // namespace

std::vector<std::string> headline_parameters(const PosteriorDraws& draws) {
    std::vector<std::string> out;
    for (const auto& name : draws.names) {
        if (name.rfind("theta[", 0) != 0) out.push_back(name);
    }
    return out;
}

ParameterLayout layout_from_draws(const PosteriorDraws& draws) {
    std::set<int> franchises;
    std::set<int> seasons;
    bool split = false;
    for (const auto& name : draws.names) {
        if (name.rfind("theta[", 0) == 0) {
            const auto sep = name.find(':');
            const auto close = name.find(']');
            if (sep == std::string::npos || close == std::string::npos) continue;
            const int team = resolve_team(name.substr(6, sep - 6));
            if (team < 0) {
                throw std::runtime_error("unknown team in draws parameter " + name);
            }
            franchises.insert(team);
            seasons.insert(std::stoi(name.substr(sep + 1, close - sep - 1)));
        } else if (name == "alpha_bye_pre") {
            split = true;
        }
    }
    if (franchises.empty() || seasons.empty()) {
        throw std::runtime_error("draws carry no team-strength parameters; cannot infer layout");
    }
    ModelVariant variant = draws.variant;
    variant.bye = split ? ByeStructure::Split2011 : ByeStructure::Constant;
    const int first = *seasons.begin();
    const int last = *seasons.rbegin();
    return ParameterLayout(std::vector<int>(franchises.begin(), franchises.end()), first,
                           last - first + 1, variant);
}

int cmd_ingest(const CommonOptions& common) {
    prepare_out_dir(common);
    IngestResult ingest = ingest_pipeline(common);
    write_classified_csv(ingest.dataset, common.out / "classified_games.csv");
    write_summary_csv(summary_table(ingest.dataset), common.out / "summary_table.csv");
    print_counts(ingest);
    return 0;
}

int cmd_fit(const CommonOptions& common, const FitOptions& fit) {
    prepare_out_dir(common);
    IngestResult ingest = ingest_pipeline(common);
    const ModelVariant variant = ModelVariant::from_model_number(fit.model);

    PosteriorDraws draws = run_chains(ingest.dataset, variant, PriorConfig{}, fit.chain);

    const std::string suffix = model_suffix(variant);
    if (fit.draws_format == "csv" || fit.draws_format == "both") {
        write_draws_csv(draws, common.out / ("draws_" + suffix + ".csv"));
    }
    if (fit.draws_format == "bin" || fit.draws_format == "both") {
        write_draws_binary(draws, common.out / ("draws_" + suffix + ".bin"));
    }

    const std::vector<std::string> gate_params = headline_parameters(draws);
    const ConvergenceReport report =
        fit.diagnose_all ? compute_convergence(draws)
                         : compute_convergence(draws, gate_params);
    ConvergenceReport gated = report;
    gated.rhat_threshold = fit.rhat_max;
    gated.ess_threshold = fit.ess_min;
    write_convergence_csv(report, common.out / ("convergence_" + suffix + ".csv"));

    std::cout << "model: " << variant.model_number() << " (" << variant.label() << ")\n"
              << "chains: " << draws.n_chains() << " x " << draws.n_retained()
              << " retained draws\n";
    if (draws.config.algorithm == Algorithm::Hmc) {
        std::cout << "divergences: " << draws.divergences << "\n";
    }
    bool ok = true;
    for (const auto& p : gated.params) {
        const bool is_gate = std::find(gate_params.begin(), gate_params.end(), p.name) != gate_params.end();
        if (!is_gate) continue;
        const bool pass = p.rhat && p.ess && *p.rhat < fit.rhat_max && *p.ess > fit.ess_min;
        ok = ok && pass;
        std::cout << p.name << ": rhat=" << (p.rhat ? format_double(*p.rhat) : "NA")
                  << " ess=" << (p.ess ? format_fixed(*p.ess, 0) : "NA") << (pass ? "" : "  [FAIL]")
                  << "\n";
    }
    if (!ok) {
        std::cout << "convergence gates failed (rhat < " << fit.rhat_max << ", ess > " << fit.ess_min
                  << ")\n";
        if (fit.enforce_gates) return 1;
    }
    return 0;
}

int cmd_diagnose(const CommonOptions& common, const DiagnoseOptions& diag) {
    prepare_out_dir(common);
    PosteriorDraws draws = load_draws_file(diag.draws_file, 0);
    const std::vector<std::string> params =
        diag.params.empty() ? headline_parameters(draws) : diag.params;
    ConvergenceReport report = compute_convergence(draws, params);
    report.rhat_threshold = diag.rhat_max;
    report.ess_threshold = diag.ess_min;
    write_convergence_csv(report, common.out / "convergence.csv");
    for (const auto& p : report.params) {
        std::cout << p.name << ": rhat=" << (p.rhat ? format_double(*p.rhat) : "NA")
                  << " ess=" << (p.ess ? format_fixed(*p.ess, 0) : "NA") << "\n";
    }
    if (!diag.trace.empty()) {
        trace_export(draws, diag.trace, common.out / "trace.csv");
    }
    if (diag.enforce_gates && !report.pass()) {
        std::cout << "convergence gates failed\n";
        return 1;
    }
    return 0;
}

int cmd_compare(const CommonOptions& common, const CompareOptions& cmp) {
    prepare_out_dir(common);
    IngestResult ingest = ingest_pipeline(common);
    const std::uint64_t data_digest = ingest.dataset.content_digest();

    const PosteriorDraws draws_a = load_draws_file(cmp.fit_a, cmp.model_a);
    const PosteriorDraws draws_b = load_draws_file(cmp.fit_b, cmp.model_b);
    for (const PosteriorDraws* d : {&draws_a, &draws_b}) {
        if (d->dataset_digest != 0 && d->dataset_digest != data_digest) {
            throw std::runtime_error("fit was drawn against a different game set than --games");
        }
    }
    if (draws_a.dataset_digest != 0 && draws_b.dataset_digest != 0 &&
        draws_a.dataset_digest != draws_b.dataset_digest) {
        throw std::runtime_error("fits were drawn against different game sets");
    }

    const auto report_for = [&](const PosteriorDraws& draws) {
        const ParameterLayout layout = layout_from_draws(draws);
        FitLoglikSource source(draws, layout, ingest.dataset);
        return psis_loo(source.n_games(), source.n_draws(),
                        [&source](int g) { return source.column(g); });
    };
    const ElpdReport elpd_a = report_for(draws_a);
    const ElpdReport elpd_b = report_for(draws_b);
    const ElpdComparison diff = elpd_compare(elpd_a, elpd_b);

    {
        auto out = open_output(common.out / "elpd_models.csv");
        out << "model,elpd,se,n_high_khat\n";
        out << draws_a.variant.model_number() << ',' << format_double(elpd_a.total()) << ','
            << format_double(elpd_a.se()) << ',' << elpd_a.n_high_khat() << '\n';
        out << draws_b.variant.model_number() << ',' << format_double(elpd_b.total()) << ','
            << format_double(elpd_b.se()) << ',' << elpd_b.n_high_khat() << '\n';
    }
    {
        auto out = open_output(common.out / "elpd_diff.csv");
        out << "model_a,model_b,diff,se,num_se\n";
        out << draws_a.variant.model_number() << ',' << draws_b.variant.model_number() << ','
            << format_double(diff.diff) << ',' << format_double(diff.se) << ','
            << format_double(diff.num_se) << '\n';
    }
    std::cout << "elpd model " << draws_a.variant.model_number() << ": "
              << format_fixed(elpd_a.total(), 2) << " (se " << format_fixed(elpd_a.se(), 2) << ")\n"
              << "elpd model " << draws_b.variant.model_number() << ": "
              << format_fixed(elpd_b.total(), 2) << " (se " << format_fixed(elpd_b.se(), 2) << ")\n"
              << "difference (a-b): " << format_fixed(diff.diff, 2) << " se "
              << format_fixed(diff.se, 2) << " (" << format_fixed(diff.num_se, 2) << " SE)\n";
    return 0;
}

int cmd_report(const CommonOptions& common, const ReportOptions& report) {
    prepare_out_dir(common);
    PosteriorDraws draws = load_draws_file(report.draws_file, 0);
    const ParameterLayout layout = layout_from_draws(draws);
    const std::string suffix = model_suffix(draws.variant);

    const std::vector<std::string> params =
        report.params.empty() ? headline_parameters(draws) : report.params;
    std::vector<int> seasons = report.ha_seasons;
    if (seasons.empty()) {
        seasons = {layout.first_season(), layout.last_season()};
    }

    std::vector<PosteriorSummary> summaries;
    for (const auto& p : params) summaries.push_back(summarize(draws, p));
    for (const int s : seasons) summaries.push_back(home_advantage_summary(draws, layout, s));
    write_posterior_summaries_csv(summaries, common.out / ("summary_" + suffix + ".csv"));
    for (const auto& s : summaries) {
        std::cout << s.parameter << ": median " << format_fixed(s.median, 3) << " ci ["
                  << format_fixed(s.ci_low, 3) << ", " << format_fixed(s.ci_high, 3) << "] pr>0 "
                  << format_fixed(s.prob_gt_zero, 3) << "\n";
    }

    if (draws.variant.bye == ByeStructure::Split2011) {
        const ProbComparison pc = prob_comparison(draws, "alpha_bye_post", "alpha_bye_pre");
        auto out = open_output(common.out / ("prob_comparisons_" + suffix + ".csv"));
        out << "comparison,probability\n";
        out << "post_lt_pre," << format_double(pc.a_less_b) << '\n';
        out << "post_gt_pre," << format_double(pc.a_greater_b) << '\n';
        std::cout << "Pr(alpha_bye_post < alpha_bye_pre) = " << format_fixed(pc.a_less_b, 3) << "\n";
        std::cout << "Pr(alpha_bye_post > alpha_bye_pre) = " << format_fixed(pc.a_greater_b, 3) << "\n";
    }

    figure_export(draws, params, common.out / ("figures_" + suffix + ".csv"));

    if (!report.team_paths.empty()) {
        auto out = open_output(common.out / ("team_strength_" + suffix + ".csv"));
        out << "team,season,mean_theta\n";
        for (const auto& team : report.team_paths) {
            const Eigen::VectorXd path = team_strength_path(draws, layout, team);
            for (int s = 0; s < layout.n_seasons(); ++s) {
                out << team << ',' << layout.first_season() + s << ',' << format_double(path[s])
                    << '\n';
            }
        }
    }
    return 0;
}

int cmd_simulate(const CommonOptions& common, const SimulateOptions& sim) {
    prepare_out_dir(common);
    const ModelVariant variant = ModelVariant::from_model_number(sim.model);

    TrueParams truth;
    truth.gamma = sim.true_gamma;
    truth.sigma_teamstrength = sim.true_sigma_teamstrength;
    truth.sigma_game = sim.true_sigma_game;
    truth.alpha_ha_trend = sim.true_ha_trend;
    truth.alpha_ha_intercept = sim.true_ha_intercept;
    truth.alpha_mnf = sim.true_mnf;
    truth.alpha_mini = sim.true_mini;
    truth.alpha_bye = sim.true_bye;
    truth.alpha_bye_pre = sim.true_bye_pre;
    truth.alpha_bye_post = sim.true_bye_post;

    SimulatedData data = gen_dataset(truth, variant, sim.schedule, sim.seed);
    write_games_csv(data.dataset, common.out / "games.csv");
    write_params_csv(data.layout, data.truth, common.out / "truth.csv");

    const IndicatorCounts c = count_indicators(data.dataset);
    const double n = static_cast<double>(data.dataset.modeled());
    std::cout << "games: " << data.dataset.modeled() << "\n"
              << "mnf share: " << format_fixed((c.mnf_home + c.mnf_away) / n, 4) << "\n"
              << "mini share: " << format_fixed((c.mini_home + c.mini_away) / n, 4) << "\n"
              << "bye share: " << format_fixed((c.bye_home + c.bye_away) / n, 4) << "\n";
    return 0;
}

}  // namespace restadv::cli
