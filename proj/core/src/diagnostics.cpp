#include "restadv/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "restadv/csv.hpp"

namespace restadv {

namespace {

// Halves every chain, dropping a middle element from odd lengths.
std::vector<Eigen::VectorXd> split_sequences(const std::vector<Eigen::VectorXd>& chains) {
    std::vector<Eigen::VectorXd> seqs;
    seqs.reserve(chains.size() * 2);
    for (const auto& c : chains) {
        const Eigen::Index half = c.size() / 2;
        seqs.emplace_back(c.head(half));
        seqs.emplace_back(c.tail(half));
    }
    return seqs;
}

struct VarianceParts {
    double w = 0.0;       // mean within-sequence variance
    double b_over_n = 0.0;  // variance of sequence means
    double var_plus = 0.0;  // (n-1)/n W + B/n
    Eigen::Index n = 0;
    std::size_t m = 0;
};

std::optional<VarianceParts> variance_parts(const std::vector<Eigen::VectorXd>& seqs) {
    VarianceParts parts;
    parts.m = seqs.size();
    parts.n = seqs.front().size();
    if (parts.m < 2 || parts.n < 2) return std::nullopt;

    double grand = 0.0;
    std::vector<double> means(parts.m);
    for (std::size_t j = 0; j < parts.m; ++j) {
        means[j] = seqs[j].mean();
        grand += means[j];
    }
    grand /= static_cast<double>(parts.m);

    double w = 0.0, b = 0.0;
    for (std::size_t j = 0; j < parts.m; ++j) {
        w += (seqs[j].array() - means[j]).square().sum() / static_cast<double>(parts.n - 1);
        b += (means[j] - grand) * (means[j] - grand);
    }
    parts.w = w / static_cast<double>(parts.m);
    parts.b_over_n = b / static_cast<double>(parts.m - 1);
    const double n = static_cast<double>(parts.n);
    parts.var_plus = (n - 1.0) / n * parts.w + parts.b_over_n;
    if (!(parts.w > 0.0) || !std::isfinite(parts.w)) return std::nullopt;
    return parts;
}

void check_input(const std::vector<Eigen::VectorXd>& chains) {
    if (chains.size() < 2) {
        throw std::invalid_argument("need at least 2 chains");
    }
    for (const auto& c : chains) {
        if (c.size() < 4) throw std::invalid_argument("need at least 4 draws per chain");
        if (c.size() != chains.front().size()) {
            throw std::invalid_argument("chains must have equal length");
        }
    }
}

}  // namespace

std::optional<double> split_rhat(const std::vector<Eigen::VectorXd>& chains) {
    check_input(chains);
    const auto seqs = split_sequences(chains);
    const auto parts = variance_parts(seqs);
    if (!parts) return std::nullopt;
    return std::sqrt(parts->var_plus / parts->w);
}

std::optional<double> ess(const std::vector<Eigen::VectorXd>& chains) {
    check_input(chains);
    const auto seqs = split_sequences(chains);
    const auto parts = variance_parts(seqs);
    if (!parts) return std::nullopt;

    const Eigen::Index n = parts->n;
    const std::size_t m = parts->m;

    // Biased per-sequence autocovariances, averaged across sequences, lag by
    // lag; Geyer's initial-monotone rule truncates the sum.
    std::vector<Eigen::VectorXd> centered;
    centered.reserve(m);
    for (const auto& s : seqs) centered.emplace_back(s.array() - s.mean());
    const auto mean_autocov = [&](Eigen::Index lag) {
        double acc = 0.0;
        for (const auto& c : centered) {
            acc += c.head(n - lag).dot(c.tail(n - lag)) / static_cast<double>(n);
        }
        return acc / static_cast<double>(m);
    };

    const double var_plus = parts->var_plus;
    const auto rho = [&](Eigen::Index t) {
        return t == 0 ? 1.0 : 1.0 - (parts->w - mean_autocov(t)) / var_plus;
    };
    // tau = -1 + 2 sum of Geyer pairs (rho_0+rho_1), (rho_2+rho_3), ...
    // truncated at the first nonpositive pair and capped to be monotone.
    double pair_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t + 1 < n; t += 2) {
        double pair = rho(t) + rho(t + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        pair_sum += pair;
        prev_pair = pair;
    }
    const double tau = std::max(1.0, -1.0 + 2.0 * pair_sum);
    const double total = static_cast<double>(m) * static_cast<double>(n);
    return total / tau;
}

bool ConvergenceReport::pass() const {
    for (const auto& p : params) {
        if (!p.rhat || !p.ess) return false;
        if (*p.rhat >= rhat_threshold || *p.ess <= ess_threshold) return false;
    }
    return !params.empty();
}

const ParamDiagnostic* ConvergenceReport::find(std::string_view name) const {
    for (const auto& p : params) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

ConvergenceReport compute_convergence(const PosteriorDraws& draws,
                                      std::span<const std::string> params) {
    ConvergenceReport report;
    report.divergences = draws.divergences;
    std::vector<std::string> all;
    if (params.empty()) {
        all = draws.names;
        params = all;
    }
    for (const auto& name : params) {
        const int idx = draws.require_param(name);
        const auto chains = draws.per_chain(idx);
        ParamDiagnostic d;
        d.name = name;
        d.rhat = split_rhat(chains);
        d.ess = ess(chains);
        report.params.push_back(std::move(d));
    }
    return report;
}

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "param,rhat,ess\n";
    for (const auto& p : report.params) {
        out << p.name << ',' << (p.rhat ? format_double(*p.rhat) : std::string{}) << ','
            << (p.ess ? format_double(*p.ess) : std::string{}) << '\n';
    }
}

void trace_export(const PosteriorDraws& draws, std::span<const std::string> params,
                  const std::filesystem::path& path) {
    std::vector<int> indices;
    indices.reserve(params.size());
    for (const auto& name : params) {
        const int idx = draws.param_index(name);
        if (idx < 0) {
            std::string msg = "unknown parameter '" + name + "'; available:";
            for (const auto& n : draws.names) {
                msg += ' ';
                msg += n;
            }
            throw std::invalid_argument(msg);
        }
        indices.push_back(idx);
    }
    auto out = open_output(path);
    out << "param,chain,iteration,value\n";
    for (std::size_t k = 0; k < indices.size(); ++k) {
        for (int c = 0; c < draws.n_chains(); ++c) {
            const auto& chain = draws.chains[static_cast<std::size_t>(c)];
            for (Eigen::Index it = 0; it < chain.rows(); ++it) {
                out << params[k] << ',' << c << ',' << it << ','
                    << format_double(chain(it, indices[k])) << '\n';
            }
        }
    }
}

}  // namespace restadv
