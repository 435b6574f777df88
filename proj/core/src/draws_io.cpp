#include "restadv/draws_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

#include "restadv/csv.hpp"

namespace restadv {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'D', 'R', 'A', 'W', 'S', '1'};

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated draws file");
    return v;
}

}  // namespace

void write_draws_csv(const PosteriorDraws& draws, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "chain,iteration,param,value\n";
    for (int c = 0; c < draws.n_chains(); ++c) {
        const auto& chain = draws.chains[static_cast<std::size_t>(c)];
        for (Eigen::Index it = 0; it < chain.rows(); ++it) {
            for (Eigen::Index p = 0; p < chain.cols(); ++p) {
                out << c << ',' << it << ',' << draws.names[static_cast<std::size_t>(p)] << ','
                    << format_double(chain(it, p)) << '\n';
            }
        }
    }
}

void write_draws_binary(const PosteriorDraws& draws, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());

    std::string names;
    for (std::size_t i = 0; i < draws.names.size(); ++i) {
        if (i) names.push_back('\n');
        names += draws.names[i];
    }

    out.write(kMagic, sizeof kMagic);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(draws.n_chains()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(draws.n_retained()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(draws.n_params()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(names.size()));
    write_raw<std::uint64_t>(out, draws.config.seed);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(draws.config.n_iterations));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(draws.config.n_burnin));
    write_raw<std::uint8_t>(out, static_cast<std::uint8_t>(draws.variant.model_number()));
    write_raw<std::uint8_t>(out, draws.config.algorithm == Algorithm::Hmc ? 1 : 0);
    write_raw<std::uint8_t>(out, 0);
    write_raw<std::uint8_t>(out, 0);
    write_raw<std::uint64_t>(out, draws.dataset_digest);
    write_raw<std::int64_t>(out, draws.divergences);
    out.write(names.data(), static_cast<std::streamsize>(names.size()));

    for (const auto& chain : draws.chains) {
        for (Eigen::Index it = 0; it < chain.rows(); ++it) {
            for (Eigen::Index p = 0; p < chain.cols(); ++p) {
                write_raw<double>(out, chain(it, p));
            }
        }
    }
}

namespace {

PosteriorDraws read_draws_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw std::runtime_error(path.string() + ": not a draws binary");
    }
    const auto n_chains = read_raw<std::uint32_t>(in);
    const auto n_retained = read_raw<std::uint32_t>(in);
    const auto n_params = read_raw<std::uint32_t>(in);
    const auto name_len = read_raw<std::uint32_t>(in);

    PosteriorDraws draws;
    draws.config.seed = read_raw<std::uint64_t>(in);
    draws.config.n_iterations = static_cast<int>(read_raw<std::uint32_t>(in));
    draws.config.n_burnin = static_cast<int>(read_raw<std::uint32_t>(in));
    draws.config.n_chains = static_cast<int>(n_chains);
    draws.variant = ModelVariant::from_model_number(read_raw<std::uint8_t>(in));
    draws.config.algorithm = read_raw<std::uint8_t>(in) ? Algorithm::Hmc : Algorithm::BlockedGibbs;
    read_raw<std::uint8_t>(in);
    read_raw<std::uint8_t>(in);
    draws.dataset_digest = read_raw<std::uint64_t>(in);
    draws.divergences = read_raw<std::int64_t>(in);

    std::string names(name_len, '\0');
    in.read(names.data(), name_len);
    if (!in) throw std::runtime_error("truncated draws file");
    std::size_t start = 0;
    while (start <= names.size()) {
        const std::size_t nl = names.find('\n', start);
        if (nl == std::string::npos) {
            draws.names.push_back(names.substr(start));
            break;
        }
        draws.names.push_back(names.substr(start, nl - start));
        start = nl + 1;
    }
    if (draws.names.size() != n_params) {
        throw std::runtime_error(path.string() + ": parameter name count mismatch");
    }

    draws.chains.resize(n_chains);
    for (auto& chain : draws.chains) {
        chain.resize(n_retained, n_params);
        for (std::uint32_t it = 0; it < n_retained; ++it) {
            for (std::uint32_t p = 0; p < n_params; ++p) {
                chain(it, p) = read_raw<double>(in);
            }
        }
    }
    return draws;
}

PosteriorDraws read_draws_csv(const std::filesystem::path& path) {
    CsvReader csv(path);
    const auto c_chain = static_cast<std::size_t>(csv.require_column("chain"));
    const auto c_iter = static_cast<std::size_t>(csv.require_column("iteration"));
    const auto c_param = static_cast<std::size_t>(csv.require_column("param"));
    const auto c_value = static_cast<std::size_t>(csv.require_column("value"));

    // First pass collects dimensions and name order (names in first-seen order).
    std::vector<std::string> names;
    std::map<std::string, int, std::less<>> name_index;
    long max_chain = -1, max_iter = -1;
    std::vector<std::tuple<int, int, int, double>> cells;
    while (csv.next_row()) {
        const long chain = csv.parse_long(c_chain, "chain");
        const long iter = csv.parse_long(c_iter, "iteration");
        const std::string param{csv.field(c_param)};
        const double value = csv.parse_double(c_value, "value");
        if (chain < 0 || iter < 0) csv.fail("negative chain or iteration index");
        auto it = name_index.find(param);
        if (it == name_index.end()) {
            it = name_index.emplace(param, static_cast<int>(names.size())).first;
            names.push_back(param);
        }
        max_chain = std::max(max_chain, chain);
        max_iter = std::max(max_iter, iter);
        cells.emplace_back(static_cast<int>(chain), static_cast<int>(iter), it->second, value);
    }
    if (cells.empty()) throw std::runtime_error(path.string() + ": no draws");

    PosteriorDraws draws;
    draws.names = names;
    draws.config.n_chains = static_cast<int>(max_chain + 1);
    draws.config.n_iterations = static_cast<int>(max_iter + 1);
    draws.config.n_burnin = 0;
    draws.chains.assign(static_cast<std::size_t>(max_chain + 1),
                        Eigen::MatrixXd::Constant(max_iter + 1, static_cast<Eigen::Index>(names.size()),
                                                  std::numeric_limits<double>::quiet_NaN()));
    for (const auto& [chain, iter, param, value] : cells) {
        draws.chains[static_cast<std::size_t>(chain)](iter, param) = value;
    }
    for (const auto& chain : draws.chains) {
        if (chain.hasNaN()) {
            throw std::runtime_error(path.string() + ": incomplete draw grid (missing cells)");
        }
    }
    return draws;
}

}  // namespace

PosteriorDraws read_draws(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open " + path.string());
    char magic[8] = {};
    probe.read(magic, sizeof magic);
    probe.close();
    if (std::memcmp(magic, kMagic, sizeof kMagic) == 0) {
        return read_draws_binary(path);
    }
    return read_draws_csv(path);
}

}  // namespace restadv
