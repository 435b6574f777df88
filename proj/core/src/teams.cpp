#include "restadv/teams.hpp"

#include <utility>

namespace restadv {

namespace {

constexpr std::pair<std::string_view, std::string_view> kAliases[] = {
    {"STL", "LA"},   // Rams through 2015
    {"SD", "LAC"},   // Chargers through 2016
    {"OAK", "LV"},   // Raiders through 2019
    {"LAR", "LA"},
    {"JAC", "JAX"},
    {"WSH", "WAS"},
    {"ARZ", "ARI"},
};

}  // namespace

int team_index(std::string_view code) {
    for (int i = 0; i < kNumTeams; ++i) {
        if (kTeamCodes[static_cast<std::size_t>(i)] == code) return i;
    }
    return -1;
}

int resolve_team(std::string_view code) {
    const int direct = team_index(code);
    if (direct >= 0) return direct;
    for (const auto& [from, to] : kAliases) {
        if (from == code) return team_index(to);
    }
    return -1;
}

std::string_view team_code(int index) {
    return kTeamCodes.at(static_cast<std::size_t>(index));
}

}  // namespace restadv
