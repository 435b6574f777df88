#pragma once

#include <array>
#include <string_view>

namespace restadv {

// The 32 current franchises, by current code. Historical codes are folded
// into these so a franchise keeps one strength trajectory across 2002-2023
// (St. Louis / Los Angeles Rams, San Diego / LA Chargers, Oakland / Las
// Vegas Raiders).
inline constexpr std::array<std::string_view, 32> kTeamCodes = {
    "ARI", "ATL", "BAL", "BUF", "CAR", "CHI", "CIN", "CLE",
    "DAL", "DEN", "DET", "GB",  "HOU", "IND", "JAX", "KC",
    "LA",  "LAC", "LV",  "MIA", "MIN", "NE",  "NO",  "NYG",
    "NYJ", "PHI", "PIT", "SEA", "SF",  "TB",  "TEN", "WAS",
};

inline constexpr int kNumTeams = static_cast<int>(kTeamCodes.size());

// Index of a canonical code, or -1.
int team_index(std::string_view code);

// Resolves a code to a franchise index, applying the relocation/alias map
// (STL->LA, SD->LAC, OAK->LV, plus common alternate spellings). Returns -1
// for unknown codes.
int resolve_team(std::string_view code);

std::string_view team_code(int index);

}  // namespace restadv
