#pragma once

#include <filesystem>

#include "restadv/sampler.hpp"

namespace restadv {

// Long-format CSV: chain,iteration,param,value. Iterations are 0-based
// post-burn-in indices; values round-trip exactly.
void write_draws_csv(const PosteriorDraws& draws, const std::filesystem::path& path);

// Compact little-endian binary layout:
//   bytes 0-7    magic "RADRAWS1"
//   u32          n_chains
//   u32          n_retained
//   u32          n_params
//   u32          name block length in bytes
//   u64          seed
//   u32          n_iterations, u32 n_burnin
//   u8           model number (1-4)
//   u8           algorithm (0 gibbs, 1 hmc)
//   u8[2]        reserved
//   u64          dataset digest
//   i64          divergence count
//   bytes        newline-joined parameter names (name block length)
//   f64[...]     draws, [chain][iteration][param] contiguous
void write_draws_binary(const PosteriorDraws& draws, const std::filesystem::path& path);

// Reads either format, detected from the file's leading bytes.
PosteriorDraws read_draws(const std::filesystem::path& path);

}  // namespace restadv
