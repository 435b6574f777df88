#pragma once

#include <cstdint>

namespace restadv {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
//
// The key is (seed, stream): independent streams for the same seed are
// obtained by changing the stream id, which is how per-chain sub-streams
// are derived. Draws consume the counter sequentially, so a run is
// reproducible bit-for-bit from (seed, stream) alone, whether chains run
// serially or in parallel.
class CounterRng {
public:
    CounterRng() : CounterRng(0, 0) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via the inverse-CDF map (one uniform per draw).
    double normal();
    double normal(double mean, double sd);

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint32_t key_[2];
    std::uint32_t counter_[4];
    std::uint32_t block_[4];
    int block_pos_ = 4;  // forces refill on first draw
};

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile (Wichura's PPND16), accurate to full double
// precision over (0,1). Returns +/-inf at the endpoints.
double normal_quantile(double p);

// Draw from N(mean, sd^2) truncated to [lo, hi] by inverse-CDF mapping.
double truncated_normal(CounterRng& rng, double mean, double sd, double lo, double hi);

}  // namespace restadv
