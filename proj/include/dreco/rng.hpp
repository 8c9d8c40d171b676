#pragma once

#include <array>
#include <cstdint>

#include "dreco/matrix.hpp"

namespace dreco {

// xoshiro256++ seeded through SplitMix64. The uniform bit stream is a pure
// function of the seed, so one seed reproduces the same draw sequence on any
// platform. Gaussians come from the Marsaglia polar transform (one cached
// spare), which consumes a deterministic prefix of the uniform stream.
//
// Single-owner: concurrent use must go through substream(), which derives an
// independent generator from (root seed, key) without touching this state.
class RngState {
public:
    explicit RngState(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_unit();
    double next_gaussian();

    // Independent stream keyed on (root seed, key). Pure: does not advance
    // or depend on this generator's position.
    RngState substream(std::uint64_t key) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t seed_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// B x N matrix of i.i.d. standard normal draws, row-major consumption order.
Matrix gaussian(RngState& rng, std::size_t rows, std::size_t cols);

}  // namespace dreco
