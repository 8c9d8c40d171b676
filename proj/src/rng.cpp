#include "dreco/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dreco {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngState::RngState(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) {
        word = splitmix64(sm);
    }
}

std::uint64_t RngState::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngState::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar: rejection over the unit disk, two normals per accept.
    while (true) {
        const double u = 2.0 * next_unit() - 1.0;
        const double v = 2.0 * next_unit() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            const double f = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = v * f;
            has_spare_ = true;
            return u * f;
        }
    }
}

RngState RngState::substream(std::uint64_t key) const {
    std::uint64_t mix = key;
    const std::uint64_t hashed_key = splitmix64(mix);
    mix = seed_ ^ hashed_key;
    return RngState(splitmix64(mix));
}

Matrix gaussian(RngState& rng, std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("gaussian: rows and cols must be >= 1");
    }
    Matrix m(rows, cols);
    for (double& v : m.data) {
        v = rng.next_gaussian();
    }
    return m;
}

}  // namespace dreco
