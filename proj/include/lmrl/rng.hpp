#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace lmrl {

// Deterministic PRNG (splitmix64 core) with hand-rolled distributions.
// std::mt19937 + <random> distributions are implementation-defined, which
// would break the bit-identical reproducibility contract across toolchains,
// so the few draws we need are implemented explicitly.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive ends, unbiased (Lemire rejection).
    int uniform_int(int lo, int hi) {
        const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * range;
        auto low = static_cast<uint64_t>(m);
        if (low < range) {
            const uint64_t threshold = (0 - range) % range;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * range;
                low = static_cast<uint64_t>(m);
            }
        }
        return lo + static_cast<int>(m >> 64);
    }

    // Box-Muller with cached spare.
    double normal(double mean = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sigma * spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + sigma * r * std::cos(theta);
    }

    // Named sub-stream derivation: all randomness in a run flows from one
    // root seed through (stream name, index) pairs.
    static uint64_t derive(uint64_t root, std::string_view stream, uint64_t index) {
        uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (const char c : stream) {
            h ^= static_cast<uint8_t>(c);
            h *= 1099511628211ULL;
        }
        uint64_t z = root ^ h ^ (index * 0xd1b54a32d192ed03ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lmrl
