#pragma once

#include <cmath>
#include <cstdint>

namespace tglab::rng {

/// SplitMix64 finalizer.  Bijective 64-bit mix with good avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based draw keyed by (seed, stream, counter).  Stateless and
/// splittable: any (seed, stream, counter) triple can be evaluated in any
/// order on any worker and yields the same bits.
inline std::uint64_t draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Map 64 random bits to a double in [0, 1).
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return to_unit(draw(seed, stream, counter));
}

/// Sequential counter generator for test drivers (random matrices, unitaries).
/// Gaussians via Box-Muller; reproducible for a fixed binary.
class Counter {
public:
    explicit Counter(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    std::uint64_t bits() { return draw(seed_, stream_, counter_++); }
    double uniform() { return to_unit(bits()); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.28318530717958647692 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace tglab::rng
