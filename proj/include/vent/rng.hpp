#ifndef VENT_RNG_HPP
#define VENT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace vent {

// Deterministic, platform-independent generator. std::mt19937 streams are
// portable but the std distributions are not, so all draws go through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // standard normal, Box-Muller (one draw per call, pair cached)
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Independent child stream, keyed off the construction seed so the
    // parent's draw history does not matter.
    Rng derive(std::uint64_t stream_id) const {
        std::uint64_t s = seed_ ^ (0xA0761D6478BD642FULL * (stream_id + 1));
        s ^= s >> 33;
        s *= 0xE7037ED1A0B428DBULL;
        s ^= s >> 29;
        return Rng(s);
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace vent

#endif
