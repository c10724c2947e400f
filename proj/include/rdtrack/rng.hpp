#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rdtrack {

// Deterministic stream keyed by (seed, frame, purpose). Independent streams let
// frames be generated in parallel while staying bit-reproducible.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t frame, std::string_view purpose) {
        state_ = mix(seed ^ 0x2545F4914F6CDD1Dull);
        state_ = mix(state_ ^ mix(frame + 0x9E3779B97F4A7C15ull));
        state_ = mix(state_ ^ fnv1a(purpose));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal (Box-Muller, pair cached).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Poisson count via exponential inter-arrival times; exact for any mean.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        double acc = 0.0;
        int count = -1;
        do {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            acc += -std::log(u);
            ++count;
        } while (acc < mean);
        return count;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xCBF29CE484222325ull;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        return h;
    }

    std::uint64_t state_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace rdtrack
