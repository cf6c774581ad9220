#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace qforge {

// Counter-based stream RNG. Output depends only on (seed, stream, counter),
// so streams can be split without touching the parent's state and results are
// independent of thread scheduling.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), counter_(0) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() {
        std::uint64_t z = key_ () + counter_ * 0x9E3779B97F4A7C15ULL;
        ++counter_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, bound), rejection-sampled
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = ~0ULL - (~0ULL % bound);
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % bound;
    }

    // standard normal, Box-Muller with a cached spare
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // n child streams, deterministic in (seed, stream); does not advance this stream
    std::vector<RngStream> split(std::size_t n) const {
        std::vector<RngStream> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t child = mix_(stream_ ^ mix_(0xD1B54A32D192ED03ULL + i));
            out.emplace_back(seed_, child);
        }
        return out;
    }

private:
    static std::uint64_t mix_(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t key_() const {
        return mix_(seed_ ^ 0xA0761D6478BD642FULL) ^ mix_(stream_ ^ 0xE7037ED1A0B428DBULL);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace qforge
