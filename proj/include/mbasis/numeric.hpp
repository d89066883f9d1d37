#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

namespace mbasis {

// Compensated accumulator (Neumaier variant of Kahan summation).
// Running sums feed back into the coefficient recursion, so plain
// accumulation would let rounding drift compound with n.
class NeumaierSum {
public:
    NeumaierSum() = default;
    explicit NeumaierSum(double init) : sum_(init) {}

    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// FNV-1a, used to fingerprint build parameters and report configs.
inline std::uint64_t fnv1a_bytes(const void* data, std::size_t len,
                                 std::uint64_t h = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a_double(double x, std::uint64_t h) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    return fnv1a_bytes(&bits, sizeof(bits), h);
}

inline std::uint64_t fnv1a_u64(std::uint64_t x, std::uint64_t h) {
    return fnv1a_bytes(&x, sizeof(x), h);
}

// Counter-based deterministic generator. Streams derived from (seed, index)
// are reproducible across runs, platforms, and worker counts.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(seed ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    }

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, bound) via the multiply-shift reduction; avoids
    // platform-dependent modulo bias handling.
    std::uint64_t bounded(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

private:
    std::uint64_t state_;
};

// Shortest decimal text that round-trips to the same binary64 value.
inline std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string format_hash(std::uint64_t h) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), h, 16);
    return "fnv1a:" + std::string(buf, res.ptr);
}

}  // namespace mbasis
