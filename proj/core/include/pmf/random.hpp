#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pmf {

/// 64-bit FNV-1a over a byte string.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Seed of replica `index` of the stream named `tag` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
    return hash_combine(hash_combine(master, fnv1a(tag)), index);
}

/// Caller-owned random source. Every sampler takes one by reference; there
/// is no hidden global state.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    engine_type& engine() { return engine_; }

    /// Uniform on [0, 1).
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }
    std::uint64_t next() { return engine_(); }

private:
    engine_type engine_;
};

}  // namespace pmf
