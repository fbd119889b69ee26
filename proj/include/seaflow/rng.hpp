#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace seaflow {

// Deterministic generator used for every random decision in the library.
// std::shuffle / std::*_distribution are implementation-defined, so all
// draws are spelled out here to keep outputs reproducible across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) { seed_state(seed); }

    uint64_t next_u64() {
        // xoshiro256** step
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n).
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return mean + stddev * u * m;
    }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // n draws from Multinomial(total, weights). Sequential binomial via
    // inverse-CDF on the conditional counts.
    std::vector<int64_t> multinomial(int64_t total, const std::vector<double>& weights) {
        std::vector<int64_t> counts(weights.size(), 0);
        double wsum = 0.0;
        for (double w : weights) wsum += w;
        int64_t left = total;
        for (size_t i = 0; i + 1 < weights.size() && left > 0; ++i) {
            double p = wsum > 0.0 ? weights[i] / wsum : 0.0;
            if (p < 0.0) p = 0.0;
            if (p > 1.0) p = 1.0;
            int64_t c = binomial(left, p);
            counts[i] = c;
            left -= c;
            wsum -= weights[i];
        }
        if (!weights.empty()) counts.back() += left;
        return counts;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    void seed_state(uint64_t seed) {
        uint64_t x = seed;
        for (auto& s : s_) s = splitmix64(x);
    }

    int64_t binomial(int64_t n, double p) {
        // n here stays small enough (trip counts) for per-trial sampling.
        int64_t c = 0;
        for (int64_t t = 0; t < n; ++t)
            if (uniform01() < p) ++c;
        return c;
    }

    uint64_t s_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent stream seed from a root seed and a purpose label
// (plus optional indices), so components are reproducible in isolation.
inline uint64_t derive_seed(uint64_t root, const std::string& label, uint64_t a = 0,
                            uint64_t b = 0) {
    uint64_t h = 0xcbf29ce484222325ULL ^ root;
    auto mix = [&h](uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
        h ^= h >> 29;
    };
    for (unsigned char c : label) mix(c);
    mix(a + 0x9e3779b97f4a7c15ULL);
    mix(b + 0x517cc1b727220a95ULL);
    return h;
}

}  // namespace seaflow
