#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cte/error.hpp"

namespace cte {

/// splitmix64 step; used to derive independent stream seeds from a master
/// seed, e.g. per-trial RNGs keyed by (seed, trial index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic RNG. All sampling helpers are implemented here rather than
/// with std:: distributions so that a given seed yields the same stream on
/// every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t u64() { return engine_(); }

    /// Uniform in [0, n). Rejection sampling keeps the draw unbiased.
    std::size_t index(std::size_t n) {
        if (n == 0) throw_domain("Rng::index: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<std::size_t>(x % n);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; caches the spare deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = real();
        double u2 = real();
        while (u1 <= 0.0) u1 = real();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Sampler for a fixed discrete distribution, O(log n) per draw via binary
/// search on the cumulative weights.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& weights) {
        cumulative_.reserve(weights.size());
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw_domain("DiscreteSampler: negative weight");
            total += w;
            cumulative_.push_back(total);
        }
        if (cumulative_.empty() || total <= 0.0)
            throw_domain("DiscreteSampler: no positive weight");
        total_ = total;
    }

    std::size_t sample(Rng& rng) const {
        const double u = rng.real() * total_;
        std::size_t lo = 0, hi = cumulative_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative_[mid] <= u)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }

private:
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

}  // namespace cte
