#pragma once

// Deterministic box sampling. Every sampled point is a pure function of
// (seed, index), so results are identical regardless of how the index range
// is partitioned across threads, and identical across platforms (the
// generator is fully specified here; nothing from <random> is used).

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "switchsurf/linalg.hpp"

namespace switchsurf {

// SplitMix64. State advances by the golden-ratio increment; output applies
// the two-round mix. Passes through all 2^64 states, period 2^64.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static std::uint64_t mix(std::uint64_t v) {
        SplitMix64 g(v);
        return g.next();
    }

private:
    std::uint64_t state_;
};

// Axis-aligned sampling box around a center point.
struct SampleSpec {
    Vector center;
    Vector halfwidth;           // per-axis half extent, all > 0
    std::size_t count = 10000;
    std::uint64_t seed = 0;
};

inline SampleSpec make_box(Vector center, Vector halfwidth, std::size_t count, std::uint64_t seed) {
    detail::require(center.size() == halfwidth.size(), "sample box shape mismatch");
    detail::require(center.size() > 0 && count > 0, "empty sampling domain");
    for (std::size_t i = 0; i < halfwidth.size(); ++i)
        detail::require(halfwidth[i] > 0.0, "sample box halfwidth must be positive");
    return SampleSpec{std::move(center), std::move(halfwidth), count, seed};
}

// The i-th sample, independent of evaluation order. Each index gets its own
// generator stream keyed by a mixed copy of the index so neighbouring
// indices do not share draws.
[[nodiscard]] inline Vector sample_point(const SampleSpec& spec, std::size_t index) {
    SplitMix64 rng(spec.seed ^ SplitMix64::mix(0x5851F42D4C957F2Dull + index));
    Vector x(spec.center.size());
    for (std::size_t d = 0; d < x.size(); ++d)
        x[d] = spec.center[d] + (2.0 * rng.uniform01() - 1.0) * spec.halfwidth[d];
    return x;
}

// Worker cap from SWITCHSURF_THREADS (default 1). Invalid or zero values
// fall back to 1; the hardware count is the upper bound.
[[nodiscard]] inline unsigned thread_cap() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const char* env = std::getenv("SWITCHSURF_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || v <= 0) return 1;
    return static_cast<unsigned>(v) < hw ? static_cast<unsigned>(v) : hw;
}

// Partitioned reduction over the sample index range. Each worker folds a
// contiguous block into its own accumulator with `fold(acc, index, point)`;
// the block accumulators are then merged in block order with
// `merge(into, from)`. With order-respecting merges the result is identical
// for any worker count.
template <typename Acc, typename Fold, typename Merge>
[[nodiscard]] Acc sample_reduce(const SampleSpec& spec, Acc init, Fold fold, Merge merge) {
    const std::size_t n = spec.count;
    const unsigned workers_wanted = thread_cap();
    const std::size_t workers =
        workers_wanted > 1 && n >= 2 * workers_wanted ? workers_wanted : 1;

    if (workers == 1) {
        Acc acc = init;
        for (std::size_t i = 0; i < n; ++i) fold(acc, i, sample_point(spec, i));
        return acc;
    }

    std::vector<Acc> parts(workers, init);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = lo + chunk < n ? lo + chunk : n;
        pool.emplace_back([&, w, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) fold(parts[w], i, sample_point(spec, i));
        });
    }
    for (auto& th : pool) th.join();
    Acc acc = std::move(parts.front());
    for (std::size_t w = 1; w < workers; ++w) merge(acc, std::move(parts[w]));
    return acc;
}

}  // namespace switchsurf
