#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace hsg {

/// Deterministic random source. All distributions are hand-rolled on top of
/// mt19937_64 so that a stream's entire state is the engine state, which
/// serializes to a portable string.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller, computed fresh per call (no cached
    /// spare, so the stream state is exactly the engine state).
    double normal();

    bool bernoulli(double p) { return uniform01() < p; }

    std::string state() const;
    void set_state(const std::string& s);

private:
    std::mt19937_64 eng_;
};

/// Seed derivation: mixes a base seed with a label so that named substreams
/// and per-counter streams are decorrelated.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter);

/// A seeded bundle of named, mutually independent substreams. Consuming one
/// substream never shifts another; the same seed reproduces every substream
/// bit-exactly.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Returns the named substream, creating it on first use.
    Rng& sub(const std::string& name);

    /// A throwaway stream keyed by (seed, name, counter); used where
    /// restart-safe randomness is needed (e.g. per-iteration batches).
    Rng keyed(std::string_view name, std::uint64_t counter) const;

    std::map<std::string, std::string> state() const;
    void set_state(const std::map<std::string, std::string>& st);

private:
    std::uint64_t seed_;
    std::map<std::string, Rng> subs_;
};

}  // namespace hsg
