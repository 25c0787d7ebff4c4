#pragma once

#include <cstdint>
#include <limits>

namespace outformation {

/// What a draw is used for. Part of every stream key so that different uses
/// never share primitives.
enum class Purpose : std::uint64_t {
    EnvironmentChange = 1,
    EnvironmentMagnitude = 2,
    EnvironmentSign = 3,
    EnvironmentPick = 4,
    Noise = 5,
    Backoff = 6,
    SetupPlacement = 7,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;

/// UniformRandomBitGenerator whose whole sequence is a pure function of its key.
class KeyedStream {
public:
    using result_type = std::uint64_t;

    explicit KeyedStream(std::uint64_t key) noexcept : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1).
    double uniform01() noexcept;

private:
    std::uint64_t state_;
};

/// Root of all randomness for one replication. Streams are keyed by
/// (seed, replication, purpose, a, b, c, epoch), so architectures simulated on
/// the same replication see identical primitives regardless of draw order.
class RandomStreams {
public:
    RandomStreams(std::uint64_t seed, std::uint64_t replication, std::uint64_t noise_epoch = 0) noexcept
        : seed_(seed), replication_(replication), noise_epoch_(noise_epoch) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t replication() const noexcept { return replication_; }
    std::uint64_t noise_epoch() const noexcept { return noise_epoch_; }

    RandomStreams with_epoch(std::uint64_t epoch) const noexcept { return {seed_, replication_, epoch}; }

    /// Noise streams additionally mix in the noise epoch (used by conditioned resampling).
    KeyedStream stream(Purpose purpose, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const noexcept;

    double uniform(Purpose purpose, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const noexcept;
    double standard_normal(Purpose purpose, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

private:
    std::uint64_t seed_;
    std::uint64_t replication_;
    std::uint64_t noise_epoch_;
};

}  // namespace outformation
