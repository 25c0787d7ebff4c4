#include "outformation/random.hpp"

#include <random>

namespace outformation {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

KeyedStream::result_type KeyedStream::operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double KeyedStream::uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

KeyedStream RandomStreams::stream(Purpose purpose, std::uint64_t a, std::uint64_t b, std::uint64_t c) const noexcept {
    std::uint64_t key = hash_combine(seed_, replication_);
    key = hash_combine(key, static_cast<std::uint64_t>(purpose));
    key = hash_combine(key, a);
    key = hash_combine(key, b);
    key = hash_combine(key, c);
    if (purpose == Purpose::Noise) key = hash_combine(key, noise_epoch_);
    return KeyedStream(key);
}

double RandomStreams::uniform(Purpose purpose, std::uint64_t a, std::uint64_t b, std::uint64_t c) const noexcept {
    return stream(purpose, a, b, c).uniform01();
}

double RandomStreams::standard_normal(Purpose purpose, std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    auto s = stream(purpose, a, b, c);
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(s);
}

}  // namespace outformation
