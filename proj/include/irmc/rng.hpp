#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace irmc {

/// xoshiro256++ engine. Small state so that one engine per path is cheap.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{};
};

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Hashes a master seed together with a list of stream identifiers
/// (step, site, replicate, ...) into one substream seed. The result depends
/// only on the identifiers, never on how many other streams exist.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) noexcept;

/// Stream tags keep training and out-of-sample draws disjoint.
enum class StreamTag : std::uint64_t {
    Training = 0x7261696e,
    Forward = 0x666f7277,
    Design = 0x64657369,
    Fit = 0x66697421,
};

/// A seeded source of uniforms and standard normals.
class Stream {
public:
    Stream() : Stream(0) {}
    explicit Stream(std::uint64_t seed, bool antithetic = false) : engine_(seed), sign_(antithetic ? -1.0 : 1.0) {}

    /// Negated draws on an antithetic stream.
    double normal() { return sign_ * normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    Xoshiro256pp& engine() { return engine_; }

private:
    Xoshiro256pp engine_;
    double sign_ = 1.0;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace irmc
