#include "irmc/rng.hpp"

namespace irmc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t h = splitmix64(master);
    for (auto id : ids) {
        h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    }
    return h;
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
        x = splitmix64(x);
        s = x;
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

} // namespace irmc
