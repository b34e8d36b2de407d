#ifndef SHEARFLOW_RNG_HPP
#define SHEARFLOW_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace shearflow {

/// splitmix64 step; used both as a generator and as a seed scrambler.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive an independent substream seed from (root seed, tag, index).
/// All randomness in a run flows from the single config seed through here,
/// so results do not depend on call order or thread scheduling.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t s = root;
    for (char c : tag) {
        s ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        splitmix64(s);
    }
    s ^= 0x5851f42d4c957f2dULL * (index + 1);
    std::uint64_t t = s;
    return splitmix64(t);
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
    return std::mt19937_64(substream_seed(root, tag, index));
}

}  // namespace shearflow

#endif
