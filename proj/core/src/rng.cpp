#include "roca/rng.hpp"

namespace roca {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t sub) {
    std::uint64_t state = seed;
    std::uint64_t a = splitmix64(state);
    state = a ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL);
    std::uint64_t b = splitmix64(state);
    state = b ^ (sub * 0x8cb92ba72f3d8dd7ULL);
    return splitmix64(state);
}

}  // namespace roca
