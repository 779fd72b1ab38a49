#include "colanet/rng.hpp"

namespace colanet {

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    Rng mix(base_seed ^ h);
    return mix.next_u64();
}

}  // namespace colanet
