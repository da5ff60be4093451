#include "altest/rng.hpp"

namespace altest {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, const StreamId& id) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ id.trial);
    h = splitmix64(h ^ id.subset);
    h = splitmix64(h ^ id.role);
    return h;
}

Engine make_engine(std::uint64_t root, const StreamId& id) {
    const std::uint64_t s = derive_seed(root, id);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return Engine(seq);
}

} // namespace altest
