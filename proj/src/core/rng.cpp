#include "remask/rng.hpp"

#include "remask/error.hpp"

namespace remask {

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    return mix64(mix64(master_seed) ^ mix64(stream_index + 0x632be59bd9b4e019ULL));
}

__extension__ typedef unsigned __int128 u128;

std::uint64_t Rng::below(std::uint64_t n) {
    require(n > 0, Errc::contract_violation, "Rng::below requires n > 0");
    // Lemire's multiply-shift with rejection.
    u128 m = static_cast<u128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m   = static_cast<u128>(engine_()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

} // namespace remask
