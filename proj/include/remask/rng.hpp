#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace remask {

// Counter-based stream derivation: stream(seed, trial) depends only on its
// two inputs, so trials can run on any worker in any order.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index);

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

struct RngPolicy {
    std::uint64_t master_seed = 0;

    Rng stream(std::uint64_t trial_index) const { return Rng(derive_stream_seed(master_seed, trial_index)); }
};

} // namespace remask
