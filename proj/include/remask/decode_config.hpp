#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace remask {

enum class Strategy { random, ar, lc, tlc, ct, tct };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

struct DecodeConfig {
    Strategy                   strategy   = Strategy::lc;
    int                        k          = 1;      // LC, TLC, random
    double                     threshold  = 0.9;    // lambda, CT and TCT
    double                     t_pos      = 1.0;    // TLC, TCT
    double                     t_token    = 0.0;    // 0 = greedy argmax
    std::optional<std::size_t> block_size;
    int                        max_steps  = 4096;
    std::uint64_t              master_seed = 0;

    // Throws invalid_argument describing the first offending field.
    void validate() const;

    bool uses_position_temperature() const { return strategy == Strategy::tlc || strategy == Strategy::tct; }
    bool uses_threshold() const { return strategy == Strategy::ct || strategy == Strategy::tct; }

    // Short human-readable label, e.g. "tlc_K1_tpos1".
    std::string label() const;
};

void to_json(nlohmann::json & j, const DecodeConfig & c);
void from_json(const nlohmann::json & j, DecodeConfig & c);

} // namespace remask
