#include "remask/decode_config.hpp"

#include "remask/error.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace remask {

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::ar:     return "ar";
        case Strategy::lc:     return "lc";
        case Strategy::tlc:    return "tlc";
        case Strategy::ct:     return "ct";
        case Strategy::tct:    return "tct";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : {Strategy::random, Strategy::ar, Strategy::lc, Strategy::tlc, Strategy::ct, Strategy::tct}) {
        if (strategy_name(s) == name) {
            return s;
        }
    }
    fail(Errc::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

void DecodeConfig::validate() const {
    require(k >= 1, Errc::invalid_argument, "K must be >= 1");
    require(std::isfinite(threshold) && threshold >= 0.0 && threshold <= 1.0, Errc::invalid_argument,
            "lambda must lie in [0, 1]");
    if (uses_position_temperature()) {
        require(t_pos > 0.0 && !std::isnan(t_pos), Errc::invalid_argument, "t_pos must be > 0");
    }
    require(t_token >= 0.0 && std::isfinite(t_token), Errc::invalid_argument, "t_token must be finite and >= 0");
    require(!block_size || *block_size >= 1, Errc::invalid_argument, "block_size must be positive");
    require(max_steps >= 1, Errc::invalid_argument, "max_steps must be >= 1");
}

std::string DecodeConfig::label() const {
    std::ostringstream os;
    os << strategy_name(strategy);
    switch (strategy) {
        case Strategy::random:
        case Strategy::lc:
            os << "_K" << k;
            break;
        case Strategy::tlc:
            os << "_K" << k << "_tpos" << t_pos;
            break;
        case Strategy::ct:
            os << "_lambda" << threshold;
            break;
        case Strategy::tct:
            os << "_lambda" << threshold << "_tpos" << t_pos;
            break;
        case Strategy::ar:
            break;
    }
    if (block_size) {
        os << "_block" << *block_size;
    }
    return os.str();
}

void to_json(nlohmann::json & j, const DecodeConfig & c) {
    j = nlohmann::json{
        {"strategy",    std::string(strategy_name(c.strategy))},
        {"K",           c.k},
        {"lambda",      c.threshold},
        {"t_pos",       c.t_pos},
        {"t_token",     c.t_token},
        {"block_size",  c.block_size ? nlohmann::json(*c.block_size) : nlohmann::json(nullptr)},
        {"max_steps",   c.max_steps},
        {"master_seed", c.master_seed},
    };
}

void from_json(const nlohmann::json & j, DecodeConfig & c) {
    static const std::set<std::string> known = {"strategy", "K", "lambda", "t_pos", "t_token",
                                                "block_size", "max_steps", "master_seed"};
    require(j.is_object(), Errc::parse_error, "decode config must be a JSON object");
    for (const auto & item : j.items()) {
        require(known.count(item.key()) == 1, Errc::parse_error, "unknown decode config field '" + item.key() + "'");
    }
    try {
        DecodeConfig out;
        out.strategy = parse_strategy(j.at("strategy").get<std::string>());
        if (j.contains("K"))           out.k           = j.at("K").get<int>();
        if (j.contains("lambda"))      out.threshold   = j.at("lambda").get<double>();
        if (j.contains("t_pos"))       out.t_pos       = j.at("t_pos").get<double>();
        if (j.contains("t_token"))     out.t_token     = j.at("t_token").get<double>();
        if (j.contains("max_steps"))   out.max_steps   = j.at("max_steps").get<int>();
        if (j.contains("master_seed")) out.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("block_size") && !j.at("block_size").is_null()) {
            const auto bs = j.at("block_size").get<long long>();
            require(bs >= 1, Errc::invalid_argument, "block_size must be positive");
            out.block_size = static_cast<std::size_t>(bs);
        }
        c = out;
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("decode config: ") + e.what());
    }
}

} // namespace remask
