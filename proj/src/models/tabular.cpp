#include "remask/error.hpp"
#include "remask/models.hpp"

#include <cmath>
#include <set>

namespace remask {

namespace {

constexpr double kMassTolerance = 1e-9;

std::uint64_t state_count(int vocab_size, std::size_t length) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < length; ++i) {
        n *= static_cast<std::uint64_t>(vocab_size);
        if (n > TabularDataModel::kMaxStates) {
            return n;
        }
    }
    return n;
}

} // namespace

TabularDataModel::TabularDataModel(int vocab_size, std::size_t length, std::vector<SupportEntry> support)
    : vocab_(vocab_size), length_(length) {
    require(length >= 1, Errc::invalid_argument, "tabular model needs L >= 1");
    require(state_count(vocab_size, length) <= kMaxStates, Errc::size_limit,
            "tabular model exceeds V^L <= " + std::to_string(kMaxStates) + " states");
    require(!support.empty(), Errc::invalid_argument, "tabular model support is empty");

    std::set<std::vector<Token>> seen;
    double total = 0.0;
    for (auto & e : support) {
        require(e.tokens.size() == length_, Errc::invalid_argument, "support sequence has wrong length");
        for (Token t : e.tokens) {
            require(vocab_.is_data_token(t), Errc::invalid_argument,
                    "support token " + std::to_string(t) + " outside [0, V)");
        }
        require(std::isfinite(e.p) && e.p >= 0.0, Errc::invalid_argument, "support probability must be >= 0");
        require(seen.insert(e.tokens).second, Errc::invalid_argument,
                "duplicate support sequence " + MaskedSequence(e.tokens).to_string());
        total += e.p;
    }
    require(std::abs(total - 1.0) <= kMassTolerance, Errc::invalid_argument,
            "support probabilities sum to " + std::to_string(total) + ", expected 1");

    // Zero-mass entries can never be reached; drop them so every supported
    // state has positive evidence.
    for (auto & e : support) {
        if (e.p > 0.0) {
            support_.push_back(std::move(e));
        }
    }
}

TabularDataModel TabularDataModel::from_json(const nlohmann::json & j) {
    try {
        const int  v = j.at("V").get<int>();
        const auto l = j.at("L").get<long long>();
        require(l >= 1, Errc::invalid_argument, "L must be >= 1");
        std::vector<SupportEntry> support;
        for (const auto & e : j.at("support")) {
            SupportEntry s;
            s.tokens = e.at("tokens").get<std::vector<Token>>();
            s.p      = e.at("p").get<double>();
            if (e.contains("label") && !e.at("label").is_null()) {
                s.label = e.at("label").is_string() ? e.at("label").get<std::string>() : e.at("label").dump();
            }
            support.push_back(std::move(s));
        }
        return TabularDataModel(v, static_cast<std::size_t>(l), std::move(support));
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("tabular model: ") + e.what());
    }
}

nlohmann::json TabularDataModel::to_json() const {
    nlohmann::json support = nlohmann::json::array();
    for (const auto & e : support_) {
        nlohmann::json item = {{"tokens", e.tokens}, {"p", e.p}};
        if (e.label) {
            item["label"] = *e.label;
        }
        support.push_back(std::move(item));
    }
    return {{"V", vocab_.size()}, {"L", length_}, {"support", std::move(support)}};
}

bool TabularDataModel::consistent(const SupportEntry & e, const MaskedSequence & state) const {
    for (std::size_t i = 0; i < length_; ++i) {
        if (state[i] != kMaskToken && state[i] != e.tokens[i]) {
            return false;
        }
    }
    return true;
}

double TabularDataModel::evidence(const MaskedSequence & state) const {
    require(state.length() == length_, Errc::contract_violation, "state length does not match model");
    double mass = 0.0;
    for (const auto & e : support_) {
        if (consistent(e, state)) {
            mass += e.p;
        }
    }
    return mass;
}

PredictorOutput TabularDataModel::predict(const MaskedSequence & state) const {
    require(state.length() == length_, Errc::contract_violation, "state length does not match model");
    const auto masked = state.masked_positions();
    require(!masked.empty(), Errc::contract_violation, "predict requires at least one masked position");

    std::vector<std::vector<double>> weights(masked.size(), std::vector<double>(static_cast<std::size_t>(vocab_.size()), 0.0));
    double evidence_mass = 0.0;
    for (const auto & e : support_) {
        if (!consistent(e, state)) {
            continue;
        }
        evidence_mass += e.p;
        for (std::size_t i = 0; i < masked.size(); ++i) {
            weights[i][static_cast<std::size_t>(e.tokens[masked[i]])] += e.p;
        }
    }
    require(evidence_mass > 0.0, Errc::evidence_zero,
            "state " + state.to_string() + " has zero evidence under the data distribution");

    std::vector<PositionPrediction> out;
    out.reserve(masked.size());
    for (std::size_t i = 0; i < masked.size(); ++i) {
        out.push_back({masked[i], Categorical::from_weights(std::move(weights[i]))});
    }
    return PredictorOutput(std::move(out));
}

std::optional<std::string> TabularDataModel::label_of(std::span<const Token> tokens) const {
    for (const auto & e : support_) {
        if (std::equal(e.tokens.begin(), e.tokens.end(), tokens.begin(), tokens.end())) {
            return e.label;
        }
    }
    return std::nullopt;
}

} // namespace remask
