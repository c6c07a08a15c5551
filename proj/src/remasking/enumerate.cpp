#include "remask/error.hpp"
#include "remask/remasking.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace remask {

namespace {

struct DrawChoice {
    std::vector<Token>  tokens;   // per active position
    std::vector<double> probs;    // tempered probability of each token
};

void expand_draws(const std::vector<DrawChoice> & choices, std::size_t i, std::vector<Token> & cur, double p,
                  const std::function<void(const std::vector<Token> &, double)> & visit) {
    if (i == choices.size()) {
        visit(cur, p);
        return;
    }
    for (std::size_t c = 0; c < choices[i].tokens.size(); ++c) {
        cur[i] = choices[i].tokens[c];
        expand_draws(choices, i + 1, cur, p * choices[i].probs[c], visit);
    }
}

} // namespace

std::vector<SequenceProbability> exact_final_distribution(const Predictor & model, const DecodeConfig & config,
                                                          const EnumerationLimits & limits) {
    config.validate();
    const std::size_t L = model.length();
    const auto V = static_cast<std::uint64_t>(model.vocab_size());
    std::uint64_t states = 1;
    for (std::size_t i = 0; i < L; ++i) {
        states *= V;
        require(states <= limits.max_states, Errc::size_limit,
                "state space V^L exceeds " + std::to_string(limits.max_states));
    }

    using Layer = std::map<std::vector<Token>, double>;
    Layer layer{{std::vector<Token>(L, kMaskToken), 1.0}};
    Layer final_mass;

    // Every step unmasks at least one position, so L rounds suffice.
    for (std::size_t round = 0; round <= L && !layer.empty(); ++round) {
        Layer next;
        for (const auto & [tokens, mass] : layer) {
            const MaskedSequence state(tokens);
            if (state.is_complete()) {
                final_mass[tokens] += mass;
                continue;
            }
            const auto active = active_positions(state, config);
            const PredictorOutput out = model.predict(state);

            std::vector<DrawChoice> choices(active.size());
            std::vector<const Categorical *> untempered(active.size());
            std::uint64_t branching = 1;
            for (std::size_t i = 0; i < active.size(); ++i) {
                untempered[i] = &out.at(active[i]);
                const Categorical tq = untempered[i]->tempered(config.t_token);
                for (std::size_t v = 0; v < tq.size(); ++v) {
                    if (tq.probs()[v] > 0.0) {
                        choices[i].tokens.push_back(static_cast<Token>(v));
                        choices[i].probs.push_back(tq.probs()[v]);
                    }
                }
                branching *= choices[i].tokens.size();
                require(branching <= limits.max_branching, Errc::size_limit,
                        "joint token draws per state exceed " + std::to_string(limits.max_branching));
            }

            std::vector<Token> cur(active.size());
            std::vector<double> conf(active.size());
            expand_draws(choices, 0, cur, mass, [&](const std::vector<Token> & draw, double p_draw) {
                for (std::size_t i = 0; i < active.size(); ++i) {
                    conf[i] = untempered[i]->prob(draw[i]);
                }
                for (const auto & ws : selection_distribution(config, active, conf)) {
                    std::vector<Token> succ = tokens;
                    for (std::size_t pos : ws.set) {
                        const auto idx = static_cast<std::size_t>(
                            std::lower_bound(active.begin(), active.end(), pos) - active.begin());
                        succ[pos] = draw[idx];
                    }
                    next[std::move(succ)] += p_draw * ws.p;
                }
            });
        }
        layer = std::move(next);
    }
    for (const auto & [tokens, mass] : layer) {
        require(MaskedSequence(tokens).is_complete(), Errc::nontermination, "enumeration did not reach a complete state");
        final_mass[tokens] += mass;
    }

    std::vector<SequenceProbability> out;
    out.reserve(final_mass.size());
    for (auto & [tokens, p] : final_mass) {
        out.push_back({tokens, p});
    }
    return out;
}

} // namespace remask
