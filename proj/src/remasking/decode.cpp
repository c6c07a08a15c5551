#include "remask/error.hpp"
#include "remask/remasking.hpp"

#include <algorithm>

#include <json.hpp>

namespace remask {

std::vector<std::size_t> active_positions(const MaskedSequence & state, const DecodeConfig & config) {
    auto masked = state.masked_positions();
    if (!config.block_size || masked.empty()) {
        return masked;
    }
    const std::size_t bs    = *config.block_size;
    const std::size_t block = masked.front() / bs;
    const std::size_t end   = (block + 1) * bs;
    masked.erase(std::find_if(masked.begin(), masked.end(), [end](std::size_t k) { return k >= end; }), masked.end());
    return masked;
}

Trajectory decode(const Predictor & model, const DecodeConfig & config, Rng & rng) {
    config.validate();
    const std::size_t L = model.length();

    Trajectory traj;
    traj.unmask_step.assign(L, -1);
    MaskedSequence state = MaskedSequence::all_masked(L);

    std::vector<double> confidences;
    std::vector<Token>  drawn;
    for (int step = 0; step < config.max_steps; ++step) {
        if (state.is_complete()) {
            break;
        }
        const auto active = active_positions(state, config);
        const PredictorOutput out = model.predict(state);
        traj.nfe += 1;

        // One draw per candidate position per step; a selected position
        // commits exactly this draw.
        confidences.resize(active.size());
        drawn.resize(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            const Categorical & q = out.at(active[i]);
            drawn[i]       = q.draw(config.t_token, rng);
            confidences[i] = q.prob(drawn[i]);
        }

        UnmaskSet chosen = select(config, active, confidences, rng);
        require(!chosen.empty(), Errc::contract_violation, "strategy returned an empty unmask set");

        UnmaskDecision decision;
        std::vector<Assignment> assignments;
        for (std::size_t pos : chosen) {
            const auto it = std::lower_bound(active.begin(), active.end(), pos);
            require(it != active.end() && *it == pos, Errc::contract_violation,
                    "strategy selected a position outside the active masked set");
            const Token t = drawn[static_cast<std::size_t>(it - active.begin())];
            decision.positions.push_back(pos);
            decision.tokens.push_back(t);
            assignments.push_back({pos, t});
        }

        MaskedSequence next = state.apply_unmask(assignments);
        for (std::size_t pos : decision.positions) {
            traj.unmask_step[pos] = step;
        }
        traj.steps.push_back({std::move(state), std::move(decision)});
        state = std::move(next);
    }
    require(state.is_complete(), Errc::nontermination,
            "decode did not complete within max_steps = " + std::to_string(config.max_steps));
    traj.final_sequence = std::move(state);
    return traj;
}

void write_trajectory_jsonl(const Trajectory & traj, std::ostream & os) {
    std::int64_t nfe = 0;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const auto & d = traj.steps[i].decision;
        nfe += d.nfe_cost;
        nlohmann::json line = {
            {"step", i}, {"unmasked", d.positions}, {"tokens", d.tokens}, {"nfe_total", nfe}};
        os << line.dump() << '\n';
    }
}

} // namespace remask
