#pragma once

#include "remask/decode_config.hpp"
#include "remask/models.hpp"
#include "remask/rng.hpp"
#include "remask/sequence.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

namespace remask {

// Positions to unmask in one step, ascending. `masked` and `confidences`
// below are parallel arrays over the candidate positions.
using UnmaskSet = std::vector<std::size_t>;

UnmaskSet select_random(std::span<const std::size_t> masked, int k, Rng & rng);
UnmaskSet select_ar(std::span<const std::size_t> masked);
UnmaskSet select_lc(std::span<const std::size_t> masked, std::span<const double> confidences, int k);
UnmaskSet select_tlc(std::span<const std::size_t> masked, std::span<const double> confidences, int k, double t_pos,
                     Rng & rng);
UnmaskSet select_ct(std::span<const std::size_t> masked, std::span<const double> confidences, double threshold);
UnmaskSet select_tct(std::span<const std::size_t> masked, std::span<const double> confidences, double threshold,
                     double t_pos, Rng & rng);

// Dispatches on config.strategy.
UnmaskSet select(const DecodeConfig & config, std::span<const std::size_t> masked,
                 std::span<const double> confidences, Rng & rng);

// Log-space tempered selection weights, normalized: w_k ∝ c_k^{1/t_pos}.
// Throws degenerate_weight on a zero confidence.
std::vector<double> tempered_position_weights(std::span<const double> confidences, double t_pos);

// Numerically stable logistic function.
double sigmoid(double x);

// Exact law of the unmask set given the confidences.
struct WeightedSet {
    UnmaskSet set;
    double    p;
};
std::vector<WeightedSet> selection_distribution(const DecodeConfig & config, std::span<const std::size_t> masked,
                                                std::span<const double> confidences);

struct UnmaskDecision {
    UnmaskSet          positions;
    std::vector<Token> tokens;     // parallel to positions
    int                nfe_cost = 1;
};

struct TrajectoryStep {
    MaskedSequence state;   // before the step
    UnmaskDecision decision;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    MaskedSequence              final_sequence;
    std::int64_t                nfe = 0;
    std::vector<int>            unmask_step;   // T(j): step index at which position j was unmasked

    std::size_t step_count() const { return steps.size(); }
};

// Positions the strategy may touch in `state`: every masked position, or only
// those of the leftmost incomplete block when block decoding is on.
std::vector<std::size_t> active_positions(const MaskedSequence & state, const DecodeConfig & config);

// Runs the step loop to a complete sequence. Throws nontermination when
// max_steps is exhausted.
Trajectory decode(const Predictor & model, const DecodeConfig & config, Rng & rng);

// One JSON object per step:
// {"step": int, "unmasked": [int], "tokens": [int], "nfe_total": int}
void write_trajectory_jsonl(const Trajectory & traj, std::ostream & os);

// Exact distribution of the final sequence under the strategy, by expanding
// every (unmask set, token draw) branch. Sorted by sequence.
struct SequenceProbability {
    std::vector<Token> tokens;
    double             p;
};

struct EnumerationLimits {
    std::uint64_t max_states    = 4096;       // V^L
    std::uint64_t max_branching = 1u << 16;   // joint token draws per state
};

std::vector<SequenceProbability> exact_final_distribution(const Predictor & model, const DecodeConfig & config,
                                                          const EnumerationLimits & limits = {});

} // namespace remask
