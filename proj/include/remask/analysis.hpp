#pragma once

#include "remask/decode_config.hpp"
#include "remask/models.hpp"
#include "remask/remasking.hpp"
#include "remask/rng.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace remask {

enum class Verdict { pass, fail, inconclusive };
const char * verdict_name(Verdict v);

struct MonteCarloEstimate {
    double      mean     = 0.0;
    double      variance = 0.0;   // per-trial sample variance
    std::size_t trials   = 0;

    double standard_error() const;
    static MonteCarloEstimate from_samples(std::span<const double> xs);
};

// ---------------------------------------------------------------------------
// Anchor/fork ordering under K = 1 remasking.

// Confidence structure of the fork and its anchors. Fork confidence depends
// only on which anchors are revealed (bitmask over anchor indices).
struct OrderingProblem {
    std::size_t              fork_position = 0;
    std::vector<std::size_t> anchor_positions;
    std::vector<double>      anchor_confidence;
    std::vector<double>      fork_confidence;   // size 2^|A|

    static OrderingProblem from_spec(const AnchorForkSpec & spec);

    std::size_t anchor_count() const { return anchor_positions.size(); }
    double log_gap(std::size_t anchor, std::uint32_t revealed) const;
    void check() const;
};

struct OrderingProbabilities {
    std::vector<double> anchor_first;   // P(T(a) < T(l))
    std::vector<double> fork_first;     // P(T(l) < T(a)), accumulated separately
};

// Subset DP over reveal states, O(2^|A| |A|). t_pos = +inf gives uniform
// (random) remasking. Throws size_limit for |A| > 20.
OrderingProbabilities exact_ordering_probs(const OrderingProblem & problem, double t_pos);

// LC or AR: the order is deterministic; probabilities are 0/1.
OrderingProbabilities deterministic_ordering(const OrderingProblem & problem, Strategy strategy);

struct PairwiseGap {
    double delta;   // inf over states with {a, l} masked of ln(c_a / c_l)
    double Delta;   // sup of the same
};
std::vector<PairwiseGap> pairwise_gaps(const OrderingProblem & problem);

struct AnchorOrdering {
    std::size_t           anchor_position;
    double                exact;
    double                lower;
    double                upper;
    std::optional<double> monte_carlo;
    bool bracket_holds() const { return lower <= exact && exact <= upper; }
};

struct OrderingReport {
    double                      t_pos = 1.0;
    std::vector<AnchorOrdering> anchors;
    std::size_t                 mc_trials = 0;

    bool bracket_holds() const;
    // Every Monte Carlo estimate within z_max standard errors of exact.
    bool monte_carlo_consistent(double z_max) const;
};

struct MonteCarloOptions {
    std::size_t   trials      = 0;
    std::uint64_t master_seed = 0;
    unsigned      workers     = 1;
};

OrderingReport ordering_report(const AnchorForkSpec & spec, double t_pos, const MonteCarloOptions & mc = {});

// Empirical P(T(a) < T(l)) per anchor from decode() trajectories.
std::vector<double> monte_carlo_ordering(const Predictor & model, std::size_t fork,
                                         std::span<const std::size_t> anchors, const DecodeConfig & config,
                                         const MonteCarloOptions & mc);

// ---------------------------------------------------------------------------
// Expected fork entropy at the moment the fork is unmasked.

struct ForkEntropyReport {
    Strategy            strategy = Strategy::lc;
    double              t_pos    = 0.0;
    double              h0       = 0.0;
    double              eta_total = 0.0;
    double              minimal   = 0.0;   // h0 - sum eta
    double              gain      = 0.0;   // sum_a P(l before a) eta_a
    double              exact     = 0.0;   // minimal + gain
    double              decomposition = 0.0;   // h0 - sum_a P(a before l) eta_a
    std::vector<double> anchor_first;
    std::optional<MonteCarloEstimate> monte_carlo;
};

// strategy in {lc, tlc, ar, random}, K = 1.
ForkEntropyReport exact_fork_entropy(const AnchorForkSpec & spec, Strategy strategy, double t_pos = 1.0);

// Runs decode() on the anchor-fork model with greedy tokens and averages the
// fork's predictive entropy at its unmask step.
MonteCarloEstimate monte_carlo_fork_entropy(const AnchorForkModel & model, const DecodeConfig & config,
                                            const MonteCarloOptions & mc);

struct Prop1Result {
    Verdict     verdict = Verdict::inconclusive;
    double      t_pos = 0.0, t_pos_prime = 0.0;
    double      required_ratio = 0.0;   // Delta / delta
    double      entropy = 0.0, entropy_prime = 0.0;
    double      gain = 0.0, gain_prime = 0.0;
    std::string reason;
};
Prop1Result verify_prop1(const AnchorForkSpec & spec, double t_pos, double t_pos_prime);

struct Remark1Result {
    Verdict             verdict = Verdict::inconclusive;
    double              lc_entropy = 0.0;
    double              minimal    = 0.0;
    std::vector<double> t_grid;
    std::vector<double> tlc_gain;   // over LC, per grid point
    std::string         reason;
};
Remark1Result verify_remark1(const AnchorForkSpec & spec, std::span<const double> t_grid);

struct Prop3Result {
    Verdict     verdict = Verdict::inconclusive;
    double      ar_entropy = 0.0, lc_entropy = 0.0;
    double      difference = 0.0, expected_difference = 0.0;
    std::optional<double> ar_monte_carlo, lc_monte_carlo;
    std::string reason;
};
Prop3Result verify_prop3(const AnchorForkSpec & spec, std::size_t mc_trials = 8);

// ---------------------------------------------------------------------------
// Token temperature under deterministic LC with post-tempering confidences.

struct LogitSpec {
    std::size_t                      fork = 0;
    std::vector<std::size_t>         anchors;
    std::vector<std::vector<double>> anchor_logits;   // one vector per anchor
    std::vector<std::vector<double>> fork_logits;     // one per revealed-anchor mask

    void check() const;
};

// ln sum_{i>=2} exp((z_(i) - z_(1)) / T). Confidence is 1 / (1 + exp(tail));
// ranking by ascending tail equals ranking by descending confidence without
// the rounding to 1.0 that max-softmax suffers at small T.
double post_tempered_log_tail(std::span<const double> logits, double temperature);
double post_tempered_confidence(std::span<const double> logits, double temperature);

// Sorted-gap dominance of every remaining anchor over the fork in every
// reveal state, at least one component strict.
bool token_gap_hypothesis(const LogitSpec & spec, std::string * why = nullptr);

struct Prop2Result {
    Verdict                               verdict = Verdict::inconclusive;
    std::vector<double>                   grid;
    std::vector<std::vector<std::size_t>> orders;   // unmask order per temperature
    bool                                  anchors_first = false;
    std::string                           reason;
};
Prop2Result verify_prop2(const LogitSpec & spec, std::span<const double> t_token_grid);

LogitSpec logit_spec_from(const AnchorForkSpec & spec);

// ---------------------------------------------------------------------------
// Fork/outcome coupling.

using OutcomeFn = std::function<std::string(std::span<const Token>)>;

struct SandwichReport {
    double h_fork    = 0.0;   // H(x^l)
    double h_outcome = 0.0;   // H([[x]])
    double epsilon   = 0.0;   // H(x^l | [[x]])
    double delta     = 0.0;   // H([[x]] | x^l)
    bool   lower_holds = false;   // h_fork - epsilon <= h_outcome
    bool   upper_holds = false;   // h_outcome <= h_fork + delta
    bool holds() const { return lower_holds && upper_holds; }
};

// Absolute rounding allowance applied to the bound comparisons.
inline constexpr double kEntropyRoundingSlack = 1e-12;

SandwichReport sandwich_from_distribution(std::span<const SequenceProbability> dist, std::size_t fork,
                                          const OutcomeFn & outcome);

// Conditions p_data on the unmasked positions of `state`.
SandwichReport verify_sandwich(const TabularDataModel & model, std::size_t fork, const OutcomeFn & outcome,
                               const MaskedSequence & state);

struct SemanticEntropy {
    MonteCarloEstimate    monte_carlo;   // mean = plug-in entropy; variance unused
    std::optional<double> exact;
    std::map<std::string, double> exact_distribution;
};

// Plug-in entropy of outcomes over `trials` decodes; the exact distribution is
// added when the model is small enough to enumerate (L <= 6).
SemanticEntropy semantic_entropy(const Predictor & model, const DecodeConfig & config, const OutcomeFn & outcome,
                                 const MonteCarloOptions & mc);

struct Corollary1Result {
    Verdict        verdict = Verdict::inconclusive;
    double         fork_entropy_low = 0.0, fork_entropy_high = 0.0;
    double         outcome_entropy_low = 0.0, outcome_entropy_high = 0.0;
    double         epsilon = 0.0, delta = 0.0;   // max over both sampling laws
    std::string    reason;
};

// Exact comparison of two decode configs on an enumerable model. Reports the
// fork-entropy gain against epsilon + delta; only a gain above the threshold
// can yield pass or fail.
Corollary1Result verify_corollary1(const Predictor & model, std::size_t fork, const OutcomeFn & outcome,
                                   const DecodeConfig & low, const DecodeConfig & high);

// ---------------------------------------------------------------------------
// Instance generators (deterministic given the Rng).

// Valid spec with 1..max_anchors anchors, positions a permutation of [0, |A|].
AnchorForkSpec random_anchor_fork_spec(Rng & rng, std::size_t max_anchors);

// Satisfies the sorted-gap hypothesis by construction: fork gaps are sampled
// per reveal state, anchors get the envelope plus nonnegative slack.
LogitSpec random_logit_spec(Rng & rng, std::size_t n_anchors, std::size_t vocab_size);

struct ForkInstance {
    TabularDataModel model;
    std::size_t      fork;
};

// Random small tabular model whose support labels follow the fork value up
// to label noise.
ForkInstance random_fork_instance(Rng & rng);

// Fork at position 0 (uniform over {0, 1}); n_anchors anchors that are 0
// whenever the fork is 0 and Bernoulli(flip) otherwise. Labels are the fork
// value.
TabularDataModel degenerate_fork_model(std::size_t n_anchors, double flip);

} // namespace remask
