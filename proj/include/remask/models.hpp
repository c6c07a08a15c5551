#pragma once

#include "remask/rng.hpp"
#include "remask/sequence.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace remask {

// Finite distribution over token ids [0, size). Probabilities are normalized
// at construction.
class Categorical {
public:
    Categorical() = default;

    // Nonnegative finite weights with positive total.
    static Categorical from_weights(std::vector<double> weights);

    // Point mass on token t over a vocabulary of the given size.
    static Categorical point_mass(std::size_t size, Token t);

    // Peaked at `peak`: the peak carries `peak_prob`, the remainder is spread
    // evenly over the other tokens.
    static Categorical peaked(std::size_t size, Token peak, double peak_prob);

    std::size_t size() const noexcept { return probs_.size(); }
    double prob(Token t) const { return probs_.at(static_cast<std::size_t>(t)); }
    std::span<const double> probs() const noexcept { return probs_; }

    // Ties go to the lowest token id.
    Token argmax() const;
    double max_prob() const { return prob(argmax()); }

    // Softmax(log p / T). T = 0 yields the argmax point mass; zero-probability
    // tokens stay at zero for every T.
    Categorical tempered(double temperature) const;

    Token draw(double temperature, Rng & rng) const;

    // Ordinary inverse-CDF draw from this distribution.
    Token sample(Rng & rng) const;

private:
    std::vector<double> probs_;
};

double entropy_nats(std::span<const double> probs);

struct PositionPrediction {
    std::size_t position;
    Categorical dist;
};

// One categorical per masked position of the queried state, ascending by
// position.
class PredictorOutput {
public:
    explicit PredictorOutput(std::vector<PositionPrediction> entries);

    std::span<const PositionPrediction> entries() const noexcept { return entries_; }
    const Categorical & at(std::size_t position) const;

    Token draw(std::size_t position, double t_token, Rng & rng) const { return at(position).draw(t_token, rng); }
    double probability(std::size_t position, Token token) const { return at(position).prob(token); }

private:
    std::vector<PositionPrediction> entries_;
};

// The token-predictor contract. One predict() call is one NFE.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::size_t length() const = 0;
    virtual int vocab_size() const = 0;

    // Requires at least one masked position.
    virtual PredictorOutput predict(const MaskedSequence & state) const = 0;
};

// ---------------------------------------------------------------------------
// Tabular data model: exact Bayes conditionals of an enumerable p_data.

struct SupportEntry {
    std::vector<Token>         tokens;
    double                     p = 0.0;
    std::optional<std::string> label;
};

class TabularDataModel final : public Predictor {
public:
    static constexpr std::uint64_t kMaxStates = 4096;

    TabularDataModel(int vocab_size, std::size_t length, std::vector<SupportEntry> support);

    static TabularDataModel from_json(const nlohmann::json & j);

    std::size_t length() const override { return length_; }
    int vocab_size() const override { return vocab_.size(); }
    PredictorOutput predict(const MaskedSequence & state) const override;

    std::span<const SupportEntry> support() const noexcept { return support_; }

    // Total p_data mass of support sequences agreeing with every unmasked
    // position of `state`.
    double evidence(const MaskedSequence & state) const;

    bool consistent(const SupportEntry & e, const MaskedSequence & state) const;

    // Label of a complete support sequence, if any.
    std::optional<std::string> label_of(std::span<const Token> tokens) const;

    nlohmann::json to_json() const;

private:
    Vocab                     vocab_;
    std::size_t               length_;
    std::vector<SupportEntry> support_;
};

// ---------------------------------------------------------------------------
// Synthetic anchor-fork model. The fork's binary entropy drops by eta_a for
// every revealed anchor a; anchors and fillers keep fixed peaked
// distributions.

struct FillerSpec {
    std::size_t position;
    double      confidence;
};

struct AnchorForkSpec {
    static constexpr std::size_t kMaxAnchors = 20;

    std::size_t              fork = 0;
    std::vector<std::size_t> anchors;
    double                   c_anchor = 0.9;
    std::vector<double>      etas;
    double                   h0_nats = 0.0;
    std::vector<FillerSpec>  fillers;
    int                      vocab_size = 2;

    static AnchorForkSpec from_json(const nlohmann::json & j);
    nlohmann::json to_json() const;

    // Positions run over [0, length()); uncovered ones become fillers with
    // confidence c_anchor.
    std::size_t length() const;

    // Structural checks only (ranges, distinctness, counts).
    void check_structure() const;

    // Bitmask over anchor indices (bit i = anchors[i]).
    std::uint32_t full_mask() const { return anchors.size() == 32 ? ~0u : ((1u << anchors.size()) - 1u); }
    double revealed_eta(std::uint32_t revealed) const;
    double eta_total() const { return revealed_eta(full_mask()); }
};

// Binary entropy in nats.
double binary_entropy(double p);

// p in [0.5, 1) with binary_entropy(p) = h, by bisection (|dp| <= 1e-12,
// at most 200 iterations). Requires 0 < h <= ln 2.
double inverse_binary_entropy(double h);

struct BinaryDistribution {
    double major;   // >= 0.5, carried by fork token 0
    double minor() const { return 1.0 - major; }
};

// Throws spec_validation when the target entropy leaves (0, ln 2].
BinaryDistribution fork_distribution(const AnchorForkSpec & spec, std::uint32_t revealed);

struct GapBounds {
    double delta;           // min over reveal subsets of ln(c_A / p(S))
    double Delta;           // max of the same
};

// Enumerates all 2^|A| reveal subsets and checks the confidence gap at each.
// Throws spec_validation naming the first offending subset.
GapBounds validate_spec(const AnchorForkSpec & spec);

class AnchorForkModel final : public Predictor {
public:
    explicit AnchorForkModel(AnchorForkSpec spec);

    const AnchorForkSpec & spec() const noexcept { return spec_; }
    const GapBounds & bounds() const noexcept { return bounds_; }

    std::size_t length() const override { return length_; }
    int vocab_size() const override { return spec_.vocab_size; }
    PredictorOutput predict(const MaskedSequence & state) const override;

    // Bitmask of anchors already unmasked in `state`.
    std::uint32_t revealed_mask(const MaskedSequence & state) const;

private:
    AnchorForkSpec     spec_;
    GapBounds          bounds_;
    std::size_t        length_;
    std::vector<int>   anchor_index_;        // position -> anchor index or -1
    std::vector<double> fixed_confidence_;   // per non-fork position
};

// ---------------------------------------------------------------------------
// Context-free model: every position has a fixed distribution.

class StaticModel final : public Predictor {
public:
    explicit StaticModel(std::vector<Categorical> per_position);

    std::size_t length() const override { return dists_.size(); }
    int vocab_size() const override { return static_cast<int>(dists_.front().size()); }
    PredictorOutput predict(const MaskedSequence & state) const override;

private:
    std::vector<Categorical> dists_;
};

} // namespace remask
