#include "oracles/oracles.hpp"

#include "remask/error.hpp"
#include "remask/models.hpp"
#include "remask/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace remask;

namespace {

Errc code_of(const std::function<void()> & f) {
    try {
        f();
    } catch (const Error & e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::invalid_argument;
}

TabularDataModel two_sequence_model() {
    return TabularDataModel(2, 2, {{{0, 0}, 0.5, std::nullopt}, {{1, 1}, 0.5, std::nullopt}});
}

AnchorForkSpec single_anchor(double c, double h0, double eta) {
    AnchorForkSpec s;
    s.fork     = 1;
    s.anchors  = {0};
    s.c_anchor = c;
    s.etas     = {eta};
    s.h0_nats  = h0;
    return s;
}

// Random tabular model with distinct support sequences.
TabularDataModel random_tabular(Rng & rng, int v, std::size_t l) {
    std::map<std::vector<Token>, double> law;
    const std::size_t n = 2 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Token> t(l);
        for (auto & x : t) x = static_cast<Token>(rng.below(static_cast<std::uint64_t>(v)));
        law[t] += 0.1 + rng.uniform();
    }
    double z = 0.0;
    for (const auto & [t, w] : law) z += w;
    std::vector<SupportEntry> support;
    for (const auto & [t, w] : law) support.push_back({t, w / z, std::nullopt});
    return TabularDataModel(v, l, std::move(support));
}

} // namespace

TEST(Categorical, NormalizesAndArgmaxTiesLow) {
    const auto c = Categorical::from_weights({1.0, 3.0, 3.0});
    EXPECT_NEAR(c.prob(1), 3.0 / 7.0, 1e-15);
    EXPECT_EQ(c.argmax(), 1);
    EXPECT_EQ(code_of([] { Categorical::from_weights({0.0, 0.0}); }), Errc::invalid_argument);
    EXPECT_EQ(code_of([] { Categorical::from_weights({-1.0, 2.0}); }), Errc::invalid_argument);
}

TEST(Categorical, TemperedZeroIsArgmaxAndKeepsZeros) {
    const auto c = Categorical::from_weights({0.2, 0.5, 0.3, 0.0});
    const auto g = c.tempered(0.0);
    EXPECT_DOUBLE_EQ(g.prob(1), 1.0);
    const auto h = c.tempered(2.0);
    EXPECT_DOUBLE_EQ(h.prob(3), 0.0);
    double sum = 0.0;
    for (double p : h.probs()) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(c.draw(0.0, rng), 1);
}

TEST(Categorical, DrawFrequencies) {
    const auto c = Categorical::from_weights({0.25, 0.75});
    Rng rng(11);
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ones += c.draw(1.0, rng);
    EXPECT_NEAR(ones / double(n), 0.75, 0.01);
}

TEST(Tabular, UniformTwoSequencesFullyMasked) {
    const auto m   = two_sequence_model();
    const auto out = m.predict(MaskedSequence::all_masked(2));
    ASSERT_EQ(out.entries().size(), 2u);
    for (const auto & e : out.entries()) {
        EXPECT_DOUBLE_EQ(e.dist.prob(0), 0.5);
        EXPECT_DOUBLE_EQ(e.dist.prob(1), 0.5);
    }
}

TEST(Tabular, ConditioningCollapses) {
    const auto out = two_sequence_model().predict(MaskedSequence({0, kMaskToken}));
    ASSERT_EQ(out.entries().size(), 1u);
    EXPECT_DOUBLE_EQ(out.probability(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(out.probability(1, 1), 0.0);
}

TEST(Tabular, EvidenceZeroIsAnError) {
    const TabularDataModel m(2, 3, {{{0, 0, 0}, 0.5, std::nullopt}, {{1, 1, 1}, 0.5, std::nullopt}});
    EXPECT_EQ(code_of([&] { m.predict(MaskedSequence({0, 1, kMaskToken})); }), Errc::evidence_zero);
}

TEST(Tabular, CompleteStateIsAContractViolation) {
    EXPECT_EQ(code_of([] { two_sequence_model().predict(MaskedSequence({0, 0})); }), Errc::contract_violation);
}

TEST(Tabular, RejectsBadSupport) {
    EXPECT_EQ(code_of([] { TabularDataModel(2, 2, {{{0, 0}, 0.7, std::nullopt}}); }), Errc::invalid_argument);
    EXPECT_EQ(code_of([] { TabularDataModel(2, 2, {{{0, 2}, 1.0, std::nullopt}}); }), Errc::invalid_argument);
    EXPECT_EQ(code_of([] { TabularDataModel(4, 7, {{{0, 0, 0, 0, 0, 0, 0}, 1.0, std::nullopt}}); }),
              Errc::size_limit);
}

TEST(Tabular, JsonRoundTrip) {
    const auto j = nlohmann::json::parse(R"({"V":2,"L":2,"support":[{"tokens":[0,1],"p":0.25,"label":"a"},
                                                                     {"tokens":[1,0],"p":0.75}]})");
    const auto m = TabularDataModel::from_json(j);
    EXPECT_EQ(m.length(), 2u);
    EXPECT_EQ(m.label_of(std::vector<Token>{0, 1}), std::optional<std::string>("a"));
    EXPECT_FALSE(m.label_of(std::vector<Token>{1, 0}).has_value());
    const auto back = TabularDataModel::from_json(m.to_json());
    EXPECT_DOUBLE_EQ(back.support()[1].p, 0.75);
}

// Every conditional at every reachable state matches direct summation.
TEST(TabularProperty, ConditionalsMatchOracle) {
    Rng rng(2024);
    for (int rep = 0; rep < 30; ++rep) {
        const int v         = 2 + static_cast<int>(rng.below(3));
        const std::size_t l = 2 + rng.below(3);
        const auto m        = random_tabular(rng, v, l);
        std::vector<Token> t(l, kMaskToken);
        std::function<void(std::size_t)> visit = [&](std::size_t i) {
            if (i == l) {
                const MaskedSequence s(t);
                if (s.is_complete() || m.evidence(s) <= 0.0) return;
                const auto out = m.predict(s);
                for (const auto & e : out.entries()) {
                    const auto q = oracles::conditional(m, s, e.position);
                    for (int x = 0; x < v; ++x) ASSERT_NEAR(e.dist.prob(x), q[static_cast<std::size_t>(x)], 1e-12);
                }
                return;
            }
            for (Token x = kMaskToken; x < v; ++x) {
                t[i] = x;
                visit(i + 1);
            }
            t[i] = kMaskToken;
        };
        visit(0);
    }
}

// Chaining conditionals in any fixed order reproduces p_data.
TEST(TabularProperty, ChainRuleRecoversJoint) {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const auto m = random_tabular(rng, 3, 3);
        for (const auto & e : m.support()) {
            MaskedSequence s = MaskedSequence::all_masked(3);
            double p = 1.0;
            for (std::size_t k : {2u, 0u, 1u}) {
                p *= m.predict(s).probability(k, e.tokens[k]);
                const Assignment a[] = {{k, e.tokens[k]}};
                s = s.apply_unmask(a);
            }
            EXPECT_NEAR(p, e.p, 1e-12);
        }
    }
}

TEST(BinaryEntropy, InverseIsIdentity) {
    for (double h = 0.01; h < std::log(2.0); h += 0.01) {
        EXPECT_NEAR(binary_entropy(inverse_binary_entropy(h)), h, 1e-10);
        EXPECT_GE(inverse_binary_entropy(h), 0.5);
    }
    EXPECT_DOUBLE_EQ(inverse_binary_entropy(std::log(2.0)), 0.5);
}

TEST(ForkDistribution, MaxEntropyIsUniform) {
    const auto d = fork_distribution(single_anchor(0.9, std::log(2.0), 0.05), 0);
    EXPECT_NEAR(d.major, 0.5, 1e-12);
}

TEST(ForkDistribution, EntropyAboveLn2Rejected) {
    EXPECT_EQ(code_of([] { fork_distribution(single_anchor(0.9, 1.0, 0.05), 0); }), Errc::spec_validation);
}

TEST(ForkDistribution, TwoAnchorsRevealed) {
    AnchorForkSpec s;
    s.fork     = 1;
    s.anchors  = {0, 2};
    s.c_anchor = 0.9;
    s.etas     = {0.1, 0.1};
    s.h0_nats  = 0.6;
    const auto d = fork_distribution(s, 0b11);
    EXPECT_NEAR(binary_entropy(d.major), 0.4, 1e-10);
    EXPECT_GE(d.major, 0.5);
}

TEST(ValidateSpec, SingleAnchorBounds) {
    const auto s  = single_anchor(0.9, std::log(2.0), 0.05);
    const auto gb = validate_spec(s);
    const double p = inverse_binary_entropy(std::log(2.0) - 0.05);
    EXPECT_NEAR(gb.Delta, std::log(1.8), 1e-12);
    EXPECT_NEAR(gb.delta, std::log(0.9 / p), 1e-10);
    EXPECT_GT(gb.delta, 0.0);
}

TEST(ValidateSpec, GapViolationRejected) {
    const double eta = std::log(2.0) - binary_entropy(0.9);
    EXPECT_EQ(code_of([&] { validate_spec(single_anchor(0.55, std::log(2.0), eta)); }), Errc::spec_validation);
}

TEST(ValidateSpec, ZeroAnchors) {
    AnchorForkSpec s;
    s.fork     = 0;
    s.c_anchor = 0.9;
    s.h0_nats  = std::log(2.0);
    const auto gb = validate_spec(s);
    EXPECT_NEAR(gb.delta, std::log(0.9 / 0.5), 1e-12);
    EXPECT_NEAR(gb.Delta, std::log(0.9 / 0.5), 1e-12);
}

TEST(ValidateSpec, AcceptedSpecsHaveOrderedBounds) {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const auto s  = random_anchor_fork_spec(rng, 6);
        const auto gb = validate_spec(s);
        EXPECT_GT(gb.delta, 0.0);
        EXPECT_LE(gb.delta, gb.Delta);
        EXPECT_TRUE(std::isfinite(gb.Delta));
    }
}

TEST(AnchorForkModel, PredictShapes) {
    AnchorForkSpec s = single_anchor(0.9, std::log(2.0), 0.05);
    s.fillers        = {{2, 0.8}};
    const AnchorForkModel m(s);
    EXPECT_EQ(m.length(), 3u);
    const auto out = m.predict(MaskedSequence::all_masked(3));
    EXPECT_NEAR(out.at(1).max_prob(), 0.5, 1e-12);
    EXPECT_NEAR(out.at(0).max_prob(), 0.9, 1e-12);
    EXPECT_NEAR(out.at(2).max_prob(), 0.8, 1e-12);
    const auto after = m.predict(MaskedSequence({1, kMaskToken, kMaskToken}));
    EXPECT_NEAR(binary_entropy(after.at(1).max_prob()), std::log(2.0) - 0.05, 1e-10);
    EXPECT_EQ(m.revealed_mask(MaskedSequence({1, kMaskToken, kMaskToken})), 1u);
}

TEST(AnchorForkSpec, JsonRoundTrip) {
    const auto j = nlohmann::json::parse(
        R"({"fork":1,"anchors":[0,2],"c_anchor":0.9,"etas":[0.1,0.1],"h0_nats":0.6})");
    const auto s = AnchorForkSpec::from_json(j);
    EXPECT_EQ(s.length(), 3u);
    const auto t = AnchorForkSpec::from_json(s.to_json());
    EXPECT_EQ(t.anchors, s.anchors);
    EXPECT_DOUBLE_EQ(t.h0_nats, 0.6);
    EXPECT_EQ(code_of([] { AnchorForkSpec::from_json(nlohmann::json::parse(R"({"fork":0,"anchors":[0],"c_anchor":0.9,"etas":[0.1],"h0_nats":0.6})")).check_structure(); }),
              Errc::spec_validation);
}

TEST(StaticModel, FixedDistributions) {
    const StaticModel m({Categorical::from_weights({0.9, 0.1}), Categorical::from_weights({0.4, 0.6})});
    const auto out = m.predict(MaskedSequence({kMaskToken, kMaskToken}));
    EXPECT_DOUBLE_EQ(out.probability(0, 0), 0.9);
    EXPECT_DOUBLE_EQ(out.probability(1, 1), 0.6);
}
