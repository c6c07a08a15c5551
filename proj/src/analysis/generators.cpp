#include "remask/analysis.hpp"
#include "remask/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace remask {

namespace {

double uniform(Rng & rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

// Fisher-Yates with Rng::below so the result is identical on every platform.
template <typename T>
void shuffle(std::vector<T> & v, Rng & rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

std::vector<std::size_t> iota_vec(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Sorted gaps -> logits with the top at `offset`, token order shuffled.
std::vector<double> logits_from_gaps(const std::vector<double> & gaps, double offset, Rng & rng) {
    std::vector<double> z;
    z.push_back(offset);
    for (double g : gaps) z.push_back(offset - g);
    shuffle(z, rng);
    return z;
}

} // namespace

AnchorForkSpec random_anchor_fork_spec(Rng & rng, std::size_t max_anchors) {
    require(max_anchors >= 1 && max_anchors <= AnchorForkSpec::kMaxAnchors, Errc::invalid_argument,
            "max_anchors must lie in [1, 20]");
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_anchors));

    AnchorForkSpec s;
    s.h0_nats = uniform(rng, 0.3, std::numbers::ln2);
    const double eta_sum = s.h0_nats * uniform(rng, 0.1, 0.9);
    std::vector<double> share(n);
    double total = 0.0;
    for (double & x : share) {
        x = 0.05 + rng.uniform();
        total += x;
    }
    for (double x : share) s.etas.push_back(eta_sum * x / total);

    auto pos = iota_vec(n + 1);
    shuffle(pos, rng);
    s.fork = pos[0];
    s.anchors.assign(pos.begin() + 1, pos.end());

    const double p_full = inverse_binary_entropy(s.h0_nats - s.eta_total());
    s.c_anchor = uniform(rng, p_full + 1e-3, 0.999);
    validate_spec(s);
    return s;
}

LogitSpec random_logit_spec(Rng & rng, std::size_t n_anchors, std::size_t vocab_size) {
    require(n_anchors <= 10, Errc::invalid_argument, "random logit specs support at most 10 anchors");
    require(vocab_size >= 2, Errc::invalid_argument, "vocab_size must be >= 2");
    const std::size_t m = vocab_size - 1;

    LogitSpec spec;
    auto pos = iota_vec(n_anchors + 1);
    shuffle(pos, rng);
    spec.fork = pos[0];
    spec.anchors.assign(pos.begin() + 1, pos.end());

    // Fork gaps per reveal state and their componentwise envelope.
    std::vector<double> envelope(m, 0.0);
    for (std::uint32_t s = 0; s < (1u << n_anchors); ++s) {
        std::vector<double> g(m);
        for (double & x : g) x = uniform(rng, 0.2, 3.0);
        std::sort(g.begin(), g.end());
        for (std::size_t i = 0; i < m; ++i) envelope[i] = std::max(envelope[i], g[i]);
        spec.fork_logits.push_back(logits_from_gaps(g, uniform(rng, -2.0, 2.0), rng));
    }

    // Anchors form a dominance chain above the envelope: each link adds a
    // nondecreasing slack vector whose first component is at least 0.05, so
    // every anchor-anchor and anchor-fork comparison is strict.
    std::vector<std::size_t> chain = iota_vec(n_anchors);
    shuffle(chain, rng);
    spec.anchor_logits.resize(n_anchors);
    std::vector<double> gaps = envelope;
    for (std::size_t idx : chain) {
        double step = uniform(rng, 0.05, 0.5);
        for (std::size_t i = 0; i < m; ++i) {
            gaps[i] += step;
            step += uniform(rng, 0.0, 0.2);
        }
        spec.anchor_logits[idx] = logits_from_gaps(gaps, uniform(rng, -2.0, 2.0), rng);
    }
    spec.check();
    return spec;
}

ForkInstance random_fork_instance(Rng & rng) {
    const std::size_t L = 3 + static_cast<std::size_t>(rng.below(2));
    const int V = 2 + static_cast<int>(rng.below(2));
    const std::size_t fork = static_cast<std::size_t>(rng.below(L));
    std::size_t states = 1;
    for (std::size_t i = 0; i < L; ++i) states *= static_cast<std::size_t>(V);
    const std::size_t n = std::min<std::size_t>(3 + rng.below(6), states);

    std::set<std::vector<Token>> seen;
    std::vector<SupportEntry> support;
    double total = 0.0;
    while (support.size() < n) {
        std::vector<Token> t(L);
        for (auto & x : t) x = static_cast<Token>(rng.below(static_cast<std::uint64_t>(V)));
        if (!seen.insert(t).second) continue;
        SupportEntry e;
        e.tokens = std::move(t);
        e.p      = 0.1 + rng.uniform();
        total += e.p;
        // Labels follow the fork value; 20% get another fork value or a
        // separate class.
        Token label_fork = e.tokens[fork];
        std::string label;
        if (rng.uniform() < 0.2) {
            if (rng.uniform() < 0.5) {
                label_fork = static_cast<Token>((label_fork + 1) % V);
                label      = "f" + std::to_string(label_fork);
            } else {
                label = "x";
            }
        } else {
            label = "f" + std::to_string(label_fork);
        }
        e.label = label;
        support.push_back(std::move(e));
    }
    for (auto & e : support) e.p /= total;
    return {TabularDataModel(V, L, std::move(support)), fork};
}

TabularDataModel degenerate_fork_model(std::size_t n_anchors, double flip) {
    require(n_anchors >= 1 && n_anchors <= 10, Errc::invalid_argument, "n_anchors must lie in [1, 10]");
    require(flip > 0.0 && flip < 1.0, Errc::invalid_argument, "flip must lie in (0, 1)");
    const std::size_t L = n_anchors + 1;
    std::vector<SupportEntry> support;
    support.push_back({std::vector<Token>(L, 0), 0.5, std::string("0")});
    for (std::uint32_t bits = 0; bits < (1u << n_anchors); ++bits) {
        std::vector<Token> t(L, 0);
        t[0] = 1;
        double p = 0.5;
        for (std::size_t a = 0; a < n_anchors; ++a) {
            const bool one = bits & (1u << a);
            t[a + 1] = one ? 1 : 0;
            p *= one ? flip : 1.0 - flip;
        }
        support.push_back({std::move(t), p, std::string("1")});
    }
    return TabularDataModel(2, L, std::move(support));
}

} // namespace remask
