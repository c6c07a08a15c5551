#include "remask/analysis.hpp"
#include "remask/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace remask {

namespace {

// z(1) - z(i) for i >= 2, ascending.
std::vector<double> sorted_gaps(std::span<const double> logits) {
    std::vector<double> z(logits.begin(), logits.end());
    std::sort(z.begin(), z.end(), std::greater<>());
    std::vector<double> g;
    g.reserve(z.size() - 1);
    for (std::size_t i = 1; i < z.size(); ++i) {
        g.push_back(z[0] - z[i]);
    }
    return g;
}

// 1: a dominates b, -1: b dominates a, 0: equal, 2: incomparable.
int compare_gaps(const std::vector<double> & a, const std::vector<double> & b) {
    bool a_ge = true, b_ge = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a_ge = a_ge && a[i] >= b[i];
        b_ge = b_ge && b[i] >= a[i];
    }
    if (a_ge && b_ge) return 0;
    if (a_ge) return 1;
    if (b_ge) return -1;
    return 2;
}

// Deterministic LC over {fork} u anchors, one position per step.
std::vector<std::size_t> lc_order(const LogitSpec & spec, double temperature) {
    const std::size_t n = spec.anchors.size();
    std::vector<std::size_t> order;
    std::uint32_t revealed = 0;
    bool fork_done = false;
    std::vector<double> anchor_tail(n);
    for (std::size_t a = 0; a < n; ++a) {
        anchor_tail[a] = post_tempered_log_tail(spec.anchor_logits[a], temperature);
    }
    while (order.size() < n + 1) {
        // Smaller tail = larger confidence; ties go to the lower position.
        std::size_t best_pos  = std::numeric_limits<std::size_t>::max();
        double      best_tail = std::numeric_limits<double>::infinity();
        long        best      = -2;
        if (!fork_done) {
            best_pos  = spec.fork;
            best_tail = post_tempered_log_tail(spec.fork_logits[revealed], temperature);
            best      = -1;
        }
        for (std::size_t a = 0; a < n; ++a) {
            if (revealed & (1u << a)) continue;
            const double t = anchor_tail[a];
            if (best == -2 || t < best_tail || (t == best_tail && spec.anchors[a] < best_pos)) {
                best      = static_cast<long>(a);
                best_tail = t;
                best_pos  = spec.anchors[a];
            }
        }
        if (best == -1) {
            fork_done = true;
        } else {
            revealed |= 1u << best;
        }
        order.push_back(best_pos);
    }
    return order;
}

} // namespace

void LogitSpec::check() const {
    require(anchors.size() <= AnchorForkSpec::kMaxAnchors, Errc::size_limit, "too many anchors");
    require(anchor_logits.size() == anchors.size(), Errc::invalid_argument, "one logit vector per anchor required");
    require(fork_logits.size() == (std::size_t{1} << anchors.size()), Errc::invalid_argument,
            "fork logits need one vector per reveal subset");
    const std::size_t V = fork_logits.front().size();
    require(V >= 2, Errc::invalid_argument, "logit vectors need at least two entries");
    auto check_vec = [&](const std::vector<double> & z) {
        require(z.size() == V, Errc::invalid_argument, "all logit vectors must share one size");
        bool any_finite = false;
        for (double x : z) {
            require(!std::isnan(x) && x != std::numeric_limits<double>::infinity(), Errc::invalid_argument,
                    "logits must be finite or -inf");
            any_finite = any_finite || std::isfinite(x);
        }
        require(any_finite, Errc::invalid_argument, "a logit vector needs a finite entry");
    };
    for (const auto & z : anchor_logits) check_vec(z);
    for (const auto & z : fork_logits) check_vec(z);
    std::vector<std::size_t> pos = anchors;
    pos.push_back(fork);
    std::sort(pos.begin(), pos.end());
    require(std::adjacent_find(pos.begin(), pos.end()) == pos.end(), Errc::invalid_argument,
            "fork and anchor positions must be distinct");
}

double post_tempered_log_tail(std::span<const double> logits, double temperature) {
    require(temperature > 0.0, Errc::contract_violation, "token temperature must be > 0");
    const auto top = std::max_element(logits.begin(), logits.end());
    double hi = -std::numeric_limits<double>::infinity();
    for (auto it = logits.begin(); it != logits.end(); ++it) {
        if (it != top) hi = std::max(hi, (*it - *top) / temperature);
    }
    if (hi == -std::numeric_limits<double>::infinity()) {
        return hi;
    }
    double sum = 0.0;
    for (auto it = logits.begin(); it != logits.end(); ++it) {
        if (it != top) sum += std::exp((*it - *top) / temperature - hi);
    }
    return hi + std::log(sum);
}

double post_tempered_confidence(std::span<const double> logits, double temperature) {
    return sigmoid(-post_tempered_log_tail(logits, temperature));
}

bool token_gap_hypothesis(const LogitSpec & spec, std::string * why) {
    spec.check();
    const std::size_t n = spec.anchors.size();
    std::vector<std::vector<double>> anchor_gaps(n);
    for (std::size_t a = 0; a < n; ++a) {
        anchor_gaps[a] = sorted_gaps(spec.anchor_logits[a]);
    }
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        const auto fork_gaps = sorted_gaps(spec.fork_logits[s]);
        for (std::size_t a = 0; a < n; ++a) {
            if (s & (1u << a)) continue;
            if (compare_gaps(anchor_gaps[a], fork_gaps) != 1) {
                if (why) {
                    std::ostringstream os;
                    os << "anchor at position " << spec.anchors[a] << " does not strictly dominate the fork gaps "
                       << "in reveal state " << s;
                    *why = os.str();
                }
                return false;
            }
        }
    }
    return true;
}

Prop2Result verify_prop2(const LogitSpec & spec, std::span<const double> t_token_grid) {
    for (double t : t_token_grid) {
        require(t > 0.0, Errc::contract_violation, "token temperature grid values must be > 0");
    }
    Prop2Result r;
    r.grid.assign(t_token_grid.begin(), t_token_grid.end());
    if (!token_gap_hypothesis(spec, &r.reason)) {
        return r;
    }
    r.anchors_first = true;
    for (double t : t_token_grid) {
        r.orders.push_back(lc_order(spec, t));
        r.anchors_first = r.anchors_first && r.orders.back().back() == spec.fork;
    }
    bool same = true;
    for (const auto & o : r.orders) same = same && o == r.orders.front();

    if (!r.anchors_first) {
        r.verdict = Verdict::fail;
        r.reason  = "the fork was unmasked before an anchor";
        return r;
    }
    if (same) {
        r.verdict = Verdict::pass;
        return r;
    }
    // Order among anchors is only forced when they are pairwise comparable.
    const std::size_t n = spec.anchors.size();
    bool comparable = true;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            comparable = comparable &&
                         compare_gaps(sorted_gaps(spec.anchor_logits[a]), sorted_gaps(spec.anchor_logits[b])) != 2;
        }
    }
    if (comparable) {
        r.verdict = Verdict::fail;
        r.reason  = "unmask order changed with token temperature";
    } else {
        r.reason = "anchors precede the fork at every temperature; order among incomparable anchors varies";
    }
    return r;
}

LogitSpec logit_spec_from(const AnchorForkSpec & spec) {
    spec.check_structure();
    const auto V = static_cast<std::size_t>(spec.vocab_size);
    LogitSpec out;
    out.fork    = spec.fork;
    out.anchors = spec.anchors;
    const double rest = std::log((1.0 - spec.c_anchor) / static_cast<double>(V - 1));
    for (std::size_t a = 0; a < spec.anchors.size(); ++a) {
        std::vector<double> z(V, rest);
        z[0] = std::log(spec.c_anchor);
        out.anchor_logits.push_back(std::move(z));
    }
    for (std::uint32_t s = 0; s < (1u << spec.anchors.size()); ++s) {
        const auto fd = fork_distribution(spec, s);
        std::vector<double> z(V, -std::numeric_limits<double>::infinity());
        z[0] = std::log(fd.major);
        z[1] = std::log(fd.minor());
        out.fork_logits.push_back(std::move(z));
    }
    return out;
}

} // namespace remask
