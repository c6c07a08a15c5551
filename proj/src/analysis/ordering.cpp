#include "remask/analysis.hpp"
#include "remask/error.hpp"
#include "remask/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace remask {

const char * verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass:         return "pass";
        case Verdict::fail:         return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

double MonteCarloEstimate::standard_error() const {
    return trials == 0 ? std::numeric_limits<double>::infinity() : std::sqrt(variance / static_cast<double>(trials));
}

MonteCarloEstimate MonteCarloEstimate::from_samples(std::span<const double> xs) {
    MonteCarloEstimate e;
    e.trials = xs.size();
    if (xs.empty()) {
        return e;
    }
    double sum = 0.0;
    for (double x : xs) sum += x;
    e.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.mean) * (x - e.mean);
        e.variance = ss / static_cast<double>(xs.size() - 1);
    }
    return e;
}

OrderingProblem OrderingProblem::from_spec(const AnchorForkSpec & spec) {
    spec.check_structure();
    OrderingProblem p;
    p.fork_position     = spec.fork;
    p.anchor_positions  = spec.anchors;
    p.anchor_confidence.assign(spec.anchors.size(), spec.c_anchor);
    const std::uint32_t subsets = 1u << spec.anchors.size();
    p.fork_confidence.resize(subsets);
    for (std::uint32_t s = 0; s < subsets; ++s) {
        p.fork_confidence[s] = fork_distribution(spec, s).major;
    }
    return p;
}

void OrderingProblem::check() const {
    require(anchor_count() <= AnchorForkSpec::kMaxAnchors, Errc::size_limit,
            "ordering DP limited to " + std::to_string(AnchorForkSpec::kMaxAnchors) + " anchors");
    require(anchor_confidence.size() == anchor_count(), Errc::invalid_argument, "one confidence per anchor required");
    require(fork_confidence.size() == (std::size_t{1} << anchor_count()), Errc::invalid_argument,
            "fork confidence needs one entry per reveal subset");
    for (double c : anchor_confidence) {
        require(c > 0.0 && c <= 1.0, Errc::invalid_argument, "anchor confidence must lie in (0, 1]");
    }
    for (double c : fork_confidence) {
        require(c > 0.0 && c <= 1.0, Errc::invalid_argument, "fork confidence must lie in (0, 1]");
    }
}

double OrderingProblem::log_gap(std::size_t anchor, std::uint32_t revealed) const {
    return std::log(anchor_confidence[anchor] / fork_confidence[revealed]);
}

OrderingProbabilities exact_ordering_probs(const OrderingProblem & problem, double t_pos) {
    problem.check();
    require(t_pos > 0.0, Errc::invalid_argument, "t_pos must be > 0");
    const std::size_t   n       = problem.anchor_count();
    const std::uint32_t subsets = 1u << n;

    OrderingProbabilities out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    // reach[S]: probability that exactly the anchors in S are revealed while
    // the fork is still masked, at some point of the trajectory.
    std::vector<double> reach(subsets, 0.0);
    reach[0] = 1.0;

    // Positions outside fork and anchors never change these weights, so the
    // chain restricted to {fork} u A is exactly Plackett-Luce among them.
    std::vector<double> w(n);
    for (std::uint32_t s = 0; s < subsets; ++s) {
        if (reach[s] == 0.0) {
            continue;
        }
        const double lw_fork = std::log(problem.fork_confidence[s]) / t_pos;
        double hi = lw_fork;
        std::size_t remaining = 0;
        for (std::size_t b = 0; b < n; ++b) {
            if (!(s & (1u << b))) {
                w[b] = std::log(problem.anchor_confidence[b]) / t_pos;
                hi   = std::max(hi, w[b]);
                ++remaining;
            }
        }
        const double w_fork = std::exp(lw_fork - hi);
        double total = w_fork;
        for (std::size_t b = 0; b < n; ++b) {
            if (!(s & (1u << b))) {
                w[b] = std::exp(w[b] - hi);
                total += w[b];
            }
        }
        for (std::size_t b = 0; b < n; ++b) {
            if (s & (1u << b)) {
                continue;
            }
            reach[s | (1u << b)] += reach[s] * (w[b] / total);

            // The a-vs-fork race is decided here when the next pick is a or
            // the fork; a then wins with probability sigmoid(ln(c_a/c_l)/T).
            const double race = remaining == 1 ? 1.0 : (w[b] + w_fork) / total;
            const double x    = problem.log_gap(b, s) / t_pos;
            out.anchor_first[b] += reach[s] * race * sigmoid(x);
            out.fork_first[b]   += reach[s] * race * sigmoid(-x);
        }
    }
    return out;
}

OrderingProbabilities deterministic_ordering(const OrderingProblem & problem, Strategy strategy) {
    problem.check();
    require(strategy == Strategy::lc || strategy == Strategy::ar, Errc::invalid_argument,
            "deterministic ordering is defined for LC and AR only");
    const std::size_t n = problem.anchor_count();
    OrderingProbabilities out{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};

    std::uint32_t revealed = 0;
    for (;;) {
        // Candidate -1 is the fork.
        long best = -1;
        double best_conf = problem.fork_confidence[revealed];
        std::size_t best_pos = problem.fork_position;
        for (std::size_t b = 0; b < n; ++b) {
            if (revealed & (1u << b)) {
                continue;
            }
            const std::size_t pos = problem.anchor_positions[b];
            bool better = false;
            if (strategy == Strategy::ar) {
                better = pos < best_pos;
            } else {
                const double c = problem.anchor_confidence[b];
                better = c > best_conf || (c == best_conf && pos < best_pos);
            }
            if (better) {
                best      = static_cast<long>(b);
                best_conf = problem.anchor_confidence[b];
                best_pos  = pos;
            }
        }
        if (best < 0) {
            break;
        }
        revealed |= 1u << best;
        out.anchor_first[static_cast<std::size_t>(best)] = 1.0;
        out.fork_first[static_cast<std::size_t>(best)]   = 0.0;
    }
    return out;
}

std::vector<PairwiseGap> pairwise_gaps(const OrderingProblem & problem) {
    problem.check();
    const std::size_t n = problem.anchor_count();
    std::vector<PairwiseGap> gaps(n, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        for (std::size_t a = 0; a < n; ++a) {
            if (s & (1u << a)) {
                continue;
            }
            const double g = problem.log_gap(a, s);
            gaps[a].delta = std::min(gaps[a].delta, g);
            gaps[a].Delta = std::max(gaps[a].Delta, g);
        }
    }
    return gaps;
}

bool OrderingReport::bracket_holds() const {
    return std::all_of(anchors.begin(), anchors.end(), [](const AnchorOrdering & a) { return a.bracket_holds(); });
}

bool OrderingReport::monte_carlo_consistent(double z_max) const {
    for (const auto & a : anchors) {
        if (!a.monte_carlo) {
            continue;
        }
        const double se = std::sqrt(a.exact * (1.0 - a.exact) / static_cast<double>(mc_trials));
        const double err = std::abs(*a.monte_carlo - a.exact);
        if (se == 0.0 ? err != 0.0 : err > z_max * se) {
            return false;
        }
    }
    return true;
}

std::vector<double> monte_carlo_ordering(const Predictor & model, std::size_t fork,
                                         std::span<const std::size_t> anchors, const DecodeConfig & config,
                                         const MonteCarloOptions & mc) {
    const RngPolicy policy{mc.master_seed};
    const std::vector<std::size_t> anchor_list(anchors.begin(), anchors.end());
    auto firsts = parallel_map(mc.trials, mc.workers, [&](std::size_t trial) {
        Rng rng = policy.stream(trial);
        const Trajectory t = decode(model, config, rng);
        std::vector<char> first(anchor_list.size());
        for (std::size_t i = 0; i < anchor_list.size(); ++i) {
            first[i] = t.unmask_step[anchor_list[i]] < t.unmask_step[fork] ? 1 : 0;
        }
        return first;
    });
    std::vector<double> freq(anchor_list.size(), 0.0);
    for (const auto & f : firsts) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            freq[i] += f[i];
        }
    }
    for (double & x : freq) {
        x /= static_cast<double>(std::max<std::size_t>(mc.trials, 1));
    }
    return freq;
}

OrderingReport ordering_report(const AnchorForkSpec & spec, double t_pos, const MonteCarloOptions & mc) {
    const OrderingProblem problem = OrderingProblem::from_spec(spec);
    const auto exact = exact_ordering_probs(problem, t_pos);
    const auto gaps  = pairwise_gaps(problem);

    OrderingReport report;
    report.t_pos     = t_pos;
    report.mc_trials = mc.trials;
    std::vector<double> empirical;
    if (mc.trials > 0) {
        const AnchorForkModel model(spec);
        DecodeConfig cfg;
        cfg.strategy = Strategy::tlc;
        cfg.k        = 1;
        cfg.t_pos    = t_pos;
        cfg.t_token  = 0.0;
        empirical = monte_carlo_ordering(model, spec.fork, spec.anchors, cfg, mc);
    }
    for (std::size_t a = 0; a < problem.anchor_count(); ++a) {
        AnchorOrdering row;
        row.anchor_position = spec.anchors[a];
        row.exact = exact.anchor_first[a];
        row.lower = sigmoid(gaps[a].delta / t_pos);
        row.upper = sigmoid(gaps[a].Delta / t_pos);
        if (!empirical.empty()) {
            row.monte_carlo = empirical[a];
        }
        report.anchors.push_back(row);
    }
    return report;
}

} // namespace remask
