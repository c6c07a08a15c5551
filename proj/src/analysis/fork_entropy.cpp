#include "remask/analysis.hpp"
#include "remask/error.hpp"
#include "remask/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace remask {

namespace {

constexpr double kExactTolerance = 1e-10;

// Deterministic trajectories recompute the entropy from the bisected fork
// distribution rather than from h0 - sum eta, so they agree to the bisection
// accuracy only.
constexpr double kDeterministicMcTolerance = 1e-9;

OrderingProbabilities ordering_for(const OrderingProblem & problem, Strategy strategy, double t_pos) {
    switch (strategy) {
        case Strategy::lc:
        case Strategy::ar:
            return deterministic_ordering(problem, strategy);
        case Strategy::tlc:
            return exact_ordering_probs(problem, t_pos);
        case Strategy::random:
            return exact_ordering_probs(problem, std::numeric_limits<double>::infinity());
        default:
            fail(Errc::invalid_argument,
                 "exact fork entropy is defined for lc, tlc, ar and random, not " + std::string(strategy_name(strategy)));
    }
}

DecodeConfig greedy_config(Strategy strategy, double t_pos) {
    DecodeConfig cfg;
    cfg.strategy = strategy;
    cfg.k        = 1;
    cfg.t_pos    = t_pos;
    cfg.t_token  = 0.0;
    return cfg;
}

} // namespace

ForkEntropyReport exact_fork_entropy(const AnchorForkSpec & spec, Strategy strategy, double t_pos) {
    spec.check_structure();
    const OrderingProblem problem = OrderingProblem::from_spec(spec);
    const OrderingProbabilities ord = ordering_for(problem, strategy, t_pos);

    ForkEntropyReport r;
    r.strategy  = strategy;
    r.t_pos     = strategy == Strategy::tlc ? t_pos : 0.0;
    r.h0        = spec.h0_nats;
    r.eta_total = spec.eta_total();
    r.minimal   = spec.h0_nats - r.eta_total;
    double revealed = 0.0;
    for (std::size_t a = 0; a < spec.anchors.size(); ++a) {
        r.gain   += ord.fork_first[a] * spec.etas[a];
        revealed += ord.anchor_first[a] * spec.etas[a];
    }
    r.exact         = r.minimal + r.gain;
    r.decomposition = spec.h0_nats - revealed;
    r.anchor_first  = ord.anchor_first;
    return r;
}

MonteCarloEstimate monte_carlo_fork_entropy(const AnchorForkModel & model, const DecodeConfig & config,
                                            const MonteCarloOptions & mc) {
    const RngPolicy policy{mc.master_seed};
    const auto & spec = model.spec();
    const auto samples = parallel_map(mc.trials, mc.workers, [&](std::size_t trial) {
        Rng rng = policy.stream(trial);
        const Trajectory t = decode(model, config, rng);
        const auto step = static_cast<std::size_t>(t.unmask_step[spec.fork]);
        const MaskedSequence & before = t.steps[step].state;
        const PredictorOutput out = model.predict(before);
        return entropy_nats(out.at(spec.fork).probs());
    });
    return MonteCarloEstimate::from_samples(samples);
}

Prop1Result verify_prop1(const AnchorForkSpec & spec, double t_pos, double t_pos_prime) {
    require(t_pos > 0.0 && t_pos_prime > 0.0, Errc::invalid_argument, "temperatures must be > 0");
    const GapBounds b = validate_spec(spec);

    Prop1Result r;
    r.t_pos       = t_pos;
    r.t_pos_prime = t_pos_prime;
    if (spec.anchors.empty()) {
        r.reason = "no anchors: fork entropy does not depend on the order";
        return r;
    }
    r.required_ratio = b.Delta / b.delta;

    const auto lo = exact_fork_entropy(spec, Strategy::tlc, t_pos);
    const auto hi = exact_fork_entropy(spec, Strategy::tlc, t_pos_prime);
    r.entropy       = lo.exact;
    r.entropy_prime = hi.exact;
    r.gain          = lo.gain;
    r.gain_prime    = hi.gain;

    if (!(t_pos_prime > t_pos * r.required_ratio)) {
        std::ostringstream os;
        os << "gap condition unmet: t_pos' = " << t_pos_prime << " <= t_pos * Delta/delta = " << t_pos * r.required_ratio;
        r.reason = os.str();
        return r;
    }
    // Both entropies share h0 - sum eta, so comparing the gains is exact.
    if (r.gain_prime > r.gain) {
        r.verdict = Verdict::pass;
    } else {
        r.verdict = Verdict::fail;
        std::ostringstream os;
        os << "entropy did not increase: " << r.entropy << " at " << t_pos << " vs " << r.entropy_prime << " at "
           << t_pos_prime;
        r.reason = os.str();
    }
    return r;
}

Remark1Result verify_remark1(const AnchorForkSpec & spec, std::span<const double> t_grid) {
    validate_spec(spec);
    Remark1Result r;
    const auto lc = exact_fork_entropy(spec, Strategy::lc);
    r.lc_entropy = lc.exact;
    r.minimal    = lc.minimal;
    r.t_grid.assign(t_grid.begin(), t_grid.end());
    if (spec.anchors.empty()) {
        r.reason = "no anchors: every strategy reaches h0";
        return r;
    }
    bool ok = std::abs(lc.exact - lc.minimal) <= kExactTolerance;
    std::ostringstream why;
    if (!ok) {
        why << "LC entropy " << lc.exact << " differs from h0 - sum eta = " << lc.minimal << "; ";
    }
    for (double t : t_grid) {
        require(t > 0.0, Errc::invalid_argument, "t_pos grid values must be > 0");
        const auto tlc = exact_fork_entropy(spec, Strategy::tlc, t);
        const double gain = tlc.gain - lc.gain;
        r.tlc_gain.push_back(gain);
        if (!(gain > 0.0)) {
            ok = false;
            why << "TLC at t_pos = " << t << " does not exceed LC; ";
        }
    }
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    r.reason  = why.str();
    return r;
}

Prop3Result verify_prop3(const AnchorForkSpec & spec, std::size_t mc_trials) {
    validate_spec(spec);
    Prop3Result r;
    for (std::size_t i = 0; i < spec.anchors.size(); ++i) {
        if (spec.anchors[i] > spec.fork) {
            r.expected_difference += spec.etas[i];
        }
    }
    const auto ar = exact_fork_entropy(spec, Strategy::ar);
    const auto lc = exact_fork_entropy(spec, Strategy::lc);
    r.ar_entropy = ar.exact;
    r.lc_entropy = lc.exact;
    r.difference = ar.gain - lc.gain;

    bool right_of_fork = false;
    for (auto a : spec.anchors) right_of_fork = right_of_fork || a > spec.fork;
    if (!right_of_fork) {
        r.reason = "no anchor lies right of the fork";
        return r;
    }

    std::ostringstream why;
    bool ok = r.difference > 0.0 && std::abs(r.difference - r.expected_difference) <= kExactTolerance;
    if (!ok) {
        why << "AR - LC = " << r.difference << ", expected " << r.expected_difference << "; ";
    }
    if (mc_trials > 0) {
        const AnchorForkModel model(spec);
        const MonteCarloOptions mc{mc_trials, 0, 1};
        r.ar_monte_carlo = monte_carlo_fork_entropy(model, greedy_config(Strategy::ar, 1.0), mc).mean;
        r.lc_monte_carlo = monte_carlo_fork_entropy(model, greedy_config(Strategy::lc, 1.0), mc).mean;
        if (std::abs(*r.ar_monte_carlo - r.ar_entropy) > kDeterministicMcTolerance ||
            std::abs(*r.lc_monte_carlo - r.lc_entropy) > kDeterministicMcTolerance) {
            ok = false;
            why << "simulated trajectories disagree with the exact entropies; ";
        }
    }
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    r.reason  = why.str();
    return r;
}

} // namespace remask
