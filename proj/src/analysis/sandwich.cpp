#include "remask/analysis.hpp"
#include "remask/error.hpp"
#include "remask/parallel.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace remask {

namespace {

// Interns labels in first-appearance order so summation order is fixed by
// the input order.
class LabelIndex {
public:
    std::size_t id(const std::string & label) {
        auto [it, inserted] = ids_.try_emplace(label, labels_.size());
        if (inserted) {
            labels_.push_back(label);
        }
        return it->second;
    }
    std::size_t size() const { return labels_.size(); }
    const std::string & label(std::size_t i) const { return labels_[i]; }

private:
    std::unordered_map<std::string, std::size_t> ids_;
    std::vector<std::string>                     labels_;
};

double plogp_sum(const std::vector<double> & p) {
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return h;
}

// Entropy of the normalized row; the row total is passed in.
double conditional_entropy(const std::vector<double> & row, double total) {
    double h = 0.0;
    for (double x : row) {
        if (x > 0.0) {
            const double q = x / total;
            h -= q * std::log(q);
        }
    }
    return h;
}

} // namespace

SandwichReport sandwich_from_distribution(std::span<const SequenceProbability> dist, std::size_t fork,
                                          const OutcomeFn & outcome) {
    LabelIndex forks, outcomes;
    std::vector<std::size_t> fi, oi;
    for (const auto & sp : dist) {
        require(fork < sp.tokens.size(), Errc::contract_violation, "fork position outside the sequence");
        fi.push_back(forks.id(std::to_string(sp.tokens[fork])));
        oi.push_back(outcomes.id(outcome(sp.tokens)));
    }
    std::vector<std::vector<double>> joint(forks.size(), std::vector<double>(outcomes.size(), 0.0));
    double total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        joint[fi[i]][oi[i]] += dist[i].p;
        total += dist[i].p;
    }
    require(total > 0.0, Errc::evidence_zero, "distribution has no mass");

    std::vector<double> pf(forks.size(), 0.0), po(outcomes.size(), 0.0);
    for (std::size_t f = 0; f < forks.size(); ++f) {
        for (std::size_t o = 0; o < outcomes.size(); ++o) {
            joint[f][o] /= total;
            pf[f] += joint[f][o];
            po[o] += joint[f][o];
        }
    }

    SandwichReport r;
    r.h_fork    = plogp_sum(pf);
    r.h_outcome = plogp_sum(po);
    for (std::size_t o = 0; o < outcomes.size(); ++o) {
        if (po[o] == 0.0) continue;
        std::vector<double> col(forks.size());
        for (std::size_t f = 0; f < forks.size(); ++f) col[f] = joint[f][o];
        r.epsilon += po[o] * conditional_entropy(col, po[o]);
    }
    for (std::size_t f = 0; f < forks.size(); ++f) {
        if (pf[f] == 0.0) continue;
        r.delta += pf[f] * conditional_entropy(joint[f], pf[f]);
    }
    r.lower_holds = r.h_fork - r.epsilon <= r.h_outcome + kEntropyRoundingSlack;
    r.upper_holds = r.h_outcome <= r.h_fork + r.delta + kEntropyRoundingSlack;
    return r;
}

SandwichReport verify_sandwich(const TabularDataModel & model, std::size_t fork, const OutcomeFn & outcome,
                               const MaskedSequence & state) {
    require(state.length() == model.length(), Errc::contract_violation, "state length does not match model");
    require(fork < model.length(), Errc::contract_violation, "fork position outside the model");
    std::vector<SequenceProbability> dist;
    for (const auto & e : model.support()) {
        if (model.consistent(e, state)) {
            dist.push_back({e.tokens, e.p});
        }
    }
    require(!dist.empty(), Errc::evidence_zero, "no support sequence agrees with " + state.to_string());
    return sandwich_from_distribution(dist, fork, outcome);
}

SemanticEntropy semantic_entropy(const Predictor & model, const DecodeConfig & config, const OutcomeFn & outcome,
                                 const MonteCarloOptions & mc) {
    require(mc.trials >= 1, Errc::invalid_argument, "semantic entropy needs at least one trial");
    const RngPolicy policy{mc.master_seed};
    const auto labels = parallel_map(mc.trials, mc.workers, [&](std::size_t trial) {
        Rng rng = policy.stream(trial);
        const Trajectory t = decode(model, config, rng);
        return outcome(t.final_sequence.tokens());
    });

    SemanticEntropy out;
    LabelIndex idx;
    std::vector<double> counts;
    for (const auto & l : labels) {
        const std::size_t i = idx.id(l);
        if (i == counts.size()) counts.push_back(0.0);
        counts[i] += 1.0;
    }
    for (double & c : counts) c /= static_cast<double>(labels.size());
    out.monte_carlo.mean   = plogp_sum(counts);
    out.monte_carlo.trials = labels.size();

    if (model.length() <= 6) {
        try {
            const auto dist = exact_final_distribution(model, config);
            LabelIndex ex;
            std::vector<double> p;
            for (const auto & sp : dist) {
                const std::size_t i = ex.id(outcome(sp.tokens));
                if (i == p.size()) p.push_back(0.0);
                p[i] += sp.p;
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
                out.exact_distribution[ex.label(i)] = p[i];
            }
            out.exact = plogp_sum(p);
        } catch (const Error & e) {
            if (e.code() != Errc::size_limit) throw;
        }
    }
    return out;
}

Corollary1Result verify_corollary1(const Predictor & model, std::size_t fork, const OutcomeFn & outcome,
                                   const DecodeConfig & low, const DecodeConfig & high) {
    const auto dist_low  = exact_final_distribution(model, low);
    const auto dist_high = exact_final_distribution(model, high);
    const auto s_low  = sandwich_from_distribution(dist_low, fork, outcome);
    const auto s_high = sandwich_from_distribution(dist_high, fork, outcome);

    Corollary1Result r;
    r.fork_entropy_low     = s_low.h_fork;
    r.fork_entropy_high    = s_high.h_fork;
    r.outcome_entropy_low  = s_low.h_outcome;
    r.outcome_entropy_high = s_high.h_outcome;
    r.epsilon = std::max(s_low.epsilon, s_high.epsilon);
    r.delta   = std::max(s_low.delta, s_high.delta);

    const double gain      = r.fork_entropy_high - r.fork_entropy_low;
    const double threshold = r.epsilon + r.delta;
    std::ostringstream os;
    os << "fork entropy gain " << gain << " vs epsilon + delta " << threshold;
    r.reason = os.str();
    if (gain > threshold) {
        r.verdict = r.outcome_entropy_high > r.outcome_entropy_low ? Verdict::pass : Verdict::fail;
    }
    return r;
}

} // namespace remask
