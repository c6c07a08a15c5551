#include "remask/error.hpp"
#include "remask/remasking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace remask {

namespace {

void check_candidates(std::span<const std::size_t> masked, std::span<const double> confidences) {
    require(!masked.empty(), Errc::contract_violation, "unmask selection needs a nonempty masked set");
    require(masked.size() == confidences.size(), Errc::contract_violation,
            "confidences must be defined on every masked position");
}

// Index into `masked` of the highest confidence; ties go to the lowest position.
std::size_t argmax_index(std::span<const std::size_t> masked, std::span<const double> confidences) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < masked.size(); ++i) {
        if (confidences[i] > confidences[best] ||
            (confidences[i] == confidences[best] && masked[i] < masked[best])) {
            best = i;
        }
    }
    return best;
}

std::vector<double> log_weights(std::span<const double> confidences, double t_pos) {
    require(t_pos > 0.0, Errc::invalid_argument, "t_pos must be > 0");
    std::vector<double> lw(confidences.size());
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        require(confidences[i] > 0.0, Errc::degenerate_weight,
                "zero confidence cannot be tempered (log 0 is undefined)");
        lw[i] = std::log(confidences[i]) / t_pos;
    }
    return lw;
}

UnmaskSet sorted(UnmaskSet s) {
    std::sort(s.begin(), s.end());
    return s;
}

} // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> tempered_position_weights(std::span<const double> confidences, double t_pos) {
    auto lw = log_weights(confidences, t_pos);
    const double hi = *std::max_element(lw.begin(), lw.end());
    double total = 0.0;
    for (double & w : lw) {
        w = std::exp(w - hi);
        total += w;
    }
    for (double & w : lw) {
        w /= total;
    }
    return lw;
}

UnmaskSet select_random(std::span<const std::size_t> masked, int k, Rng & rng) {
    require(!masked.empty(), Errc::contract_violation, "random remasking needs a nonempty masked set");
    require(k >= 1, Errc::contract_violation, "K must be >= 1");
    std::vector<std::size_t> pool(masked.begin(), masked.end());
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return sorted(std::move(pool));
}

UnmaskSet select_ar(std::span<const std::size_t> masked) {
    require(!masked.empty(), Errc::contract_violation, "AR remasking needs a nonempty masked set");
    return {*std::min_element(masked.begin(), masked.end())};
}

UnmaskSet select_lc(std::span<const std::size_t> masked, std::span<const double> confidences, int k) {
    check_candidates(masked, confidences);
    require(k >= 1, Errc::contract_violation, "K must be >= 1");
    std::vector<std::size_t> order(masked.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (confidences[a] != confidences[b]) {
            return confidences[a] > confidences[b];
        }
        return masked[a] < masked[b];
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    UnmaskSet out;
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(masked[order[i]]);
    }
    return sorted(std::move(out));
}

UnmaskSet select_tlc(std::span<const std::size_t> masked, std::span<const double> confidences, int k, double t_pos,
                     Rng & rng) {
    check_candidates(masked, confidences);
    require(k >= 1, Errc::contract_violation, "K must be >= 1");
    const auto lw = log_weights(confidences, t_pos);

    // Sequential renormalized draws (Plackett-Luce).
    std::vector<std::size_t> remaining(masked.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), masked.size());
    UnmaskSet out;
    std::vector<double> w;
    for (std::size_t draw = 0; draw < take; ++draw) {
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i : remaining) {
            hi = std::max(hi, lw[i]);
        }
        w.assign(remaining.size(), 0.0);
        double total = 0.0;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            w[r] = std::exp(lw[remaining[r]] - hi);
            total += w[r];
        }
        const double u = rng.uniform() * total;
        std::size_t pick = remaining.size() - 1;
        double cum = 0.0;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            cum += w[r];
            if (u < cum) {
                pick = r;
                break;
            }
        }
        out.push_back(masked[remaining[pick]]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return sorted(std::move(out));
}

UnmaskSet select_ct(std::span<const std::size_t> masked, std::span<const double> confidences, double threshold) {
    check_candidates(masked, confidences);
    UnmaskSet out;
    for (std::size_t i = 0; i < masked.size(); ++i) {
        if (confidences[i] > threshold) {
            out.push_back(masked[i]);
        }
    }
    if (out.empty()) {
        out.push_back(masked[argmax_index(masked, confidences)]);
    }
    return sorted(std::move(out));
}

UnmaskSet select_tct(std::span<const std::size_t> masked, std::span<const double> confidences, double threshold,
                     double t_pos, Rng & rng) {
    check_candidates(masked, confidences);
    require(t_pos > 0.0, Errc::invalid_argument, "t_pos must be > 0");
    UnmaskSet out;
    for (std::size_t i = 0; i < masked.size(); ++i) {
        const double p = sigmoid((confidences[i] - threshold) / t_pos);
        if (rng.uniform() < p) {
            out.push_back(masked[i]);
        }
    }
    if (out.empty()) {
        out.push_back(masked[argmax_index(masked, confidences)]);
    }
    return sorted(std::move(out));
}

UnmaskSet select(const DecodeConfig & config, std::span<const std::size_t> masked,
                 std::span<const double> confidences, Rng & rng) {
    switch (config.strategy) {
        case Strategy::random: return select_random(masked, config.k, rng);
        case Strategy::ar:     return select_ar(masked);
        case Strategy::lc:     return select_lc(masked, confidences, config.k);
        case Strategy::tlc:    return select_tlc(masked, confidences, config.k, config.t_pos, rng);
        case Strategy::ct:     return select_ct(masked, confidences, config.threshold);
        case Strategy::tct:    return select_tct(masked, confidences, config.threshold, config.t_pos, rng);
    }
    fail(Errc::invalid_argument, "unknown strategy");
}

namespace {

void plackett_luce_sets(std::span<const std::size_t> masked, std::span<const double> weights, std::size_t take,
                        std::vector<bool> & used, std::vector<std::size_t> & chosen, double p,
                        std::map<UnmaskSet, double> & acc) {
    if (chosen.size() == take) {
        acc[sorted(chosen)] += p;
        return;
    }
    double remaining = 0.0;
    for (std::size_t i = 0; i < masked.size(); ++i) {
        if (!used[i]) remaining += weights[i];
    }
    for (std::size_t i = 0; i < masked.size(); ++i) {
        if (used[i] || weights[i] == 0.0) continue;
        used[i] = true;
        chosen.push_back(masked[i]);
        plackett_luce_sets(masked, weights, take, used, chosen, p * weights[i] / remaining, acc);
        chosen.pop_back();
        used[i] = false;
    }
}

} // namespace

std::vector<WeightedSet> selection_distribution(const DecodeConfig & config, std::span<const std::size_t> masked,
                                                std::span<const double> confidences) {
    check_candidates(masked, confidences);
    require(masked.size() <= 20, Errc::size_limit, "exact selection law limited to 20 candidates");
    std::map<UnmaskSet, double> acc;
    const std::size_t m    = masked.size();
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(config.k), m);

    switch (config.strategy) {
        case Strategy::ar:
            acc[select_ar(masked)] = 1.0;
            break;
        case Strategy::lc:
            acc[select_lc(masked, confidences, config.k)] = 1.0;
            break;
        case Strategy::ct:
            acc[select_ct(masked, confidences, config.threshold)] = 1.0;
            break;
        case Strategy::random: {
            std::vector<double> uniform(m, 1.0);
            std::vector<bool> used(m, false);
            std::vector<std::size_t> chosen;
            plackett_luce_sets(masked, uniform, take, used, chosen, 1.0, acc);
            break;
        }
        case Strategy::tlc: {
            const auto w = tempered_position_weights(confidences, config.t_pos);
            std::vector<bool> used(m, false);
            std::vector<std::size_t> chosen;
            plackett_luce_sets(masked, w, take, used, chosen, 1.0, acc);
            break;
        }
        case Strategy::tct: {
            std::vector<double> incl(m);
            for (std::size_t i = 0; i < m; ++i) {
                incl[i] = sigmoid((confidences[i] - config.threshold) / config.t_pos);
            }
            for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
                double p = 1.0;
                UnmaskSet s;
                for (std::size_t i = 0; i < m; ++i) {
                    if (bits & (1u << i)) {
                        p *= incl[i];
                        s.push_back(masked[i]);
                    } else {
                        p *= 1.0 - incl[i];
                    }
                }
                if (p == 0.0) continue;
                if (s.empty()) {
                    s.push_back(masked[argmax_index(masked, confidences)]);
                }
                acc[sorted(std::move(s))] += p;
            }
            break;
        }
    }
    std::vector<WeightedSet> out;
    out.reserve(acc.size());
    for (auto & [set, p] : acc) {
        out.push_back({set, p});
    }
    return out;
}

} // namespace remask
