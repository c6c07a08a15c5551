#include "remask/error.hpp"
#include "remask/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace remask {

ProblemResults::ProblemResults(std::vector<SampleRecord> records) : records_(std::move(records)) {
    require(!records_.empty(), Errc::contract_violation, "problem results need at least one record");
    problem_ = records_.front().problem;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto & r = records_[i];
        require(r.problem == problem_, Errc::contract_violation, "records mix problems '" + problem_ + "' and '" +
                                                                     r.problem + "'");
        require(r.trial == static_cast<std::int64_t>(i), Errc::contract_violation,
                "trial indices must be contiguous from 0 (problem '" + problem_ + "', expected trial " +
                    std::to_string(i) + ", got " + std::to_string(r.trial) + ")");
        require(r.nfe >= 1, Errc::contract_violation, "nfe cost must be >= 1");
    }
}

std::size_t ProblemResults::correct_count() const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const SampleRecord & r) { return r.correct; }));
}

std::vector<ProblemResults> group_by_problem(std::vector<SampleRecord> records) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::vector<SampleRecord>> groups;
    for (auto & r : records) {
        auto [it, inserted] = index.try_emplace(r.problem, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(std::move(r));
    }
    std::vector<ProblemResults> out;
    for (auto & g : groups) {
        std::stable_sort(g.begin(), g.end(), [](const SampleRecord & a, const SampleRecord & b) { return a.trial < b.trial; });
        out.emplace_back(std::move(g));
    }
    return out;
}

double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k) {
    require(n >= 1, Errc::contract_violation, "pass@k needs n >= 1");
    require(c >= 0 && c <= n, Errc::contract_violation, "pass@k needs 0 <= c <= n");
    require(k >= 1 && k <= n, Errc::contract_violation, "pass@k needs 1 <= k <= n");
    if (n - c < k) {
        return 1.0;
    }
    // C(n-c, k) / C(n, k) = prod_{i = n-c+1}^{n} (1 - k / i)
    double log_ratio = 0.0;
    for (std::int64_t i = n - c + 1; i <= n; ++i) {
        log_ratio += std::log1p(-static_cast<double>(k) / static_cast<double>(i));
    }
    return -std::expm1(log_ratio);
}

Fraction pass_at_k_failure_fraction(std::int64_t n, std::int64_t c, std::int64_t k) {
    require(n >= 1 && n <= 60, Errc::contract_violation, "exact pass@k fraction needs 1 <= n <= 60");
    require(c >= 0 && c <= n, Errc::contract_violation, "pass@k needs 0 <= c <= n");
    require(k >= 1 && k <= n, Errc::contract_violation, "pass@k needs 1 <= k <= n");
    if (n - c < k) {
        return {0, 1};
    }
    Fraction f{1, 1};
    for (std::int64_t i = n - c + 1; i <= n; ++i) {
        std::uint64_t a = static_cast<std::uint64_t>(i - k);
        std::uint64_t b = static_cast<std::uint64_t>(i);
        const std::uint64_t g1 = std::gcd(a, f.den);
        const std::uint64_t g2 = std::gcd(b, f.num);
        a /= g1;
        b /= g2;
        f.num = f.num / g2 * a;
        f.den = f.den / g1 * b;
        const std::uint64_t g = std::gcd(f.num, f.den);
        f.num /= g;
        f.den /= g;
    }
    return f;
}

namespace {

std::size_t prefix_within(const ProblemResults & results, std::int64_t budget) {
    std::int64_t spent = 0;
    std::size_t n = 0;
    for (const auto & r : results.records()) {
        if (spent + r.nfe > budget) break;
        spent += r.nfe;
        ++n;
    }
    return n;
}

} // namespace

std::vector<double> pass_at_nfe(const ProblemResults & results, std::span<const std::int64_t> budgets) {
    std::vector<double> out;
    out.reserve(budgets.size());
    const auto recs = results.records();
    for (std::int64_t b : budgets) {
        const std::size_t n = prefix_within(results, b);
        const bool any = std::any_of(recs.begin(), recs.begin() + static_cast<std::ptrdiff_t>(n),
                                     [](const SampleRecord & r) { return r.correct; });
        out.push_back(any ? 1.0 : 0.0);
    }
    return out;
}

const char * selector_name(Selector s) {
    return s == Selector::majority ? "majority" : "scorer";
}

Selector parse_selector(const std::string & s) {
    if (s == "majority") return Selector::majority;
    if (s == "scorer") return Selector::scorer;
    fail(Errc::parse_error, "unknown selector '" + s + "' (expected majority or scorer)");
}

bool best_at_k(const ProblemResults & results, std::size_t k, Selector selector) {
    require(k >= 1 && k <= results.size(), Errc::contract_violation, "best@k needs 1 <= k <= n");
    const auto recs = results.records().first(k);
    if (selector == Selector::scorer) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            require(recs[i].score.has_value(), Errc::contract_violation,
                    "scorer selection needs a score on every record (problem '" + results.problem() + "', trial " +
                        std::to_string(recs[i].trial) + ")");
            if (*recs[i].score > *recs[best].score) best = i;
        }
        return recs[best].correct;
    }
    // Majority: modal label; ties go to the label seen first.
    std::unordered_map<std::string, std::size_t> first_seen, count;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        first_seen.try_emplace(recs[i].answer, i);
        ++count[recs[i].answer];
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto & a = recs[i].answer;
        const auto & b = recs[best].answer;
        if (count[a] > count[b] || (count[a] == count[b] && first_seen[a] < first_seen[b])) best = i;
    }
    // Correctness of a label is taken from its earliest sample.
    return recs[first_seen[recs[best].answer]].correct;
}

double best_at_nfe(const ProblemResults & results, std::int64_t budget, Selector selector) {
    const std::size_t n = prefix_within(results, budget);
    if (n == 0) return 0.0;
    return best_at_k(results, n, selector) ? 1.0 : 0.0;
}

double answer_entropy(const ProblemResults & results, std::size_t k) {
    require(k >= 1 && k <= results.size(), Errc::contract_violation, "answer entropy needs 1 <= k <= n");
    std::unordered_map<std::string, std::size_t> index;
    std::vector<double> counts;
    for (const auto & r : results.records().first(k)) {
        auto [it, inserted] = index.try_emplace(r.answer, counts.size());
        if (inserted) counts.push_back(0.0);
        counts[it->second] += 1.0;
    }
    double h = 0.0;
    for (double c : counts) {
        const double p = c / static_cast<double>(k);
        h -= p * std::log(p);
    }
    return h;
}

ScorerSpec ScorerSpec::from_json(const nlohmann::json & j) {
    ScorerSpec s;
    try {
        const std::string kind = j.is_string() ? j.get<std::string>() : j.at("type").get<std::string>();
        if (kind == "oracle") {
            s.kind = Kind::oracle;
        } else if (kind == "noisy_oracle") {
            s.kind   = Kind::noisy_oracle;
            s.flip_p = j.is_object() ? j.value("flip_p", 0.1) : 0.1;
            require(s.flip_p >= 0.0 && s.flip_p <= 1.0, Errc::invalid_argument, "flip_p must lie in [0, 1]");
        } else if (kind == "constant") {
            s.kind  = Kind::constant;
            s.value = j.is_object() ? j.value("value", 0.0) : 0.0;
        } else {
            fail(Errc::parse_error, "unknown scorer '" + kind + "'");
        }
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("scorer: ") + e.what());
    }
    return s;
}

nlohmann::json ScorerSpec::to_json() const {
    switch (kind) {
        case Kind::oracle:       return {{"type", "oracle"}};
        case Kind::noisy_oracle: return {{"type", "noisy_oracle"}, {"flip_p", flip_p}};
        case Kind::constant:     return {{"type", "constant"}, {"value", value}};
    }
    return {};
}

double ScorerSpec::score(bool correct, Rng & rng) const {
    switch (kind) {
        case Kind::oracle:
            return correct ? 1.0 : 0.0;
        case Kind::noisy_oracle: {
            const bool flipped = rng.uniform() < flip_p;
            return (correct != flipped) ? 1.0 : 0.0;
        }
        case Kind::constant:
            return value;
    }
    return 0.0;
}

} // namespace remask
