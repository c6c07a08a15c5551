#pragma once

#include "remask/rng.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace remask {

struct SampleRecord {
    std::string           problem;
    std::int64_t          trial   = 0;
    std::string           answer;
    bool                  correct = false;
    std::int64_t          nfe     = 1;
    std::optional<double> score;
};

// n samples for one problem in trial order; trials are 0..n-1.
class ProblemResults {
public:
    explicit ProblemResults(std::vector<SampleRecord> records);

    const std::string & problem() const { return problem_; }
    std::span<const SampleRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t correct_count() const;

private:
    std::string               problem_;
    std::vector<SampleRecord> records_;
};

// Groups by problem (first-appearance order) and sorts each group by trial.
std::vector<ProblemResults> group_by_problem(std::vector<SampleRecord> records);

// Unbiased estimator 1 - C(n-c, k) / C(n, k), as a log-space product.
double pass_at_k(std::int64_t n, std::int64_t c, std::int64_t k);

// C(n-c, k) / C(n, k) as a reduced fraction, from the same product. n <= 60.
struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
};
Fraction pass_at_k_failure_fraction(std::int64_t n, std::int64_t c, std::int64_t k);

// 1 if any sample in the longest trial-order prefix with cumulative cost <= B
// is correct, else 0. One value per budget.
std::vector<double> pass_at_nfe(const ProblemResults & results, std::span<const std::int64_t> budgets);

enum class Selector { majority, scorer };
const char * selector_name(Selector s);
Selector parse_selector(const std::string & s);

// Correctness of the answer chosen from the first k trials.
bool best_at_k(const ProblemResults & results, std::size_t k, Selector selector);

// Best@k over the longest prefix within budget B; empty prefix scores 0.
double best_at_nfe(const ProblemResults & results, std::int64_t budget, Selector selector);

// Plug-in entropy (nats) of answer labels over the first k trials.
double answer_entropy(const ProblemResults & results, std::size_t k);

// Synthetic scorers used in place of an outcome reward model.
struct ScorerSpec {
    enum class Kind { oracle, noisy_oracle, constant } kind = Kind::oracle;
    double flip_p = 0.0;   // noisy_oracle
    double value  = 0.0;   // constant

    static ScorerSpec from_json(const nlohmann::json & j);
    nlohmann::json to_json() const;
    double score(bool correct, Rng & rng) const;
};

// JSONL: an optional first line {"meta": {...}} followed by one record per
// line. Readers skip the meta line.
nlohmann::json record_to_json(const SampleRecord & r);
SampleRecord record_from_json(const nlohmann::json & j);
void write_records_jsonl(std::span<const SampleRecord> records, const nlohmann::json & meta, std::ostream & os);
std::vector<SampleRecord> read_records_jsonl(std::istream & is);

} // namespace remask
