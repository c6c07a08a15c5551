#pragma once

#include "remask/analysis.hpp"
#include "remask/decode_config.hpp"
#include "remask/metrics.hpp"
#include "remask/models.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace remask {

// Maps a completed sequence to an outcome label.
struct OutcomeMap {
    enum class Kind { identity, position, sum, label } kind = Kind::identity;
    std::size_t position = 0;

    // "identity", "position:<k>", "sum", "label"
    static OutcomeMap parse(const std::string & s);
    std::string to_string() const;

    // `tabular` supplies labels for Kind::label; sequences without a label
    // fall back to their token string.
    OutcomeFn bind(const TabularDataModel * tabular) const;
};

struct ModelSource {
    enum class Kind { tabular, anchor_fork } kind = Kind::tabular;
    nlohmann::json body;   // inline model or the parsed file
    std::string    path;   // empty when inline
};

// A constructed predictor together with the typed model behind it.
struct LoadedModel {
    std::optional<TabularDataModel> tabular;
    std::optional<AnchorForkModel>  anchor_fork;

    const Predictor & predictor() const;
};

LoadedModel load_model(const ModelSource & src);

struct SandwichSettings {
    ModelSource model;
    std::size_t fork = 0;
    OutcomeMap  outcome;
};

struct VerifySettings {
    std::vector<double>             t_pos_grid   = {0.1, 0.5, 1.0, 2.0};
    std::size_t                     mc_trials    = 20000;
    std::size_t                     prop2_specs  = 100;
    std::vector<double>             prop2_grid   = {0.1, 0.5, 1.0, 2.0, 5.0};
    std::size_t                     sandwich_instances = 10;
    std::optional<SandwichSettings> sandwich;
};

struct ExperimentConfig {
    ModelSource                  model;
    std::vector<DecodeConfig>    decode;
    std::size_t                  trials = 0;
    OutcomeMap                   outcome;
    std::set<std::string>        correct;
    std::vector<std::string>     metrics = {"pass_at_k", "pass_at_nfe", "best_at_k", "answer_entropy"};
    std::vector<std::int64_t>    k_values;
    std::vector<std::int64_t>    nfe_budgets;
    ScorerSpec                   scorer;
    std::string                  out_dir = "out";
    std::optional<std::uint64_t> master_seed;
    unsigned                     workers = 1;
    std::string                  format  = "csv";
    std::string                  problem = "p0";
    std::string                  records;   // passk input
    VerifySettings               verify;

    // Paths inside `j` resolve against base_dir.
    static ExperimentConfig from_json(const nlohmann::json & j, const std::filesystem::path & base_dir);
    static ExperimentConfig load(const std::filesystem::path & path);

    nlohmann::json to_json() const;

    // Digest of the settings that affect results (out_dir and workers
    // excluded), 16 hex digits.
    std::string hash() const;

    void validate() const;

    // Seed for decode config i: experiment master_seed if set, else the
    // config's own.
    std::uint64_t seed_for(std::size_t i) const;
};

// Command-line values that replace config-file values when present.
struct Overrides {
    std::optional<std::string>   out_dir;
    std::optional<std::uint64_t> master_seed;
    std::optional<unsigned>      workers;
    std::optional<std::string>   format;
    std::optional<std::size_t>   trials;
    std::optional<std::string>   records;

    static Overrides from_json(const nlohmann::json & j);
    void apply(ExperimentConfig & cfg) const;
};

std::string fnv1a64_hex(const std::string & bytes);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path & path, const std::string & contents);

std::string csv_header(const std::string & config_hash, std::uint64_t master_seed,
                       const std::vector<std::string> & extra = {});

struct RunResult {
    bool                     ok = true;
    std::vector<std::string> files;   // written, in order
    std::string              message;
};

// Anchor-fork verification. `path` is a raw spec (top-level "fork") or an
// experiment config with an anchor_fork model.
RunResult run_verify(const std::filesystem::path & path, const Overrides & ov);

RunResult run_sweep(const std::filesystem::path & path, const Overrides & ov);
RunResult run_sweep(ExperimentConfig cfg);

RunResult run_enumerate(const std::filesystem::path & path, const Overrides & ov);

// Metrics over an existing JSONL record file. `path` may be empty when the
// overrides name the records file.
RunResult run_passk(const std::filesystem::path & path, const Overrides & ov);

// Sweep building blocks.
std::vector<SampleRecord> sample_records(const ExperimentConfig & cfg, const LoadedModel & model, std::size_t index);

} // namespace remask
