#include "remask/error.hpp"
#include "remask/experiment.hpp"
#include "remask/log.hpp"
#include "remask/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace remask {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kScorerStream = 0x5c0feULL;

const char * kNfeNote = "pass_at_nfe: per-problem trial-order prefix within budget, averaged over problems";

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Series {
    std::string                 label;
    std::vector<ProblemResults> problems;
};

struct Row {
    std::string  config;
    std::string  selector;   // best_at_* only
    std::int64_t x;
    double       value;
};

std::vector<std::int64_t> default_k_values(std::size_t n) {
    std::vector<std::int64_t> ks;
    for (std::int64_t k = 1; static_cast<std::size_t>(k) <= n; k *= 2) ks.push_back(k);
    if (ks.back() != static_cast<std::int64_t>(n)) ks.push_back(static_cast<std::int64_t>(n));
    return ks;
}

bool has_scores(const std::vector<ProblemResults> & problems) {
    for (const auto & p : problems) {
        for (const auto & r : p.records()) {
            if (!r.score) return false;
        }
    }
    return true;
}

void write_metric(const ExperimentConfig & cfg, const std::string & hash, std::uint64_t seed, const std::string & name,
                  bool with_selector, const std::vector<Row> & rows, RunResult & result) {
    std::string body;
    fs::path path = fs::path(cfg.out_dir) / (name + (cfg.format == "csv" ? ".csv" : ".json"));
    if (cfg.format == "csv") {
        body = csv_header(hash, seed, {kNfeNote});
        body += with_selector ? "config,selector,budget_or_k,value\n" : "config,budget_or_k,value\n";
        for (const auto & r : rows) {
            body += r.config + ",";
            if (with_selector) body += r.selector + ",";
            body += std::to_string(r.x) + "," + fmt_value(r.value) + "\n";
        }
    } else {
        ojson j;
        j["meta"] = {{"config_hash", hash}, {"master_seed", seed}, {"note", kNfeNote}};
        ojson arr = ojson::array();
        for (const auto & r : rows) {
            ojson o;
            o["config"] = r.config;
            if (with_selector) o["selector"] = r.selector;
            o["budget_or_k"] = r.x;
            o["value"]       = r.value;
            arr.push_back(o);
        }
        j["rows"] = arr;
        body = j.dump(2) + "\n";
    }
    write_file_atomic(path, body);
    result.files.push_back(path.string());
}

void write_metrics(const ExperimentConfig & cfg, const std::string & hash, std::uint64_t seed,
                   const std::vector<Series> & series, RunResult & result) {
    std::size_t n_min = std::numeric_limits<std::size_t>::max();
    std::int64_t nfe_max = 1;
    for (const auto & s : series) {
        for (const auto & p : s.problems) {
            n_min = std::min(n_min, p.size());
            for (const auto & r : p.records()) nfe_max = std::max(nfe_max, r.nfe);
        }
    }
    require(n_min != std::numeric_limits<std::size_t>::max(), Errc::invalid_argument, "no records to score");
    std::vector<std::int64_t> ks = cfg.k_values.empty() ? default_k_values(n_min) : cfg.k_values;
    for (auto k : ks) {
        require(k >= 1 && static_cast<std::size_t>(k) <= n_min, Errc::invalid_argument,
                "k = " + std::to_string(k) + " exceeds the " + std::to_string(n_min) + " available samples");
    }
    std::vector<std::int64_t> budgets = cfg.nfe_budgets;
    if (budgets.empty()) {
        for (auto k : ks) budgets.push_back(k * nfe_max);
    }

    auto wants = [&](const char * m) { return std::find(cfg.metrics.begin(), cfg.metrics.end(), m) != cfg.metrics.end(); };
    auto mean_over = [](const std::vector<ProblemResults> & ps, auto && f) {
        double s = 0.0;
        for (const auto & p : ps) s += f(p);
        return s / static_cast<double>(ps.size());
    };

    if (wants("pass_at_k")) {
        std::vector<Row> rows;
        for (const auto & s : series) {
            for (auto k : ks) {
                rows.push_back({s.label, "", k, mean_over(s.problems, [&](const ProblemResults & p) {
                                    return pass_at_k(static_cast<std::int64_t>(p.size()),
                                                     static_cast<std::int64_t>(p.correct_count()), k);
                                })});
            }
        }
        write_metric(cfg, hash, seed, "pass_at_k", false, rows, result);
    }
    if (wants("pass_at_nfe")) {
        std::vector<Row> rows;
        for (const auto & s : series) {
            std::vector<double> acc(budgets.size(), 0.0);
            for (const auto & p : s.problems) {
                const auto v = pass_at_nfe(p, budgets);
                for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
            }
            for (std::size_t i = 0; i < budgets.size(); ++i) {
                rows.push_back({s.label, "", budgets[i], acc[i] / static_cast<double>(s.problems.size())});
            }
        }
        write_metric(cfg, hash, seed, "pass_at_nfe", false, rows, result);
    }
    if (wants("best_at_k")) {
        std::vector<Row> rows;
        for (const auto & s : series) {
            std::vector<Selector> sels = {Selector::majority};
            if (has_scores(s.problems)) sels.push_back(Selector::scorer);
            for (auto sel : sels) {
                for (auto k : ks) {
                    rows.push_back({s.label, selector_name(sel), k, mean_over(s.problems, [&](const ProblemResults & p) {
                                        return best_at_k(p, static_cast<std::size_t>(k), sel) ? 1.0 : 0.0;
                                    })});
                }
            }
        }
        write_metric(cfg, hash, seed, "best_at_k", true, rows, result);
    }
    if (wants("best_at_nfe")) {
        std::vector<Row> rows;
        for (const auto & s : series) {
            std::vector<Selector> sels = {Selector::majority};
            if (has_scores(s.problems)) sels.push_back(Selector::scorer);
            for (auto sel : sels) {
                for (auto b : budgets) {
                    rows.push_back({s.label, selector_name(sel), b, mean_over(s.problems, [&](const ProblemResults & p) {
                                        return best_at_nfe(p, b, sel);
                                    })});
                }
            }
        }
        write_metric(cfg, hash, seed, "best_at_nfe", true, rows, result);
    }
    if (wants("answer_entropy")) {
        std::vector<Row> rows;
        for (const auto & s : series) {
            for (auto k : ks) {
                rows.push_back({s.label, "", k, mean_over(s.problems, [&](const ProblemResults & p) {
                                    return answer_entropy(p, static_cast<std::size_t>(k));
                                })});
            }
        }
        write_metric(cfg, hash, seed, "answer_entropy", false, rows, result);
    }
}

const TabularDataModel * tabular_of(const LoadedModel & m) {
    return m.tabular ? &*m.tabular : nullptr;
}

std::string series_label(const ExperimentConfig & cfg, std::size_t i) {
    return std::to_string(i) + "_" + cfg.decode[i].label();
}

} // namespace

std::vector<SampleRecord> sample_records(const ExperimentConfig & cfg, const LoadedModel & model, std::size_t index) {
    const DecodeConfig & dc = cfg.decode.at(index);
    const std::uint64_t seed = cfg.seed_for(index);
    const RngPolicy policy{seed};
    const RngPolicy scorer_policy{derive_stream_seed(seed, kScorerStream)};
    const OutcomeFn outcome = cfg.outcome.bind(tabular_of(model));
    const Predictor & pred = model.predictor();
    return parallel_map(cfg.trials, cfg.workers, [&](std::size_t trial) {
        Rng rng = policy.stream(trial);
        const Trajectory t = decode(pred, dc, rng);
        SampleRecord r;
        r.problem = cfg.problem;
        r.trial   = static_cast<std::int64_t>(trial);
        r.answer  = outcome(t.final_sequence.tokens());
        r.correct = cfg.correct.count(r.answer) == 1;
        r.nfe     = t.nfe;
        Rng srng  = scorer_policy.stream(trial);
        r.score   = cfg.scorer.score(r.correct, srng);
        return r;
    });
}

RunResult run_sweep(ExperimentConfig cfg) {
    cfg.validate();
    const LoadedModel model = load_model(cfg.model);
    const std::string hash = cfg.hash();
    const std::uint64_t seed = cfg.seed_for(0);

    RunResult result;
    std::vector<Series> series;
    for (std::size_t i = 0; i < cfg.decode.size(); ++i) {
        log::info("sweep: config " + std::to_string(i) + " " + cfg.decode[i].label());
        auto records = sample_records(cfg, model, i);
        nlohmann::json meta = {{"config_hash", hash},
                               {"master_seed", cfg.seed_for(i)},
                               {"config_index", i},
                               {"decode", cfg.decode[i]}};
        std::ostringstream os;
        write_records_jsonl(records, meta, os);
        const fs::path p = fs::path(cfg.out_dir) /
                           ("records_" + std::to_string(i) + "_" + std::string(strategy_name(cfg.decode[i].strategy)) +
                            ".jsonl");
        write_file_atomic(p, os.str());
        result.files.push_back(p.string());
        series.push_back({series_label(cfg, i), group_by_problem(std::move(records))});
    }
    write_metrics(cfg, hash, seed, series, result);
    result.message = "wrote " + std::to_string(result.files.size()) + " files";
    return result;
}

RunResult run_sweep(const fs::path & path, const Overrides & ov) {
    ExperimentConfig cfg = ExperimentConfig::load(path);
    ov.apply(cfg);
    return run_sweep(std::move(cfg));
}

RunResult run_enumerate(const fs::path & path, const Overrides & ov) {
    ExperimentConfig cfg = ExperimentConfig::load(path);
    ov.apply(cfg);
    require(!cfg.decode.empty(), Errc::invalid_argument, "decode list is empty");
    for (const auto & d : cfg.decode) d.validate();
    const LoadedModel model = load_model(cfg.model);
    const std::string hash = cfg.hash();
    const OutcomeFn outcome = cfg.outcome.bind(tabular_of(model));

    RunResult result;
    for (std::size_t i = 0; i < cfg.decode.size(); ++i) {
        const auto dist = exact_final_distribution(model.predictor(), cfg.decode[i]);
        ojson j;
        j["meta"]   = {{"config_hash", hash}, {"master_seed", cfg.seed_for(i)}, {"config_index", i}};
        j["decode"] = ojson::parse(nlohmann::json(cfg.decode[i]).dump());
        double total = 0.0;
        ojson arr = ojson::array();
        for (const auto & sp : dist) {
            ojson e;
            e["tokens"]  = sp.tokens;
            e["p"]       = sp.p;
            e["outcome"] = outcome(sp.tokens);
            arr.push_back(e);
            total += sp.p;
        }
        j["total"]        = total;
        j["distribution"] = arr;
        const fs::path p = fs::path(cfg.out_dir) /
                           ("distribution_" + std::to_string(i) + "_" +
                            std::string(strategy_name(cfg.decode[i].strategy)) + ".json");
        write_file_atomic(p, j.dump(2) + "\n");
        result.files.push_back(p.string());
    }
    result.message = "wrote " + std::to_string(result.files.size()) + " files";
    return result;
}

RunResult run_passk(const fs::path & path, const Overrides & ov) {
    ExperimentConfig cfg;
    if (!path.empty()) cfg = ExperimentConfig::load(path);
    ov.apply(cfg);
    require(!cfg.records.empty(), Errc::invalid_argument, "passk needs a records file (--records)");
    std::ifstream in(cfg.records);
    require(in.good(), Errc::io_error, "cannot open " + cfg.records);
    auto records = read_records_jsonl(in);
    require(!records.empty(), Errc::invalid_argument, cfg.records + " holds no records");

    const std::string hash = fnv1a64_hex(cfg.hash() + fs::path(cfg.records).filename().string());
    RunResult result;
    std::vector<Series> series = {{fs::path(cfg.records).stem().string(), group_by_problem(std::move(records))}};
    write_metrics(cfg, hash, cfg.master_seed.value_or(0), series, result);
    result.message = "wrote " + std::to_string(result.files.size()) + " files";
    return result;
}

} // namespace remask
