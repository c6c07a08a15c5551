#include "remask/error.hpp"
#include "remask/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace remask {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json_file(const fs::path & path) {
    std::ifstream in(path);
    require(in.good(), Errc::io_error, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, path.string() + ": " + e.what());
    }
}

fs::path resolve(const fs::path & base, const std::string & p) {
    const fs::path q(p);
    return q.is_absolute() || base.empty() ? q : base / q;
}

ModelSource parse_model_source(const nlohmann::json & j, const fs::path & base) {
    require(j.is_object(), Errc::parse_error, "model must be an object");
    ModelSource src;
    const std::string type = j.value("type", "");
    if (type == "tabular") {
        src.kind = ModelSource::Kind::tabular;
    } else if (type == "anchor_fork") {
        src.kind = ModelSource::Kind::anchor_fork;
    } else {
        fail(Errc::parse_error, "model.type must be 'tabular' or 'anchor_fork', got '" + type + "'");
    }
    if (j.contains("path")) {
        const fs::path p = resolve(base, j.at("path").get<std::string>());
        require(fs::exists(p), Errc::io_error, "model file " + p.string() + " does not exist");
        src.path = p.string();
        src.body = read_json_file(p);
    } else if (j.contains("inline")) {
        src.body = j.at("inline");
    } else {
        src.body = j;
        src.body.erase("type");
    }
    return src;
}

nlohmann::json model_source_json(const ModelSource & src) {
    return {{"type", src.kind == ModelSource::Kind::tabular ? "tabular" : "anchor_fork"}, {"inline", src.body}};
}

const std::set<std::string> kKnownMetrics = {"pass_at_k", "pass_at_nfe", "best_at_k", "best_at_nfe",
                                             "answer_entropy"};

VerifySettings parse_verify(const nlohmann::json & j, const fs::path & base) {
    static const std::set<std::string> known = {"t_pos_grid", "mc_trials",          "prop2_specs",
                                                "prop2_grid", "sandwich_instances", "sandwich"};
    VerifySettings v;
    for (const auto & item : j.items()) {
        require(known.count(item.key()) == 1, Errc::parse_error, "unknown verify field '" + item.key() + "'");
    }
    if (j.contains("t_pos_grid")) v.t_pos_grid = j.at("t_pos_grid").get<std::vector<double>>();
    if (j.contains("mc_trials")) v.mc_trials = j.at("mc_trials").get<std::size_t>();
    if (j.contains("prop2_specs")) v.prop2_specs = j.at("prop2_specs").get<std::size_t>();
    if (j.contains("prop2_grid")) v.prop2_grid = j.at("prop2_grid").get<std::vector<double>>();
    if (j.contains("sandwich_instances")) v.sandwich_instances = j.at("sandwich_instances").get<std::size_t>();
    if (j.contains("sandwich") && !j.at("sandwich").is_null()) {
        const auto & s = j.at("sandwich");
        SandwichSettings ss;
        ss.model   = parse_model_source(s.at("model"), base);
        ss.fork    = s.at("fork").get<std::size_t>();
        ss.outcome = OutcomeMap::parse(s.value("outcome_map", "identity"));
        v.sandwich = std::move(ss);
    }
    return v;
}

nlohmann::json verify_json(const VerifySettings & v) {
    nlohmann::json j = {{"t_pos_grid", v.t_pos_grid},
                        {"mc_trials", v.mc_trials},
                        {"prop2_specs", v.prop2_specs},
                        {"prop2_grid", v.prop2_grid},
                        {"sandwich_instances", v.sandwich_instances}};
    if (v.sandwich) {
        j["sandwich"] = {{"model", model_source_json(v.sandwich->model)},
                         {"fork", v.sandwich->fork},
                         {"outcome_map", v.sandwich->outcome.to_string()}};
    }
    return j;
}

} // namespace

OutcomeMap OutcomeMap::parse(const std::string & s) {
    OutcomeMap m;
    if (s == "identity") {
        m.kind = Kind::identity;
    } else if (s == "sum") {
        m.kind = Kind::sum;
    } else if (s == "label") {
        m.kind = Kind::label;
    } else if (s.rfind("position:", 0) == 0) {
        m.kind = Kind::position;
        try {
            std::size_t used = 0;
            m.position = std::stoul(s.substr(9), &used);
            require(used == s.size() - 9, Errc::parse_error, "bad position");
        } catch (const std::logic_error &) {
            fail(Errc::parse_error, "outcome map '" + s + "' needs a position index");
        }
    } else {
        fail(Errc::parse_error, "unknown outcome map '" + s + "' (identity, position:<k>, sum, label)");
    }
    return m;
}

std::string OutcomeMap::to_string() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::position: return "position:" + std::to_string(position);
        case Kind::sum:      return "sum";
        case Kind::label:    return "label";
    }
    return "identity";
}

OutcomeFn OutcomeMap::bind(const TabularDataModel * tabular) const {
    auto token_string = [](std::span<const Token> t) {
        std::string s;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) s += ' ';
            s += std::to_string(t[i]);
        }
        return s;
    };
    switch (kind) {
        case Kind::identity:
            return token_string;
        case Kind::position: {
            const std::size_t k = position;
            return [k](std::span<const Token> t) {
                require(k < t.size(), Errc::invalid_argument, "outcome position " + std::to_string(k) + " out of range");
                return std::to_string(t[k]);
            };
        }
        case Kind::sum:
            return [](std::span<const Token> t) {
                return std::to_string(std::accumulate(t.begin(), t.end(), std::int64_t{0}));
            };
        case Kind::label:
            return [tabular, token_string](std::span<const Token> t) {
                if (tabular) {
                    if (auto l = tabular->label_of(t)) return *l;
                }
                return token_string(t);
            };
    }
    return token_string;
}

const Predictor & LoadedModel::predictor() const {
    if (tabular) return *tabular;
    require(anchor_fork.has_value(), Errc::invalid_argument, "no model loaded");
    return *anchor_fork;
}

LoadedModel load_model(const ModelSource & src) {
    LoadedModel m;
    if (src.kind == ModelSource::Kind::tabular) {
        m.tabular.emplace(TabularDataModel::from_json(src.body));
    } else {
        m.anchor_fork.emplace(AnchorForkSpec::from_json(src.body));
    }
    return m;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json & j, const fs::path & base_dir) {
    static const std::set<std::string> known = {
        "model",   "decode",      "trials", "outcome_map", "correct", "metrics", "k_values", "nfe_budgets",
        "scorer",  "out_dir",     "master_seed", "workers", "format", "problem", "records",  "verify"};
    require(j.is_object(), Errc::parse_error, "experiment config must be a JSON object");
    for (const auto & item : j.items()) {
        require(known.count(item.key()) == 1, Errc::parse_error, "unknown config field '" + item.key() + "'");
    }
    try {
        ExperimentConfig c;
        if (j.contains("model")) c.model = parse_model_source(j.at("model"), base_dir);
        if (j.contains("decode")) {
            const auto & d = j.at("decode");
            if (d.is_array()) {
                for (const auto & e : d) c.decode.push_back(e.get<DecodeConfig>());
            } else {
                c.decode.push_back(d.get<DecodeConfig>());
            }
        }
        if (j.contains("trials")) {
            const auto t = j.at("trials").get<long long>();
            require(t >= 0, Errc::invalid_argument, "trials must be > 0");
            c.trials = static_cast<std::size_t>(t);
        }
        if (j.contains("outcome_map")) c.outcome = OutcomeMap::parse(j.at("outcome_map").get<std::string>());
        if (j.contains("correct")) {
            for (const auto & e : j.at("correct")) c.correct.insert(e.is_string() ? e.get<std::string>() : e.dump());
        }
        if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
        if (j.contains("k_values")) c.k_values = j.at("k_values").get<std::vector<std::int64_t>>();
        if (j.contains("nfe_budgets")) c.nfe_budgets = j.at("nfe_budgets").get<std::vector<std::int64_t>>();
        if (j.contains("scorer")) c.scorer = ScorerSpec::from_json(j.at("scorer"));
        if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j.at("out_dir").get<std::string>()).string();
        if (j.contains("master_seed") && !j.at("master_seed").is_null()) {
            c.master_seed = j.at("master_seed").get<std::uint64_t>();
        }
        if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
        if (j.contains("format")) c.format = j.at("format").get<std::string>();
        if (j.contains("problem")) c.problem = j.at("problem").get<std::string>();
        if (j.contains("records")) c.records = resolve(base_dir, j.at("records").get<std::string>()).string();
        if (j.contains("verify")) c.verify = parse_verify(j.at("verify"), base_dir);
        return c;
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("experiment config: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::load(const fs::path & path) {
    const auto j = read_json_file(path);
    return from_json(j, path.parent_path());
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["model"]       = model_source_json(model);
    j["decode"]      = decode;
    j["trials"]      = trials;
    j["outcome_map"] = outcome.to_string();
    j["correct"]     = correct;
    j["metrics"]     = metrics;
    j["k_values"]    = k_values;
    j["nfe_budgets"] = nfe_budgets;
    j["scorer"]      = scorer.to_json();
    j["out_dir"]     = out_dir;
    j["master_seed"] = master_seed ? nlohmann::json(*master_seed) : nlohmann::json(nullptr);
    j["workers"]     = workers;
    j["format"]      = format;
    j["problem"]     = problem;
    j["verify"]      = verify_json(verify);
    return j;
}

std::string fnv1a64_hex(const std::string & bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ExperimentConfig::hash() const {
    auto j = to_json();
    j.erase("out_dir");
    j.erase("workers");
    return fnv1a64_hex(j.dump());
}

void ExperimentConfig::validate() const {
    require(trials > 0, Errc::invalid_argument, "trials must be > 0");
    require(!decode.empty(), Errc::invalid_argument, "decode list is empty");
    for (const auto & d : decode) d.validate();
    require(format == "csv" || format == "json", Errc::invalid_argument, "format must be csv or json");
    require(workers >= 1, Errc::invalid_argument, "workers must be >= 1");
    for (const auto & m : metrics) {
        require(kKnownMetrics.count(m) == 1, Errc::invalid_argument, "unknown metric '" + m + "'");
    }
    for (auto k : k_values) {
        require(k >= 1 && static_cast<std::size_t>(k) <= trials, Errc::invalid_argument,
                "k value " + std::to_string(k) + " must lie in [1, trials]");
    }
    for (auto b : nfe_budgets) {
        require(b >= 0, Errc::invalid_argument, "NFE budgets must be >= 0");
    }
}

std::uint64_t ExperimentConfig::seed_for(std::size_t i) const {
    return master_seed ? *master_seed : decode.at(i).master_seed;
}

Overrides Overrides::from_json(const nlohmann::json & j) {
    Overrides o;
    if (j.is_null()) return o;
    require(j.is_object(), Errc::parse_error, "overrides must be a JSON object");
    try {
        for (const auto & item : j.items()) {
            const auto & k = item.key();
            const auto & v = item.value();
            if (v.is_null()) continue;
            if (k == "out_dir") {
                o.out_dir = v.get<std::string>();
            } else if (k == "master_seed") {
                o.master_seed = v.get<std::uint64_t>();
            } else if (k == "workers") {
                o.workers = v.get<unsigned>();
            } else if (k == "format") {
                o.format = v.get<std::string>();
            } else if (k == "trials") {
                o.trials = v.get<std::size_t>();
            } else if (k == "records") {
                o.records = v.get<std::string>();
            } else {
                fail(Errc::parse_error, "unknown override '" + k + "'");
            }
        }
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("overrides: ") + e.what());
    }
    return o;
}

void Overrides::apply(ExperimentConfig & cfg) const {
    if (out_dir) cfg.out_dir = *out_dir;
    if (master_seed) cfg.master_seed = *master_seed;
    if (workers) cfg.workers = *workers;
    if (format) cfg.format = *format;
    if (trials) {
        // k values from the file that exceed the new trial count are dropped.
        cfg.trials = *trials;
        std::erase_if(cfg.k_values, [&](std::int64_t k) { return k > static_cast<std::int64_t>(*trials); });
    }
    if (records) cfg.records = *records;
}

} // namespace remask
