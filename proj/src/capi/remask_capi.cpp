#include "remask/remask.h"

#include "remask/error.hpp"
#include "remask/experiment.hpp"
#include "remask/metrics.hpp"
#include "remask/models.hpp"
#include "remask/remasking.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

struct remask_model {
    std::unique_ptr<remask::Predictor> predictor;
};

struct remask_decode_config {
    remask::DecodeConfig cfg;
};

struct remask_trajectory {
    remask::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

remask_status to_status(remask::Errc c) {
    switch (c) {
        case remask::Errc::invalid_argument:   return REMASK_ERR_INVALID_ARGUMENT;
        case remask::Errc::contract_violation: return REMASK_ERR_CONTRACT_VIOLATION;
        case remask::Errc::evidence_zero:      return REMASK_ERR_EVIDENCE_ZERO;
        case remask::Errc::spec_validation:    return REMASK_ERR_SPEC_VALIDATION;
        case remask::Errc::size_limit:         return REMASK_ERR_SIZE_LIMIT;
        case remask::Errc::nontermination:     return REMASK_ERR_NONTERMINATION;
        case remask::Errc::degenerate_weight:  return REMASK_ERR_DEGENERATE_WEIGHT;
        case remask::Errc::parse_error:        return REMASK_ERR_PARSE;
        case remask::Errc::io_error:           return REMASK_ERR_IO;
    }
    return REMASK_ERR_INTERNAL;
}

template <typename F>
remask_status guarded(F && f) {
    try {
        g_last_error.clear();
        f();
        return REMASK_OK;
    } catch (const remask::Error & e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception & e) {
        g_last_error = e.what();
        return REMASK_ERR_PARSE;
    } catch (const std::exception & e) {
        g_last_error = e.what();
        return REMASK_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown exception";
        return REMASK_ERR_INTERNAL;
    }
}

char * dup_string(const std::string & s) {
    char * p = static_cast<char *>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void need(const void * p, const char * what) {
    remask::require(p != nullptr, remask::Errc::invalid_argument, std::string(what) + " must not be NULL");
}

nlohmann::json parse_json(const char * text) {
    need(text, "json");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception & e) {
        remask::fail(remask::Errc::parse_error, e.what());
    }
}

remask::Overrides overrides_from(const char * text) {
    if (!text || !*text) return {};
    return remask::Overrides::from_json(parse_json(text));
}

template <typename Runner>
remask_status run(Runner && runner, const char * config_path, const char * overrides_json, int * ok,
                  char ** files_json, bool path_required) {
    return guarded([&] {
        if (path_required) need(config_path, "config_path");
        need(ok, "ok");
        const auto ov = overrides_from(overrides_json);
        const remask::RunResult r = runner(config_path ? std::filesystem::path(config_path) : std::filesystem::path(), ov);
        *ok = r.ok ? 1 : 0;
        if (!r.ok) g_last_error = r.message;
        if (files_json) *files_json = dup_string(nlohmann::json(r.files).dump());
    });
}

} // namespace

extern "C" {

const char * remask_status_string(remask_status status) {
    switch (status) {
        case REMASK_OK:                     return "ok";
        case REMASK_ERR_INVALID_ARGUMENT:   return "invalid argument";
        case REMASK_ERR_CONTRACT_VIOLATION: return "contract violation";
        case REMASK_ERR_EVIDENCE_ZERO:      return "zero evidence";
        case REMASK_ERR_SPEC_VALIDATION:    return "spec validation failed";
        case REMASK_ERR_SIZE_LIMIT:         return "size limit exceeded";
        case REMASK_ERR_NONTERMINATION:     return "decode did not terminate";
        case REMASK_ERR_DEGENERATE_WEIGHT:  return "degenerate weight";
        case REMASK_ERR_PARSE:              return "parse error";
        case REMASK_ERR_IO:                 return "i/o error";
        case REMASK_ERR_INTERNAL:           return "internal error";
    }
    return "unknown status";
}

const char * remask_last_error(void) {
    return g_last_error.c_str();
}

void remask_string_free(char * s) {
    std::free(s);
}

const char * remask_version(void) {
    return "0.1.0";
}

remask_status remask_model_from_tabular_json(const char * json, remask_model ** out) {
    return guarded([&] {
        need(out, "out");
        auto m = std::make_unique<remask_model>();
        m->predictor = std::make_unique<remask::TabularDataModel>(remask::TabularDataModel::from_json(parse_json(json)));
        *out = m.release();
    });
}

remask_status remask_model_from_anchor_fork_json(const char * json, remask_model ** out) {
    return guarded([&] {
        need(out, "out");
        auto m = std::make_unique<remask_model>();
        m->predictor = std::make_unique<remask::AnchorForkModel>(remask::AnchorForkSpec::from_json(parse_json(json)));
        *out = m.release();
    });
}

void remask_model_free(remask_model * model) {
    delete model;
}

size_t remask_model_length(const remask_model * model) {
    return model ? model->predictor->length() : 0;
}

int remask_model_vocab_size(const remask_model * model) {
    return model ? model->predictor->vocab_size() : 0;
}

remask_status remask_decode_config_from_json(const char * json, remask_decode_config ** out) {
    return guarded([&] {
        need(out, "out");
        auto c = std::make_unique<remask_decode_config>();
        c->cfg = parse_json(json).get<remask::DecodeConfig>();
        c->cfg.validate();
        *out = c.release();
    });
}

remask_status remask_decode_config_to_json(const remask_decode_config * cfg, char ** out_json) {
    return guarded([&] {
        need(cfg, "cfg");
        need(out_json, "out_json");
        *out_json = dup_string(nlohmann::json(cfg->cfg).dump());
    });
}

void remask_decode_config_free(remask_decode_config * cfg) {
    delete cfg;
}

remask_status remask_decode(const remask_model * model, const remask_decode_config * cfg, uint64_t master_seed,
                            uint64_t trial, remask_trajectory ** out) {
    return guarded([&] {
        need(model, "model");
        need(cfg, "cfg");
        need(out, "out");
        remask::Rng rng = remask::RngPolicy{master_seed}.stream(trial);
        auto t  = std::make_unique<remask_trajectory>();
        t->traj = remask::decode(*model->predictor, cfg->cfg, rng);
        *out    = t.release();
    });
}

void remask_trajectory_free(remask_trajectory * traj) {
    delete traj;
}

size_t remask_trajectory_length(const remask_trajectory * traj) {
    return traj ? traj->traj.final_sequence.length() : 0;
}

size_t remask_trajectory_steps(const remask_trajectory * traj) {
    return traj ? traj->traj.step_count() : 0;
}

int64_t remask_trajectory_nfe(const remask_trajectory * traj) {
    return traj ? traj->traj.nfe : 0;
}

size_t remask_trajectory_tokens(const remask_trajectory * traj, int32_t * out, size_t cap) {
    if (!traj) return 0;
    const auto t = traj->traj.final_sequence.tokens();
    for (size_t i = 0; out && i < t.size() && i < cap; ++i) out[i] = t[i];
    return t.size();
}

size_t remask_trajectory_unmask_steps(const remask_trajectory * traj, int32_t * out, size_t cap) {
    if (!traj) return 0;
    const auto & s = traj->traj.unmask_step;
    for (size_t i = 0; out && i < s.size() && i < cap; ++i) out[i] = s[i];
    return s.size();
}

remask_status remask_trajectory_to_jsonl(const remask_trajectory * traj, char ** out) {
    return guarded([&] {
        need(traj, "traj");
        need(out, "out");
        std::ostringstream os;
        remask::write_trajectory_jsonl(traj->traj, os);
        *out = dup_string(os.str());
    });
}

remask_status remask_enumerate(const remask_model * model, const remask_decode_config * cfg, char ** out_json) {
    return guarded([&] {
        need(model, "model");
        need(cfg, "cfg");
        need(out_json, "out_json");
        const auto dist = remask::exact_final_distribution(*model->predictor, cfg->cfg);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto & sp : dist) arr.push_back({{"tokens", sp.tokens}, {"p", sp.p}});
        *out_json = dup_string(arr.dump());
    });
}

remask_status remask_pass_at_k(int64_t n, int64_t c, int64_t k, double * out) {
    return guarded([&] {
        need(out, "out");
        *out = remask::pass_at_k(n, c, k);
    });
}

remask_status remask_run_verify(const char * config_path, const char * overrides_json, int * ok, char ** files_json) {
    return run([](const auto & p, const auto & ov) { return remask::run_verify(p, ov); }, config_path, overrides_json,
               ok, files_json, true);
}

remask_status remask_run_sweep(const char * config_path, const char * overrides_json, int * ok, char ** files_json) {
    return run([](const auto & p, const auto & ov) { return remask::run_sweep(p, ov); }, config_path, overrides_json,
               ok, files_json, true);
}

remask_status remask_run_enumerate(const char * config_path, const char * overrides_json, int * ok,
                                   char ** files_json) {
    return run([](const auto & p, const auto & ov) { return remask::run_enumerate(p, ov); }, config_path,
               overrides_json, ok, files_json, true);
}

remask_status remask_run_passk(const char * config_path, const char * overrides_json, int * ok, char ** files_json) {
    return run([](const auto & p, const auto & ov) { return remask::run_passk(p, ov); }, config_path, overrides_json,
               ok, files_json, false);
}

} // extern "C"
