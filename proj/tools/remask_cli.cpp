#include "remask/remask.h"

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

struct Flags {
    std::string                  config;
    std::optional<std::string>   out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned>      workers;
    std::optional<std::string>   format;
    std::optional<std::size_t>   trials;
    std::optional<std::string>   records;
};

void add_common(CLI::App * cmd, Flags & f, bool config_required) {
    auto * c = cmd->add_option("--config", f.config, "experiment config or anchor-fork spec (JSON)");
    if (config_required) c->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--format", f.format, "metric output format")->check(CLI::IsMember({"csv", "json"}));
}

std::string overrides_json(const Flags & f) {
    nlohmann::json j = nlohmann::json::object();
    if (f.out) j["out_dir"] = *f.out;
    if (f.seed) j["master_seed"] = *f.seed;
    if (f.workers) j["workers"] = *f.workers;
    if (f.format) j["format"] = *f.format;
    if (f.trials) j["trials"] = *f.trials;
    if (f.records) j["records"] = *f.records;
    return j.dump();
}

using runner_fn = remask_status (*)(const char *, const char *, int *, char **);

int invoke(const char * name, runner_fn fn, const Flags & f) {
    int ok = 0;
    char * files = nullptr;
    const std::string ov = overrides_json(f);
    const remask_status st = fn(f.config.empty() ? nullptr : f.config.c_str(), ov.c_str(), &ok, &files);
    if (st != REMASK_OK) {
        std::fprintf(stderr, "%s: %s: %s\n", name, remask_status_string(st), remask_last_error());
        return 2;
    }
    for (const auto & p : nlohmann::json::parse(files)) {
        std::printf("%s\n", p.get<std::string>().c_str());
    }
    remask_string_free(files);
    if (!ok) {
        std::fprintf(stderr, "%s: %s\n", name, remask_last_error());
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"remask: remasking strategies for masked diffusion decoding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(remask_version()));

    Flags verify_f, sweep_f, enum_f, passk_f;

    auto * verify = app.add_subcommand("verify", "check the anchor-fork results on a spec; exit 1 if any check fails");
    add_common(verify, verify_f, true);

    auto * sweep = app.add_subcommand("sweep", "decode every config, write records and metric curves");
    add_common(sweep, sweep_f, true);
    sweep->add_option("--trials", sweep_f.trials, "trials per decode config");

    auto * enumerate = app.add_subcommand("enumerate", "exact final-sequence distribution per decode config");
    add_common(enumerate, enum_f, true);

    auto * passk = app.add_subcommand("passk", "metrics over an existing JSONL record file");
    add_common(passk, passk_f, false);
    passk->add_option("--records", passk_f.records, "records JSONL")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError & e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*verify) return invoke("verify", remask_run_verify, verify_f);
    if (*sweep) return invoke("sweep", remask_run_sweep, sweep_f);
    if (*enumerate) return invoke("enumerate", remask_run_enumerate, enum_f);
    if (*passk) {
        if (passk_f.config.empty() && !passk_f.records) {
            std::fprintf(stderr, "passk: need --records or --config\n");
            return 2;
        }
        return invoke("passk", remask_run_passk, passk_f);
    }
    return 2;
}
