#include "remask/error.hpp"
#include "remask/experiment.hpp"
#include "remask/log.hpp"

#include <fstream>

namespace remask {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr double kMonteCarloZ = 5.0;

struct Context {
    AnchorForkSpec   spec;
    ExperimentConfig cfg;
    std::string      hash;
    std::uint64_t    seed = 0;
    RunResult        result;

    ojson header(const char * check, Verdict v) const {
        ojson j;
        j["check"]       = check;
        j["verdict"]     = verdict_name(v);
        j["config_hash"] = hash;
        j["master_seed"] = seed;
        return j;
    }

    void emit(const std::string & name, const ojson & report) {
        const fs::path p = fs::path(cfg.out_dir) / name;
        write_file_atomic(p, report.dump(2) + "\n");
        result.files.push_back(p.string());
        const std::string v = report.at("verdict").get<std::string>();
        if (v == "fail") {
            result.ok = false;
            log::warn(name + ": fail");
        } else {
            log::info(name + ": " + v);
        }
    }
};

Verdict combine(Verdict acc, Verdict v) {
    if (acc == Verdict::fail || v == Verdict::fail) return Verdict::fail;
    if (acc == Verdict::pass || v == Verdict::pass) return Verdict::pass;
    return Verdict::inconclusive;
}

void lemma1(Context & ctx, const GapBounds & bounds) {
    Verdict v = Verdict::pass;
    ojson temps = ojson::array();
    for (std::size_t i = 0; i < ctx.cfg.verify.t_pos_grid.size(); ++i) {
        const double t = ctx.cfg.verify.t_pos_grid[i];
        const MonteCarloOptions mc{ctx.cfg.verify.mc_trials, derive_stream_seed(ctx.seed, 1000 + i), ctx.cfg.workers};
        const auto rep = ordering_report(ctx.spec, t, mc);
        const bool bracket = rep.bracket_holds();
        const bool mc_ok   = rep.monte_carlo_consistent(kMonteCarloZ);
        if (!bracket || !mc_ok) v = Verdict::fail;
        ojson anchors = ojson::array();
        for (const auto & a : rep.anchors) {
            ojson row;
            row["position"]    = a.anchor_position;
            row["exact"]       = a.exact;
            row["lower"]       = a.lower;
            row["upper"]       = a.upper;
            row["monte_carlo"] = a.monte_carlo ? ojson(*a.monte_carlo) : ojson(nullptr);
            anchors.push_back(row);
        }
        ojson tj;
        tj["t_pos"]                  = t;
        tj["bracket_holds"]          = bracket;
        tj["monte_carlo_consistent"] = mc_ok;
        tj["mc_trials"]              = rep.mc_trials;
        tj["anchors"]                = anchors;
        temps.push_back(tj);
    }
    if (ctx.spec.anchors.empty()) v = Verdict::inconclusive;
    auto j = ctx.header("lemma1", v);
    j["delta"]        = bounds.delta;
    j["Delta"]        = bounds.Delta;
    j["temperatures"] = temps;
    ctx.emit("lemma1.json", j);
}

void prop1(Context & ctx, const GapBounds & bounds) {
    auto grid = ctx.cfg.verify.t_pos_grid;
    std::sort(grid.begin(), grid.end());
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = i + 1; k < grid.size(); ++k) pairs.emplace_back(grid[i], grid[k]);
    }
    if (!grid.empty() && bounds.delta > 0.0) {
        pairs.emplace_back(grid.front(), grid.front() * (bounds.Delta / bounds.delta) * 1.5);
    }
    Verdict v = Verdict::inconclusive;
    ojson rows = ojson::array();
    for (auto [t, tp] : pairs) {
        const auto r = verify_prop1(ctx.spec, t, tp);
        v = combine(v, r.verdict);
        ojson row;
        row["t_pos"]          = r.t_pos;
        row["t_pos_prime"]    = r.t_pos_prime;
        row["required_ratio"] = r.required_ratio;
        row["entropy"]        = r.entropy;
        row["entropy_prime"]  = r.entropy_prime;
        row["verdict"]        = verdict_name(r.verdict);
        row["reason"]         = r.reason;
        rows.push_back(row);
    }
    auto j = ctx.header("prop1", v);
    j["pairs"] = rows;
    ctx.emit("prop1.json", j);
}

void remark1(Context & ctx) {
    const auto r = verify_remark1(ctx.spec, ctx.cfg.verify.t_pos_grid);
    auto j = ctx.header("remark1", r.verdict);
    j["lc_entropy"] = r.lc_entropy;
    j["minimal"]    = r.minimal;
    j["t_pos_grid"] = r.t_grid;
    j["tlc_gain"]   = r.tlc_gain;
    j["reason"]     = r.reason;
    ctx.emit("remark1.json", j);
}

void prop2(Context & ctx) {
    const auto derived = verify_prop2(logit_spec_from(ctx.spec), ctx.cfg.verify.prop2_grid);
    Verdict v = derived.verdict;
    Rng rng(derive_stream_seed(ctx.seed, 2));
    std::size_t passed = 0, failed = 0, inconclusive = 0;
    for (std::size_t i = 0; i < ctx.cfg.verify.prop2_specs; ++i) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.below(4));
        const std::size_t V = 2 + static_cast<std::size_t>(rng.below(4));
        const auto r = verify_prop2(random_logit_spec(rng, n, V), ctx.cfg.verify.prop2_grid);
        v = combine(v, r.verdict);
        passed += r.verdict == Verdict::pass;
        failed += r.verdict == Verdict::fail;
        inconclusive += r.verdict == Verdict::inconclusive;
    }
    auto j = ctx.header("prop2", v);
    j["t_token_grid"] = ctx.cfg.verify.prop2_grid;
    ojson d;
    d["verdict"]       = verdict_name(derived.verdict);
    d["anchors_first"] = derived.anchors_first;
    d["orders"]        = derived.orders;
    d["reason"]        = derived.reason;
    j["spec_logits"]   = d;
    j["random_specs"]  = {{"total", ctx.cfg.verify.prop2_specs},
                          {"pass", passed},
                          {"fail", failed},
                          {"inconclusive", inconclusive}};
    ctx.emit("prop2.json", j);
}

void prop3(Context & ctx) {
    const auto r = verify_prop3(ctx.spec, 8);
    auto j = ctx.header("prop3", r.verdict);
    j["ar_entropy"]          = r.ar_entropy;
    j["lc_entropy"]          = r.lc_entropy;
    j["difference"]          = r.difference;
    j["expected_difference"] = r.expected_difference;
    j["ar_monte_carlo"]      = r.ar_monte_carlo ? ojson(*r.ar_monte_carlo) : ojson(nullptr);
    j["lc_monte_carlo"]      = r.lc_monte_carlo ? ojson(*r.lc_monte_carlo) : ojson(nullptr);
    j["reason"]              = r.reason;
    ctx.emit("prop3.json", j);
}

ojson sandwich_row(const SandwichReport & s) {
    ojson row;
    row["h_fork"]      = s.h_fork;
    row["h_outcome"]   = s.h_outcome;
    row["epsilon"]     = s.epsilon;
    row["delta"]       = s.delta;
    row["lower_holds"] = s.lower_holds;
    row["upper_holds"] = s.upper_holds;
    return row;
}

void sandwich(Context & ctx) {
    Verdict v = Verdict::pass;
    ojson rows = ojson::array();
    if (ctx.cfg.verify.sandwich) {
        const auto & ss = *ctx.cfg.verify.sandwich;
        const LoadedModel m = load_model(ss.model);
        require(m.tabular.has_value(), Errc::invalid_argument, "sandwich check needs a tabular model");
        const auto r = verify_sandwich(*m.tabular, ss.fork, ss.outcome.bind(&*m.tabular),
                                       MaskedSequence::all_masked(m.tabular->length()));
        if (!r.holds()) v = Verdict::fail;
        auto row = sandwich_row(r);
        row["source"] = "config";
        rows.push_back(row);
    }
    Rng rng(derive_stream_seed(ctx.seed, 6));
    for (std::size_t i = 0; i < ctx.cfg.verify.sandwich_instances; ++i) {
        const ForkInstance inst = random_fork_instance(rng);
        const auto r = verify_sandwich(inst.model, inst.fork, OutcomeMap{OutcomeMap::Kind::label}.bind(&inst.model),
                                       MaskedSequence::all_masked(inst.model.length()));
        if (!r.holds()) v = Verdict::fail;
        auto row = sandwich_row(r);
        row["source"] = "generated";
        rows.push_back(row);
    }

    // Semantic entropy versus position temperature on a constructed fork.
    const TabularDataModel degenerate = degenerate_fork_model(3, 0.5);
    DecodeConfig low, high;
    low.strategy  = Strategy::lc;
    low.t_token   = 1.0;
    high.strategy = Strategy::tlc;
    high.t_pos    = 1.0;
    high.t_token  = 1.0;
    const auto c = verify_corollary1(degenerate, 0, OutcomeMap{OutcomeMap::Kind::label}.bind(&degenerate), low, high);
    v = combine(v, c.verdict);

    auto j = ctx.header("sandwich", v);
    j["slack"]     = kEntropyRoundingSlack;
    j["instances"] = rows;
    ojson cj;
    cj["verdict"]              = verdict_name(c.verdict);
    cj["low"]                  = low.label();
    cj["high"]                 = high.label();
    cj["fork_entropy_low"]     = c.fork_entropy_low;
    cj["fork_entropy_high"]    = c.fork_entropy_high;
    cj["outcome_entropy_low"]  = c.outcome_entropy_low;
    cj["outcome_entropy_high"] = c.outcome_entropy_high;
    cj["epsilon"]              = c.epsilon;
    cj["delta"]                = c.delta;
    cj["reason"]               = c.reason;
    j["semantic_entropy"]      = cj;
    ctx.emit("sandwich.json", j);
}

} // namespace

RunResult run_verify(const fs::path & path, const Overrides & ov) {
    std::ifstream in(path);
    require(in.good(), Errc::io_error, "cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, path.string() + ": " + e.what());
    }

    Context ctx;
    if (j.is_object() && j.contains("fork")) {
        ctx.cfg.model = {ModelSource::Kind::anchor_fork, j, path.string()};
    } else {
        ctx.cfg = ExperimentConfig::from_json(j, path.parent_path());
        require(ctx.cfg.model.kind == ModelSource::Kind::anchor_fork, Errc::invalid_argument,
                "verify needs an anchor_fork model");
    }
    ov.apply(ctx.cfg);
    ctx.hash = ctx.cfg.hash();
    ctx.seed = ctx.cfg.master_seed.value_or(0);

    GapBounds bounds{};
    try {
        ctx.spec = AnchorForkSpec::from_json(ctx.cfg.model.body);
        bounds   = validate_spec(ctx.spec);
    } catch (const Error & e) {
        if (e.code() != Errc::spec_validation && e.code() != Errc::size_limit) throw;
        auto rep = ctx.header("validation", Verdict::fail);
        rep["valid"]  = false;
        rep["code"]   = errc_name(e.code());
        rep["reason"] = e.what();
        ctx.emit("validation.json", rep);
        ctx.result.ok      = false;
        ctx.result.message = e.what();
        return ctx.result;
    }

    lemma1(ctx, bounds);
    prop1(ctx, bounds);
    prop2(ctx);
    prop3(ctx);
    remark1(ctx);
    sandwich(ctx);
    ctx.result.message = ctx.result.ok ? "all checks passed" : "at least one check failed";
    return ctx.result;
}

} // namespace remask
