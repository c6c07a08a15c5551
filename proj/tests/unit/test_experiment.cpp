#include "remask/error.hpp"
#include "remask/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace remask;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = REMASK_CONFIG_DIR;

Errc code_of(const std::function<void()> & f) {
    try {
        f();
    } catch (const Error & e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::invalid_argument;
}

std::string slurp(const fs::path & p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string & name) {
    const fs::path p = fs::temp_directory_path() / ("remask_test_" + name);
    fs::remove_all(p);
    return p;
}

nlohmann::json small_sweep() {
    return nlohmann::json::parse(R"({
        "model": {"type": "tabular", "inline": {"V": 2, "L": 3, "support": [
            {"tokens": [0, 0, 0], "p": 0.5, "label": "zero"},
            {"tokens": [1, 1, 0], "p": 0.3, "label": "one"},
            {"tokens": [1, 0, 1], "p": 0.2, "label": "one"}]}},
        "decode": [{"strategy": "lc", "t_token": 1.0}, {"strategy": "tlc", "t_pos": 1.0, "t_token": 1.0}],
        "trials": 16,
        "outcome_map": "label",
        "correct": ["one"],
        "master_seed": 3
    })");
}

Overrides out_to(const fs::path & p) {
    Overrides ov;
    ov.out_dir = p.string();
    return ov;
}

} // namespace

TEST(ExperimentConfig, LoadsSweepConfig) {
    const auto cfg = ExperimentConfig::load(kConfigs / "sweep_degenerate_fork.json");
    EXPECT_EQ(cfg.decode.size(), 3u);
    EXPECT_EQ(cfg.trials, 256u);
    EXPECT_EQ(cfg.outcome.kind, OutcomeMap::Kind::label);
    EXPECT_EQ(cfg.master_seed, std::optional<std::uint64_t>(7));
    EXPECT_EQ(cfg.seed_for(2), 7u);
    const auto m = load_model(cfg.model);
    EXPECT_EQ(m.predictor().length(), 4u);
}

TEST(ExperimentConfig, ZeroTrialsRejected) {
    auto j      = small_sweep();
    j["trials"] = 0;
    EXPECT_EQ(code_of([&] { ExperimentConfig::from_json(j, ".").validate(); }), Errc::invalid_argument);
}

TEST(ExperimentConfig, UnknownFieldRejected) {
    auto j     = small_sweep();
    j["trails"] = 5;
    EXPECT_EQ(code_of([&] { ExperimentConfig::from_json(j, "."); }), Errc::parse_error);
}

TEST(ExperimentConfig, MissingModelFileRejected) {
    auto j     = small_sweep();
    j["model"] = {{"type", "tabular"}, {"path", "does_not_exist.json"}};
    EXPECT_EQ(code_of([&] { ExperimentConfig::from_json(j, kConfigs); }), Errc::io_error);
}

TEST(ExperimentConfig, HashIgnoresOutputPlumbing) {
    auto a = ExperimentConfig::from_json(small_sweep(), ".");
    auto b = a;
    b.out_dir = "elsewhere";
    b.workers = 4;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.trials = 17;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(ExperimentConfig, OverridesApply) {
    auto cfg = ExperimentConfig::from_json(small_sweep(), ".");
    const auto ov = Overrides::from_json(nlohmann::json::parse(R"({"master_seed": 9, "trials": 4, "format": "json"})"));
    ov.apply(cfg);
    EXPECT_EQ(cfg.seed_for(0), 9u);
    EXPECT_EQ(cfg.trials, 4u);
    EXPECT_EQ(cfg.format, "json");
    EXPECT_EQ(code_of([] { Overrides::from_json(nlohmann::json::parse(R"({"seed": 1})")); }), Errc::parse_error);
}

TEST(OutcomeMap, ParseAndBind) {
    const std::vector<Token> t = {1, 0, 2};
    EXPECT_EQ(OutcomeMap::parse("identity").bind(nullptr)(t), "1 0 2");
    EXPECT_EQ(OutcomeMap::parse("position:2").bind(nullptr)(t), "2");
    EXPECT_EQ(OutcomeMap::parse("sum").bind(nullptr)(t), "3");
    EXPECT_EQ(OutcomeMap::parse("position:2").to_string(), "position:2");
    EXPECT_EQ(code_of([] { OutcomeMap::parse("position:"); }), Errc::parse_error);
    EXPECT_EQ(code_of([] { OutcomeMap::parse("mode"); }), Errc::parse_error);
}

TEST(Fnv, KnownVectors) {
    EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
}

TEST(Outputs, AtomicWriteAndHeader) {
    const auto dir = scratch("atomic");
    write_file_atomic(dir / "x.txt", "hello");
    EXPECT_EQ(slurp(dir / "x.txt"), "hello");
    EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
    const auto h = csv_header("abcd", 5);
    EXPECT_NE(h.find("# config_hash: abcd"), std::string::npos);
    EXPECT_NE(h.find("# master_seed: 5"), std::string::npos);
}

TEST(Sweep, FileInventory) {
    const auto dir = scratch("inventory");
    auto cfg       = ExperimentConfig::load(kConfigs / "sweep_degenerate_fork.json");
    cfg.out_dir    = dir.string();
    const auto r   = run_sweep(cfg);
    ASSERT_TRUE(r.ok) << r.message;
    int records = 0, csvs = 0;
    for (const auto & f : r.files) {
        const auto p = fs::path(f);
        if (p.extension() == ".jsonl") ++records;
        if (p.extension() == ".csv") ++csvs;
        EXPECT_TRUE(fs::exists(p));
    }
    EXPECT_EQ(records, 3);
    EXPECT_EQ(csvs, 4);
    for (const char * name : {"pass_at_k.csv", "pass_at_nfe.csv", "best_at_k.csv", "answer_entropy.csv"}) {
        const auto text = slurp(dir / name);
        EXPECT_EQ(text.rfind("# config_hash: " + cfg.hash(), 0), 0u) << name;
        EXPECT_NE(text.find("# master_seed: 7"), std::string::npos);
    }
    std::ifstream in(dir / "records_0_ar.jsonl");
    std::string meta;
    std::getline(in, meta);
    EXPECT_EQ(nlohmann::json::parse(meta).at("meta").at("config_hash"), cfg.hash());
}

TEST(Sweep, ByteIdenticalRecords) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    auto cfg     = ExperimentConfig::from_json(small_sweep(), ".");
    cfg.out_dir  = a.string();
    ASSERT_TRUE(run_sweep(cfg).ok);
    cfg.out_dir = b.string();
    cfg.workers = 3;
    ASSERT_TRUE(run_sweep(cfg).ok);
    for (const auto & e : fs::directory_iterator(a)) {
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    }
}

TEST(Sweep, JsonFormat) {
    const auto dir = scratch("json");
    auto cfg       = ExperimentConfig::from_json(small_sweep(), ".");
    cfg.out_dir    = dir.string();
    cfg.format     = "json";
    ASSERT_TRUE(run_sweep(cfg).ok);
    const auto j = nlohmann::json::parse(slurp(dir / "pass_at_k.json"));
    EXPECT_EQ(j.at("meta").at("config_hash"), cfg.hash());
    EXPECT_FALSE(j.at("rows").empty());
}

TEST(Sweep, PathRunnerRejectsZeroTrialsBeforeWriting) {
    const auto dir = scratch("zero");
    fs::create_directories(dir);
    auto j         = small_sweep();
    j["trials"]    = 0;
    std::ofstream(dir / "cfg.json") << j.dump();
    EXPECT_EQ(code_of([&] { run_sweep(dir / "cfg.json", out_to(dir / "out")); }), Errc::invalid_argument);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Passk, ReadsRecords) {
    const auto dir = scratch("passk");
    auto cfg       = ExperimentConfig::from_json(small_sweep(), ".");
    cfg.out_dir    = dir.string();
    ASSERT_TRUE(run_sweep(cfg).ok);
    Overrides ov;
    ov.records = (dir / "records_1_tlc.jsonl").string();
    ov.out_dir = (dir / "passk").string();
    const auto r = run_passk({}, ov);
    ASSERT_TRUE(r.ok) << r.message;
    EXPECT_TRUE(fs::exists(dir / "passk" / "pass_at_k.csv"));
}

TEST(Enumerate, WritesNormalizedDistribution) {
    const auto dir = scratch("enum");
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << small_sweep().dump();
    const auto r = run_enumerate(dir / "cfg.json", out_to(dir / "out"));
    ASSERT_TRUE(r.ok) << r.message;
    ASSERT_EQ(r.files.size(), 2u);
    const auto j = nlohmann::json::parse(slurp(r.files[0]));
    double total = 0.0;
    for (const auto & e : j.at("distribution")) total += e.at("p").get<double>();
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Verify, TwoAnchorInventory) {
    const auto dir = scratch("verify");
    auto ov        = out_to(dir);
    ov.workers     = 1;
    const auto r   = run_verify(kConfigs / "anchor_fork_2anchors.json", ov);
    EXPECT_TRUE(r.ok) << r.message;
    for (const char * name : {"lemma1.json", "prop1.json", "prop2.json", "prop3.json", "remark1.json", "sandwich.json"}) {
        ASSERT_TRUE(fs::exists(dir / name)) << name;
        const auto j = nlohmann::json::parse(slurp(dir / name));
        EXPECT_TRUE(j.contains("config_hash"));
        EXPECT_TRUE(j.contains("master_seed"));
    }
    const auto p3 = nlohmann::json::parse(slurp(dir / "prop3.json"));
    EXPECT_EQ(p3.at("verdict"), "pass");
}

TEST(Verify, GapViolationWritesValidationReport) {
    const auto dir = scratch("verify_bad");
    const auto r   = run_verify(kConfigs / "anchor_fork_gap_violation.json", out_to(dir));
    EXPECT_FALSE(r.ok);
    EXPECT_TRUE(fs::exists(dir / "validation.json"));
    EXPECT_FALSE(fs::exists(dir / "prop1.json"));
}

TEST(Verify, LeftOnlyAnchorsAreInconclusive) {
    const auto dir = scratch("verify_left");
    const auto r   = run_verify(kConfigs / "anchor_fork_left_only.json", out_to(dir));
    EXPECT_TRUE(r.ok) << r.message;
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "prop3.json")).at("verdict"), "inconclusive");
}

TEST(ExperimentConfig, TrialOverrideDropsLargeK) {
    auto cfg = ExperimentConfig::load(kConfigs / "sweep_degenerate_fork.json");
    Overrides ov;
    ov.trials = 64;
    ov.apply(cfg);
    EXPECT_EQ(cfg.k_values, (std::vector<std::int64_t>{1, 2, 4, 8, 16, 32, 64}));
    EXPECT_NO_THROW(cfg.validate());
}
