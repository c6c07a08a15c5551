#include "remask/remask.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char * kTabular = R"({"V":2,"L":3,"support":[{"tokens":[0,0,0],"p":0.5},{"tokens":[1,1,1],"p":0.5}]})";
const char * kAnchorFork = R"({"fork":1,"anchors":[0,2],"c_anchor":0.9,"etas":[0.1,0.1],"h0_nats":0.6})";

struct OwnedString {
    char * s = nullptr;
    ~OwnedString() { remask_string_free(s); }
    std::string str() const { return s ? s : ""; }
};

} // namespace

TEST(CApi, StatusStrings) {
    EXPECT_STREQ(remask_status_string(REMASK_OK), "ok");
    EXPECT_STREQ(remask_status_string(REMASK_ERR_PARSE), "parse error");
    EXPECT_NE(std::string(remask_version()), "");
}

TEST(CApi, DecodeRoundTrip) {
    remask_model * m = nullptr;
    ASSERT_EQ(remask_model_from_tabular_json(kTabular, &m), REMASK_OK);
    EXPECT_EQ(remask_model_length(m), 3u);
    EXPECT_EQ(remask_model_vocab_size(m), 2);

    remask_decode_config * c = nullptr;
    ASSERT_EQ(remask_decode_config_from_json(R"({"strategy":"random","t_token":1.0})", &c), REMASK_OK);
    OwnedString cj;
    ASSERT_EQ(remask_decode_config_to_json(c, &cj.s), REMASK_OK);
    EXPECT_NE(cj.str().find("\"strategy\":\"random\""), std::string::npos);

    remask_trajectory * t1 = nullptr, * t2 = nullptr;
    ASSERT_EQ(remask_decode(m, c, 4, 2, &t1), REMASK_OK);
    ASSERT_EQ(remask_decode(m, c, 4, 2, &t2), REMASK_OK);
    EXPECT_EQ(remask_trajectory_length(t1), 3u);
    EXPECT_EQ(remask_trajectory_nfe(t1), 3);
    EXPECT_EQ(remask_trajectory_steps(t1), 3u);
    std::vector<int32_t> a(3), b(3), steps(3);
    EXPECT_EQ(remask_trajectory_tokens(t1, a.data(), a.size()), 3u);
    EXPECT_EQ(remask_trajectory_tokens(t2, b.data(), b.size()), 3u);
    EXPECT_EQ(a, b);
    EXPECT_TRUE(a[0] == a[1] && a[1] == a[2]);
    EXPECT_EQ(remask_trajectory_unmask_steps(t1, steps.data(), steps.size()), 3u);
    OwnedString jl;
    ASSERT_EQ(remask_trajectory_to_jsonl(t1, &jl.s), REMASK_OK);
    const std::string lines = jl.str();
    EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 3);

    OwnedString dist;
    ASSERT_EQ(remask_enumerate(m, c, &dist.s), REMASK_OK);
    EXPECT_NE(dist.str().find("\"p\":0.5"), std::string::npos);

    remask_trajectory_free(t1);
    remask_trajectory_free(t2);
    remask_decode_config_free(c);
    remask_model_free(m);
}

TEST(CApi, ErrorsMapToStatus) {
    remask_model * m = nullptr;
    EXPECT_EQ(remask_model_from_tabular_json("{not json", &m), REMASK_ERR_PARSE);
    EXPECT_EQ(m, nullptr);
    EXPECT_NE(std::string(remask_last_error()), "");
    EXPECT_EQ(remask_model_from_anchor_fork_json(
                  R"({"fork":0,"anchors":[1],"c_anchor":0.6,"etas":[0.5],"h0_nats":0.6})", &m),
              REMASK_ERR_SPEC_VALIDATION);
    EXPECT_EQ(remask_model_from_tabular_json(kTabular, nullptr), REMASK_ERR_INVALID_ARGUMENT);
    remask_decode_config * c = nullptr;
    EXPECT_EQ(remask_decode_config_from_json(R"({"strategy":"lc","K":0})", &c), REMASK_ERR_INVALID_ARGUMENT);
    double v = 0.0;
    EXPECT_EQ(remask_pass_at_k(4, 2, 5, &v), REMASK_ERR_CONTRACT_VIOLATION);
    ASSERT_EQ(remask_pass_at_k(4, 2, 2, &v), REMASK_OK);
    EXPECT_NEAR(v, 5.0 / 6.0, 1e-15);
    EXPECT_STREQ(remask_last_error(), "");
}

TEST(CApi, AnchorForkModel) {
    remask_model * m = nullptr;
    ASSERT_EQ(remask_model_from_anchor_fork_json(kAnchorFork, &m), REMASK_OK);
    EXPECT_EQ(remask_model_length(m), 3u);
    remask_decode_config * c = nullptr;
    ASSERT_EQ(remask_decode_config_from_json(R"({"strategy":"lc"})", &c), REMASK_OK);
    remask_trajectory * t = nullptr;
    ASSERT_EQ(remask_decode(m, c, 0, 0, &t), REMASK_OK);
    std::vector<int32_t> steps(3);
    remask_trajectory_unmask_steps(t, steps.data(), steps.size());
    EXPECT_EQ(steps, (std::vector<int32_t>{0, 2, 1}));
    remask_trajectory_free(t);
    remask_decode_config_free(c);
    remask_model_free(m);
}

TEST(CApi, Runners) {
    const fs::path out = fs::temp_directory_path() / "remask_capi_verify";
    fs::remove_all(out);
    const std::string ov = "{\"out_dir\":\"" + out.string() + "\"}";
    int ok = 0;
    OwnedString files;
    const std::string cfg = std::string(REMASK_CONFIG_DIR) + "/anchor_fork_2anchors.json";
    ASSERT_EQ(remask_run_verify(cfg.c_str(), ov.c_str(), &ok, &files.s), REMASK_OK) << remask_last_error();
    EXPECT_EQ(ok, 1);
    EXPECT_NE(files.str().find("prop3.json"), std::string::npos);

    EXPECT_EQ(remask_run_verify(nullptr, nullptr, &ok, nullptr), REMASK_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(remask_run_sweep("/nonexistent/cfg.json", nullptr, &ok, nullptr), REMASK_ERR_IO);
    EXPECT_EQ(remask_run_sweep(cfg.c_str(), "{\"bogus\":1}", &ok, nullptr), REMASK_ERR_PARSE);
}
