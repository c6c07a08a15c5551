#include "remask/error.hpp"
#include "remask/metrics.hpp"

#include <string>

namespace remask {

namespace {

nlohmann::ordered_json record_to_ordered(const SampleRecord & r) {
    nlohmann::ordered_json j;
    j["problem"] = r.problem;
    j["trial"]   = r.trial;
    j["answer"]  = r.answer;
    j["correct"] = r.correct;
    j["nfe"]     = r.nfe;
    j["score"]   = r.score ? nlohmann::ordered_json(*r.score) : nlohmann::ordered_json(nullptr);
    return j;
}

} // namespace

nlohmann::json record_to_json(const SampleRecord & r) {
    return nlohmann::json::parse(record_to_ordered(r).dump());
}

SampleRecord record_from_json(const nlohmann::json & j) {
    try {
        SampleRecord r;
        r.problem = j.at("problem").get<std::string>();
        r.trial   = j.at("trial").get<std::int64_t>();
        r.answer  = j.at("answer").get<std::string>();
        r.correct = j.at("correct").get<bool>();
        r.nfe     = j.at("nfe").get<std::int64_t>();
        if (j.contains("score") && !j.at("score").is_null()) {
            r.score = j.at("score").get<double>();
        }
        require(r.nfe >= 1, Errc::parse_error, "record nfe must be >= 1");
        return r;
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("record: ") + e.what());
    }
}

void write_records_jsonl(std::span<const SampleRecord> records, const nlohmann::json & meta, std::ostream & os) {
    if (!meta.is_null()) {
        os << nlohmann::json{{"meta", meta}}.dump() << '\n';
    }
    for (const auto & r : records) {
        os << record_to_ordered(r).dump() << '\n';
    }
}

std::vector<SampleRecord> read_records_jsonl(std::istream & is) {
    std::vector<SampleRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception & e) {
            fail(Errc::parse_error, "records line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.is_object() && j.contains("meta")) continue;
        out.push_back(record_from_json(j));
    }
    return out;
}

} // namespace remask
