#include "remask/error.hpp"
#include "remask/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace remask {

namespace {

// Entropy targets this close above ln 2 are treated as ln 2 (JSON round trips
// of ln 2 land within a few ulps).
constexpr double kLn2Slack = 1e-12;

std::string describe_subset(const AnchorForkSpec & spec, std::uint32_t mask) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (std::size_t i = 0; i < spec.anchors.size(); ++i) {
        if (mask & (1u << i)) {
            os << (first ? "" : ",") << spec.anchors[i];
            first = false;
        }
    }
    os << "}";
    return os.str();
}

} // namespace

double binary_entropy(double p) {
    require(p >= 0.0 && p <= 1.0, Errc::invalid_argument, "binary entropy needs p in [0, 1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    return h;
}

double inverse_binary_entropy(double h) {
    require(h > 0.0 && h <= std::numbers::ln2 + kLn2Slack, Errc::spec_validation,
            "binary entropy target " + std::to_string(h) + " outside (0, ln 2]");
    if (h >= std::numbers::ln2) {
        return 0.5;
    }
    // binary_entropy is strictly decreasing on [0.5, 1].
    double lo = 0.5;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (binary_entropy(mid) > h) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double AnchorForkSpec::revealed_eta(std::uint32_t revealed) const {
    double total = 0.0;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (revealed & (1u << i)) {
            total += etas[i];
        }
    }
    return total;
}

std::size_t AnchorForkSpec::length() const {
    std::size_t hi = fork;
    for (auto a : anchors) hi = std::max(hi, a);
    for (const auto & f : fillers) hi = std::max(hi, f.position);
    return hi + 1;
}

void AnchorForkSpec::check_structure() const {
    require(vocab_size >= 2, Errc::spec_validation, "V must be >= 2");
    require(anchors.size() <= kMaxAnchors, Errc::size_limit,
            "at most " + std::to_string(kMaxAnchors) + " anchors are supported");
    require(etas.size() == anchors.size(), Errc::spec_validation, "need exactly one eta per anchor");
    require(c_anchor > 0.0 && c_anchor < 1.0, Errc::spec_validation, "c_anchor must lie in (0, 1)");
    require(std::isfinite(h0_nats) && h0_nats > 0.0, Errc::spec_validation, "h0_nats must be > 0");
    require(h0_nats <= std::numbers::ln2 + kLn2Slack, Errc::spec_validation,
            "h0_nats exceeds ln 2, the maximum binary entropy");
    for (double eta : etas) {
        require(std::isfinite(eta) && eta > 0.0, Errc::spec_validation, "every eta must be > 0");
    }
    if (!anchors.empty()) {
        require(h0_nats > eta_total(), Errc::spec_validation, "need h0_nats > sum of etas");
    }
    std::set<std::size_t> used = {fork};
    for (auto a : anchors) {
        require(used.insert(a).second, Errc::spec_validation, "anchor position " + std::to_string(a) + " reused");
    }
    for (const auto & f : fillers) {
        require(used.insert(f.position).second, Errc::spec_validation,
                "filler position " + std::to_string(f.position) + " reused");
        require(f.confidence > 0.0 && f.confidence <= 1.0, Errc::spec_validation,
                "filler confidence must lie in (0, 1]");
        require(f.confidence * vocab_size >= 1.0, Errc::spec_validation,
                "filler confidence must be >= 1/V so its peak is the argmax");
    }
    require(c_anchor * vocab_size >= 1.0, Errc::spec_validation, "c_anchor must be >= 1/V");
}

AnchorForkSpec AnchorForkSpec::from_json(const nlohmann::json & j) {
    static const std::set<std::string> known = {"fork", "anchors", "c_anchor", "etas", "h0_nats", "fillers", "V"};
    require(j.is_object(), Errc::parse_error, "anchor-fork spec must be a JSON object");
    for (const auto & item : j.items()) {
        require(known.count(item.key()) == 1, Errc::parse_error, "unknown anchor-fork field '" + item.key() + "'");
    }
    try {
        AnchorForkSpec s;
        s.fork     = j.at("fork").get<std::size_t>();
        s.anchors  = j.at("anchors").get<std::vector<std::size_t>>();
        s.c_anchor = j.at("c_anchor").get<double>();
        s.etas     = j.at("etas").get<std::vector<double>>();
        s.h0_nats  = j.at("h0_nats").get<double>();
        if (j.contains("V")) {
            s.vocab_size = j.at("V").get<int>();
        }
        if (j.contains("fillers") && !j.at("fillers").is_null()) {
            for (const auto & f : j.at("fillers")) {
                s.fillers.push_back({f.at("position").get<std::size_t>(), f.at("confidence").get<double>()});
            }
        }
        s.check_structure();
        return s;
    } catch (const nlohmann::json::exception & e) {
        fail(Errc::parse_error, std::string("anchor-fork spec: ") + e.what());
    }
}

nlohmann::json AnchorForkSpec::to_json() const {
    nlohmann::json fl = nlohmann::json::array();
    for (const auto & f : fillers) {
        fl.push_back({{"position", f.position}, {"confidence", f.confidence}});
    }
    return {{"fork", fork},       {"anchors", anchors}, {"c_anchor", c_anchor}, {"etas", etas},
            {"h0_nats", h0_nats}, {"fillers", fl},      {"V", vocab_size}};
}

BinaryDistribution fork_distribution(const AnchorForkSpec & spec, std::uint32_t revealed) {
    require((revealed & ~spec.full_mask()) == 0, Errc::contract_violation, "revealed set is not a subset of the anchors");
    const double target = spec.h0_nats - spec.revealed_eta(revealed);
    require(target > 0.0, Errc::spec_validation,
            "fork entropy target " + std::to_string(target) + " must be > 0 after revealing " +
                describe_subset(spec, revealed));
    return {inverse_binary_entropy(target)};
}

GapBounds validate_spec(const AnchorForkSpec & spec) {
    spec.check_structure();
    GapBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    const std::uint32_t subsets = 1u << spec.anchors.size();
    for (std::uint32_t s = 0; s < subsets; ++s) {
        const double p = fork_distribution(spec, s).major;
        if (!(p < spec.c_anchor)) {
            std::ostringstream os;
            os << "confidence gap violated at revealed subset " << describe_subset(spec, s) << ": fork confidence "
               << p << " >= c_anchor " << spec.c_anchor;
            fail(Errc::spec_validation, os.str());
        }
        const double gap = std::log(spec.c_anchor / p);
        b.delta = std::min(b.delta, gap);
        b.Delta = std::max(b.Delta, gap);
    }
    return b;
}

AnchorForkModel::AnchorForkModel(AnchorForkSpec spec)
    : spec_(std::move(spec)), bounds_(validate_spec(spec_)), length_(spec_.length()) {
    anchor_index_.assign(length_, -1);
    fixed_confidence_.assign(length_, spec_.c_anchor);
    for (std::size_t i = 0; i < spec_.anchors.size(); ++i) {
        anchor_index_[spec_.anchors[i]] = static_cast<int>(i);
    }
    for (const auto & f : spec_.fillers) {
        fixed_confidence_[f.position] = f.confidence;
    }
}

std::uint32_t AnchorForkModel::revealed_mask(const MaskedSequence & state) const {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < spec_.anchors.size(); ++i) {
        if (!state.is_masked(spec_.anchors[i])) {
            mask |= 1u << i;
        }
    }
    return mask;
}

PredictorOutput AnchorForkModel::predict(const MaskedSequence & state) const {
    require(state.length() == length_, Errc::contract_violation, "state length does not match model");
    const auto masked = state.masked_positions();
    require(!masked.empty(), Errc::contract_violation, "predict requires at least one masked position");
    const auto V = static_cast<std::size_t>(spec_.vocab_size);

    std::vector<PositionPrediction> out;
    out.reserve(masked.size());
    for (std::size_t k : masked) {
        if (k == spec_.fork) {
            const auto fd = fork_distribution(spec_, revealed_mask(state));
            std::vector<double> w(V, 0.0);
            w[0] = fd.major;
            w[1] = fd.minor();
            out.push_back({k, Categorical::from_weights(std::move(w))});
        } else {
            out.push_back({k, Categorical::peaked(V, 0, fixed_confidence_[k])});
        }
    }
    return PredictorOutput(std::move(out));
}

} // namespace remask
