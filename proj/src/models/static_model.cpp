#include "remask/error.hpp"
#include "remask/models.hpp"

namespace remask {

StaticModel::StaticModel(std::vector<Categorical> per_position) : dists_(std::move(per_position)) {
    require(!dists_.empty(), Errc::invalid_argument, "static model needs at least one position");
    for (const auto & d : dists_) {
        require(d.size() == dists_.front().size() && d.size() >= 2, Errc::invalid_argument,
                "static model distributions must share a vocabulary of size >= 2");
    }
}

PredictorOutput StaticModel::predict(const MaskedSequence & state) const {
    require(state.length() == dists_.size(), Errc::contract_violation, "state length does not match model");
    std::vector<PositionPrediction> out;
    for (std::size_t k : state.masked_positions()) {
        out.push_back({k, dists_[k]});
    }
    require(!out.empty(), Errc::contract_violation, "predict requires at least one masked position");
    return PredictorOutput(std::move(out));
}

} // namespace remask
