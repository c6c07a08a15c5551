#include "remask/error.hpp"
#include "remask/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace remask {

Categorical Categorical::from_weights(std::vector<double> weights) {
    require(!weights.empty(), Errc::invalid_argument, "categorical needs at least one outcome");
    double total = 0.0;
    for (double w : weights) {
        require(std::isfinite(w) && w >= 0.0, Errc::invalid_argument, "categorical weights must be finite and >= 0");
        total += w;
    }
    require(total > 0.0, Errc::invalid_argument, "categorical weights sum to zero");
    for (double & w : weights) {
        w /= total;
    }
    Categorical c;
    c.probs_ = std::move(weights);
    return c;
}

Categorical Categorical::point_mass(std::size_t size, Token t) {
    require(t >= 0 && static_cast<std::size_t>(t) < size, Errc::invalid_argument, "point mass outside vocabulary");
    std::vector<double> w(size, 0.0);
    w[static_cast<std::size_t>(t)] = 1.0;
    Categorical c;
    c.probs_ = std::move(w);
    return c;
}

Categorical Categorical::peaked(std::size_t size, Token peak, double peak_prob) {
    require(size >= 2, Errc::invalid_argument, "peaked distribution needs >= 2 tokens");
    require(peak_prob > 0.0 && peak_prob <= 1.0, Errc::invalid_argument, "peak probability must lie in (0, 1]");
    std::vector<double> w(size, (1.0 - peak_prob) / static_cast<double>(size - 1));
    w.at(static_cast<std::size_t>(peak)) = peak_prob;
    Categorical c;
    c.probs_ = std::move(w);
    return c;
}

Token Categorical::argmax() const {
    const auto it = std::max_element(probs_.begin(), probs_.end());
    return static_cast<Token>(it - probs_.begin());
}

Categorical Categorical::tempered(double temperature) const {
    require(temperature >= 0.0, Errc::invalid_argument, "temperature must be >= 0");
    if (temperature == 0.0) {
        return point_mass(size(), argmax());
    }
    if (temperature == 1.0) {
        return *this;
    }
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(size(), neg_inf);
    double hi = neg_inf;
    for (std::size_t i = 0; i < size(); ++i) {
        if (probs_[i] > 0.0) {
            logw[i] = std::log(probs_[i]) / temperature;
            hi      = std::max(hi, logw[i]);
        }
    }
    std::vector<double> w(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        if (logw[i] != neg_inf) {
            w[i] = std::exp(logw[i] - hi);
        }
    }
    return from_weights(std::move(w));
}

Token Categorical::sample(Rng & rng) const {
    const double u = rng.uniform();
    double cum = 0.0;
    Token last_positive = 0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (probs_[i] <= 0.0) {
            continue;
        }
        last_positive = static_cast<Token>(i);
        cum += probs_[i];
        if (u < cum) {
            return static_cast<Token>(i);
        }
    }
    return last_positive;
}

Token Categorical::draw(double temperature, Rng & rng) const {
    if (temperature == 0.0) {
        return argmax();
    }
    if (temperature == 1.0) {
        return sample(rng);
    }
    return tempered(temperature).sample(rng);
}

double entropy_nats(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

PredictorOutput::PredictorOutput(std::vector<PositionPrediction> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        require(entries_[i - 1].position < entries_[i].position, Errc::contract_violation,
                "predictor output must be ascending by position");
    }
}

const Categorical & PredictorOutput::at(std::size_t position) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), position,
                                     [](const PositionPrediction & e, std::size_t p) { return e.position < p; });
    require(it != entries_.end() && it->position == position, Errc::contract_violation,
            "no prediction for position " + std::to_string(position));
    return it->dist;
}

} // namespace remask
