#include "remask/sequence.hpp"

#include "remask/error.hpp"

#include <algorithm>

namespace remask {

Vocab::Vocab(int size) : size_(size) {
    require(size >= 2, Errc::invalid_argument, "vocabulary size must be >= 2, got " + std::to_string(size));
}

MaskedSequence::MaskedSequence(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    for (Token t : tokens_) {
        require(t == kMaskToken || t >= 0, Errc::invalid_argument, "negative token id " + std::to_string(t));
    }
}

MaskedSequence MaskedSequence::all_masked(std::size_t length) {
    return MaskedSequence(std::vector<Token>(length, kMaskToken));
}

bool MaskedSequence::is_complete() const noexcept {
    return std::none_of(tokens_.begin(), tokens_.end(), [](Token t) { return t == kMaskToken; });
}

std::size_t MaskedSequence::masked_count() const noexcept {
    return static_cast<std::size_t>(std::count(tokens_.begin(), tokens_.end(), kMaskToken));
}

std::vector<std::size_t> MaskedSequence::masked_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i] == kMaskToken) {
            out.push_back(i);
        }
    }
    return out;
}

MaskedSequence MaskedSequence::apply_unmask(std::span<const Assignment> assignments) const {
    MaskedSequence next = *this;
    for (const auto & a : assignments) {
        require(a.position < next.tokens_.size(), Errc::contract_violation,
                "unmask position " + std::to_string(a.position) + " out of range");
        require(a.token != kMaskToken, Errc::contract_violation, "cannot assign the mask sentinel");
        require(a.token >= 0, Errc::contract_violation, "negative token id " + std::to_string(a.token));
        require(next.tokens_[a.position] == kMaskToken, Errc::contract_violation,
                "position " + std::to_string(a.position) + " is not masked");
        next.tokens_[a.position] = a.token;
    }
    return next;
}

std::string MaskedSequence::to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += tokens_[i] == kMaskToken ? std::string("m") : std::to_string(tokens_[i]);
    }
    return s + "]";
}

} // namespace remask
