#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace remask {

using Token = std::int32_t;

// The mask sentinel lives outside every data vocabulary [0, V).
inline constexpr Token kMaskToken = -1;

class Vocab {
public:
    explicit Vocab(int size);

    int size() const noexcept { return size_; }
    bool is_data_token(Token t) const noexcept { return t >= 0 && t < size_; }

private:
    int size_;
};

struct Assignment {
    std::size_t position;
    Token       token;
};

// Partially decoded sequence. Values are immutable; unmasking yields a new
// sequence.
class MaskedSequence {
public:
    MaskedSequence() = default;
    explicit MaskedSequence(std::vector<Token> tokens);

    static MaskedSequence all_masked(std::size_t length);

    std::size_t length() const noexcept { return tokens_.size(); }
    std::span<const Token> tokens() const noexcept { return tokens_; }
    Token operator[](std::size_t i) const { return tokens_.at(i); }

    bool is_masked(std::size_t i) const { return tokens_.at(i) == kMaskToken; }
    bool is_complete() const noexcept;
    std::size_t masked_count() const noexcept;

    // Ascending.
    std::vector<std::size_t> masked_positions() const;

    // Throws contract_violation if a target is already unmasked, appears twice,
    // is out of range, or if a token equals the mask sentinel.
    MaskedSequence apply_unmask(std::span<const Assignment> assignments) const;

    std::string to_string() const;

    friend bool operator==(const MaskedSequence &, const MaskedSequence &) = default;
    friend auto operator<=>(const MaskedSequence & a, const MaskedSequence & b) { return a.tokens_ <=> b.tokens_; }

private:
    std::vector<Token> tokens_;
};

} // namespace remask
