#pragma once

#include <stdexcept>
#include <string>

namespace remask {

enum class Errc {
    invalid_argument,
    contract_violation,
    evidence_zero,
    spec_validation,
    size_limit,
    nontermination,
    degenerate_weight,
    parse_error,
    io_error,
};

const char * errc_name(Errc code);

// All library failures surface as this exception; the C API maps code() onto
// remask_status.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string & message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string & message);

inline void require(bool condition, Errc code, const std::string & message) {
    if (!condition) {
        fail(code, message);
    }
}

} // namespace remask
