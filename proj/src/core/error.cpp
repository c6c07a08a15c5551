#include "remask/error.hpp"

namespace remask {

const char * errc_name(Errc code) {
    switch (code) {
        case Errc::invalid_argument:   return "invalid_argument";
        case Errc::contract_violation: return "contract_violation";
        case Errc::evidence_zero:      return "evidence_zero";
        case Errc::spec_validation:    return "spec_validation";
        case Errc::size_limit:         return "size_limit";
        case Errc::nontermination:     return "nontermination";
        case Errc::degenerate_weight:  return "degenerate_weight";
        case Errc::parse_error:        return "parse_error";
        case Errc::io_error:           return "io_error";
    }
    return "unknown";
}

Error::Error(Errc code, const std::string & message)
    : std::runtime_error(message), code_(code) {}

void fail(Errc code, const std::string & message) {
    throw Error(code, message);
}

} // namespace remask
