#pragma once

#include <stdexcept>
#include <string>

namespace solfree {

/// Raised when inputs violate a mathematical precondition (inadmissible form,
/// mismatched moduli, resolution cap exceeded, ...). The CLI maps it to exit code 1.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed textual input (form DSL, set specs, family files). Exit code 2.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace solfree
