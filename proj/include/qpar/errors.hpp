#pragma once

#include <stdexcept>
#include <string>

namespace qpar {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Lexical, syntactic or resolution failure. Carries a 1-based source position.
struct ParseError : Error {
    ParseError(const std::string& msg, int at_line, int at_column)
        : Error(msg + " (line " + std::to_string(at_line) + ", column " +
                std::to_string(at_column) + ")"),
          line(at_line),
          column(at_column) {}
    int line;
    int column;
};

// Raised while classically interpreting a program into a trace.
struct LoweringError : Error {
    using Error::Error;
};

// A trace failed validation, or a schedule was requested for an invalid trace.
struct ValidationError : Error {
    using Error::Error;
};

// Raised when inverting a block that contains a measurement or a
// classically controlled gate.
struct NotAdjointableError : Error {
    NotAdjointableError() : Error("not adjointable") {}
};

// Statevector execution failure (dirty ancilla, slot budget, norm drift).
struct SimulationError : Error {
    using Error::Error;
};

}  // namespace qpar
