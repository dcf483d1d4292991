#ifndef WARDROP_ERRORS_HPP
#define WARDROP_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace wardrop {

// Base class for all domain errors raised by the library.
// The CLI prints what() verbatim and exits with status 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- network ----
class BadTerminals : public Error {
public:
    explicit BadTerminals(const std::string& msg) : Error("BadTerminals: " + msg) {}
};

class NonpositiveCapacity : public Error {
public:
    explicit NonpositiveCapacity(const std::string& edge)
        : Error("NonpositiveCapacity: edge " + edge) {}
};

class DanglingEdge : public Error {
public:
    explicit DanglingEdge(const std::string& edge)
        : Error("DanglingEdge: edge " + edge + " lies on no origin-destination path") {}
};

class PathExplosion : public Error {
public:
    PathExplosion(std::size_t bound)
        : Error("PathExplosion: more than " + std::to_string(bound) + " origin-destination paths") {}
};

class SearchBudgetExceeded : public Error {
public:
    explicit SearchBudgetExceeded(const std::string& what_search)
        : Error("SearchBudgetExceeded: " + what_search) {}
};

// ---- costs ----
class DomainViolation : public Error {
public:
    explicit DomainViolation(const std::string& msg) : Error("DomainViolation: " + msg) {}
};

class IdentifiabilityFailure : public Error {
public:
    explicit IdentifiabilityFailure(const std::string& msg)
        : Error("IdentifiabilityFailure: " + msg) {}
};

// ---- equilibrium ----
class InfeasibleDemand : public Error {
public:
    explicit InfeasibleDemand(const std::string& msg) : Error("InfeasibleDemand: " + msg) {}
};

class NoConvergence : public Error {
public:
    NoConvergence(std::size_t iters, double gap)
        : Error("NoConvergence: " + std::to_string(iters) + " line-search steps, achieved gap " +
                [gap] {
                    char buf[40];
                    std::snprintf(buf, sizeof(buf), "%.17g", gap);
                    return std::string(buf);
                }()),
          iterations(iters),
          achieved_gap(gap) {}
    std::size_t iterations;
    double achieved_gap;
};

// ---- learning ----
class TruncationStarved : public Error {
public:
    TruncationStarved()
        : Error("TruncationStarved: rejection sampling exceeded 1e6 attempts") {}
};

class EmptyPosterior : public Error {
public:
    explicit EmptyPosterior(const std::string& msg) : Error("EmptyPosterior: " + msg) {}
};

// ---- counterexample ----
class NotApplicable : public Error {
public:
    explicit NotApplicable(const std::string& msg) : Error("NotApplicable: " + msg) {}
};

class ParamViolation : public Error {
public:
    explicit ParamViolation(const std::string& msg) : Error("ParamViolation: " + msg) {}
};

class WitnessNotFound : public Error {
public:
    explicit WitnessNotFound(const std::string& msg) : Error("WitnessNotFound: " + msg) {}
};

// ---- scenario files ----
class ParseError : public Error {
public:
    ParseError(int line, const std::string& msg)
        : Error("ParseError (line " + std::to_string(line) + "): " + msg) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("ValidationError: " + msg) {}
};

} // namespace wardrop

#endif
