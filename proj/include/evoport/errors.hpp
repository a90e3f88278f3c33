#pragma once

#include <stdexcept>
#include <string>

namespace evoport {

// Data-layer failures: missing files, malformed rows, inconsistent inputs.
// The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public DataError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : DataError(what) {}
};

class EmptyUniverseError : public DataError {
public:
    explicit EmptyUniverseError(const std::string& what) : DataError(what) {}
};

class DataConsistencyError : public DataError {
public:
    explicit DataConsistencyError(const std::string& what) : DataError(what) {}
};

// Optimization could not produce a feasible result. CLI exit code 3.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

class Phase1InfeasibleError : public InfeasibleError {
public:
    Phase1InfeasibleError(const std::string& what, std::string diagnostics)
        : InfeasibleError(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const { return diagnostics_; }

private:
    std::string diagnostics_;
};

class Phase2InfeasibleError : public InfeasibleError {
public:
    explicit Phase2InfeasibleError(const std::string& what) : InfeasibleError(what) {}
};

class InfeasibleCardinalityError : public InfeasibleError {
public:
    explicit InfeasibleCardinalityError(const std::string& what) : InfeasibleError(what) {}
};

// A portfolio whose risk is exactly zero; Sharpe is undefined for it.
class DegeneratePortfolioError : public std::runtime_error {
public:
    explicit DegeneratePortfolioError(const std::string& what) : std::runtime_error(what) {}
};

// An all-zero weight genome; callers replace it with a fresh random one.
class DegenerateGenomeError : public std::runtime_error {
public:
    explicit DegenerateGenomeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace evoport
