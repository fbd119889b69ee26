#pragma once

#include <stdexcept>
#include <string>

namespace seaflow {

// Base for all library errors. `code()` is a stable machine-readable tag the
// CLI maps into its error JSON; `module()` names the subsystem that threw.
class Error : public std::runtime_error {
public:
    Error(std::string code, std::string module, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)), module_(std::move(module)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

private:
    std::string code_;
    std::string module_;
};

#define SEAFLOW_DEFINE_ERROR(NAME, CODE, MODULE)                       \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& message)                      \
            : Error(CODE, MODULE, message) {}                          \
    }

// geo
SEAFLOW_DEFINE_ERROR(MissingPairError, "MissingPair", "geo");
SEAFLOW_DEFINE_ERROR(InvalidPointError, "InvalidPoint", "geo");

// shipnet
SEAFLOW_DEFINE_ERROR(UnknownPortError, "UnknownPort", "shipnet");
SEAFLOW_DEFINE_ERROR(SelfLoopError, "SelfLoop", "shipnet");
SEAFLOW_DEFINE_ERROR(NoConvergenceError, "NoConvergence", "shipnet");
SEAFLOW_DEFINE_ERROR(DegenerateRangeError, "DegenerateRange", "shipnet");
SEAFLOW_DEFINE_ERROR(InsufficientPseudoError, "InsufficientPseudo", "shipnet");

// linkpred
SEAFLOW_DEFINE_ERROR(SingleClassError, "SingleClass", "linkpred");
SEAFLOW_DEFINE_ERROR(NonFiniteFeatureError, "NonFiniteFeature", "linkpred");
SEAFLOW_DEFINE_ERROR(TooFewRowsError, "TooFewRows", "linkpred");
SEAFLOW_DEFINE_ERROR(EmptyInputError, "EmptyInput", "linkpred");

// tensorcore
SEAFLOW_DEFINE_ERROR(ShapeMismatchError, "ShapeMismatch", "tensorcore");
SEAFLOW_DEFINE_ERROR(NonScalarLossError, "NonScalarLoss", "tensorcore");

// gravity
SEAFLOW_DEFINE_ERROR(UnknownRegionError, "UnknownRegion", "gravity");
SEAFLOW_DEFINE_ERROR(EmptySampleSetError, "EmptySampleSet", "gravity");
SEAFLOW_DEFINE_ERROR(TooFewSamplesError, "TooFewSamples", "gravity");

// evalkit
SEAFLOW_DEFINE_ERROR(EmptyComparisonError, "EmptyComparison", "evalkit");

// bwra
SEAFLOW_DEFINE_ERROR(EmptyFlowsError, "EmptyFlows", "bwra");
SEAFLOW_DEFINE_ERROR(BinMismatchError, "BinMismatch", "bwra");

// pipeline
SEAFLOW_DEFINE_ERROR(BadParamsError, "BadParams", "pipeline");
SEAFLOW_DEFINE_ERROR(IoError, "Io", "pipeline");

#undef SEAFLOW_DEFINE_ERROR

// CSV parse failures carry a 1-based line (and column for header problems).
class SchemaMismatchError : public Error {
public:
    SchemaMismatchError(const std::string& message, int line, int column)
        : Error("SchemaMismatch", "pipeline", message), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class BadNumberError : public Error {
public:
    BadNumberError(const std::string& message, int line)
        : Error("BadNumber", "pipeline", message), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace seaflow
