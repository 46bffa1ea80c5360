#pragma once

#include <stdexcept>
#include <string>

namespace balanced {

// Error taxonomy shared across the library. Each maps to one failure mode
// of the numerical pipeline; all derive from std::runtime_error so callers
// can catch coarsely or precisely.

struct NonConvergentTail : std::runtime_error {
    explicit NonConvergentTail(const std::string& what) : std::runtime_error(what) {}
};

struct BracketInvalid : std::runtime_error {
    explicit BracketInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct DivergentIterate : std::runtime_error {
    explicit DivergentIterate(const std::string& what) : std::runtime_error(what) {}
};

struct TailNotConverged : std::runtime_error {
    explicit TailNotConverged(const std::string& what) : std::runtime_error(what) {}
};

struct TruncationDominates : std::runtime_error {
    explicit TruncationDominates(const std::string& what) : std::runtime_error(what) {}
};

struct GridTooNarrow : std::runtime_error {
    explicit GridTooNarrow(const std::string& what) : std::runtime_error(what) {}
};

struct FormatVersionMismatch : std::runtime_error {
    explicit FormatVersionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct CorruptFile : std::runtime_error {
    explicit CorruptFile(const std::string& what) : std::runtime_error(what) {}
};

} // namespace balanced
