#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace riccati {

/// Malformed coefficient text. `offset` is the byte position of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected = {})
        : std::runtime_error(what), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

enum class EvalErrorKind {
    log_domain,
    sqrt_domain,
    pow_domain,
    division_by_zero,
    unbound_parameter,
    non_finite,
};

inline const char* to_string(EvalErrorKind kind) {
    switch (kind) {
        case EvalErrorKind::log_domain: return "ln of non-positive value";
        case EvalErrorKind::sqrt_domain: return "sqrt of negative value";
        case EvalErrorKind::pow_domain: return "fractional power of negative value";
        case EvalErrorKind::division_by_zero: return "division by zero";
        case EvalErrorKind::unbound_parameter: return "unbound parameter";
        case EvalErrorKind::non_finite: return "non-finite result";
    }
    return "evaluation error";
}

class EvalError : public std::domain_error {
public:
    EvalError(EvalErrorKind kind, const std::string& detail)
        : std::domain_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
          kind_(kind) {}

    EvalErrorKind kind() const noexcept { return kind_; }

private:
    EvalErrorKind kind_;
};

/// Failure of a numerical stage (tabulation, series convergence, factor zeros).
/// `stage()` names the pipeline step that failed.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Expression evaluation failed at a specific grid node.
class TabulationError : public NumericalError {
public:
    TabulationError(const std::string& stage, std::size_t node, double x, const EvalError& cause)
        : NumericalError(stage, "evaluation failed at node " + std::to_string(node) + " (x=" +
                                    std::to_string(x) + "): " + cause.what()),
          node_(node), x_(x), kind_(cause.kind()) {}

    std::size_t node() const noexcept { return node_; }
    double x() const noexcept { return x_; }
    EvalErrorKind kind() const noexcept { return kind_; }

private:
    std::size_t node_;
    double x_;
    EvalErrorKind kind_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& stage, std::vector<double> history)
        : NumericalError(stage, "Picard iteration did not converge after " +
                                    std::to_string(history.size()) + " iterations (last correction " +
                                    (history.empty() ? std::string("n/a") : std::to_string(history.back())) +
                                    ")"),
          history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

struct Interval {
    double lo;
    double hi;
};

/// The integrating factor alpha vanishes inside the domain; 1/alpha^2 integrals are undefined past it.
class AlphaZeroError : public NumericalError {
public:
    AlphaZeroError(const std::string& stage, std::vector<Interval> cells)
        : NumericalError(stage, describe(cells)), cells_(std::move(cells)) {}

    const std::vector<Interval>& cells() const noexcept { return cells_; }

private:
    static std::string describe(const std::vector<Interval>& cells) {
        std::string s = "alpha vanishes on grid in";
        for (const auto& c : cells) {
            s += " [" + std::to_string(c.lo) + ", " + std::to_string(c.hi) + "]";
        }
        return s;
    }

    std::vector<Interval> cells_;
};

}  // namespace riccati
