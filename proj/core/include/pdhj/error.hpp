#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdhj {

// Base of every exception thrown by the library. The module name is kept so
// the runner can tell the user where a computation failed.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// Argument outside the domain of an operation (time outside a grid span,
// mismatched dimensions, incompatible spans).
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid parameter values (epsilon outside (0, eps0], empty grids, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A documented contract was broken by caller-supplied data, e.g. a forcing
// exceeding the L-growth bound or a curve with a derivative jump.
class ContractError : public Error {
public:
    using Error::Error;
};

// Inner nonlinear solve failed to converge.
class SolverError : public Error {
public:
    SolverError(std::string module, const std::string& what, std::size_t step)
        : Error(std::move(module), what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Operator produced non-finite output during an audit.
class AuditFailure : public Error {
public:
    AuditFailure(const std::string& what, std::size_t sample)
        : Error("evolution", what + " (sample " + std::to_string(sample) + ")"), sample_(sample) {}

    std::size_t sample() const noexcept { return sample_; }

private:
    std::size_t sample_;
};

// f or l returned a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// A successor state left the value lattice. `margin` is how far outside the
// lattice box the worst successor landed.
class LatticeError : public Error {
public:
    LatticeError(const std::string& what, double margin)
        : Error("game", what), margin_(margin) {}

    double margin() const noexcept { return margin_; }

private:
    double margin_;
};

// Misconfigured object, e.g. a feedback strategy with an empty companion
// library.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

}  // namespace pdhj
