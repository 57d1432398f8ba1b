#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vortwist {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point lies outside the disk (or strip) where the perturbation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation at (or numerically at) the vortex position.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// A trajectory left the regularized domain r > r* during integration.
class DomainExit : public Error {
public:
    DomainExit(const std::string& what, double t_exit = 0.0, long escape_index = -1)
        : Error(what), t_exit_(t_exit), escape_index_(escape_index) {}
    double t_exit() const noexcept { return t_exit_; }
    /// Iterate index for orbit iterations, -1 when not applicable.
    long escape_index() const noexcept { return escape_index_; }

private:
    double t_exit_;
    long escape_index_;
};

class StepFailure : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> best_iterate = {},
                  double best_residual = 0.0)
        : Error(what), best_(std::move(best_iterate)), best_residual_(best_residual) {}
    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double best_residual() const noexcept { return best_residual_; }

private:
    std::vector<double> best_;
    double best_residual_;
};

class WindowError : public Error {
public:
    using Error::Error;
};

class DepthError : public Error {
public:
    using Error::Error;
};

class HypothesisError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace vortwist
