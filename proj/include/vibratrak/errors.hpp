#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace vibratrak {

/// Configuration / input file problem. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical solution failure. CLI maps this to exit code 3.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Newton iteration ran out of budget; carries the best iterate seen.
struct NonConvergence : SolverError {
    NonConvergence(const std::string& msg, Eigen::VectorXd best, double norm)
        : SolverError(msg), best_iterate(std::move(best)), best_residual_norm(norm) {}
    Eigen::VectorXd best_iterate;
    double best_residual_norm;
};

/// The broadband excitation of the tracked harmonic vanished, so the phase
/// resonance constraint is undefined at this state.
struct VanishingBroadband : SolverError {
    explicit VanishingBroadband(const std::string& msg) : SolverError(msg) {}
};

}  // namespace vibratrak
