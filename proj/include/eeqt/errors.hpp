#pragma once

#include <stdexcept>
#include <string>

namespace eeqt {

// Base class for every error this library raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Sector indices in messages are 1-based to match config files and reports.
struct NonHermitianHamiltonian : Error {
    NonHermitianHamiltonian(int alpha1, double t)
        : Error("hamiltonian H_" + std::to_string(alpha1) + " is not Hermitian at t=" +
                std::to_string(t)),
          alpha(alpha1), time(t) {}
    int alpha;
    double time;
};

struct NonzeroDiagonalCoupling : Error {
    explicit NonzeroDiagonalCoupling(int alpha1)
        : Error("diagonal coupling g_" + std::to_string(alpha1) + "," + std::to_string(alpha1) +
                " must be identically zero"),
          alpha(alpha1) {}
    int alpha;
};

// Requested a jump destination while the total jump rate is zero.
struct NoJumpPossible : Error {
    using Error::Error;
};

// Deterministic evolution drove the state vector to numerical zero.
struct DeadBranch : Error {
    using Error::Error;
};

struct IntegrationError : Error {
    using Error::Error;
};

struct RunawayJumps : Error {
    using Error::Error;
};

// Fixed-dt thinning saw lambda*dt beyond the hard guard.
struct StepTooLarge : Error {
    using Error::Error;
};

struct TraceDriftExceeded : Error {
    using Error::Error;
};

struct InvariantViolation : Error {
    using Error::Error;
};

struct ConfigError : Error {
    ConfigError(const std::string& path_in, const std::string& message)
        : Error(path_in.empty() ? message : path_in + ": " + message), path(path_in) {}
    std::string path;
};

}  // namespace eeqt
