#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spectral_ood {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid user-supplied configuration or precondition violation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters sit on (or inside the exclusion band around) a regime boundary
/// where closed-form branches switch discontinuously.
class DegenerateRegimeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Numerical failure: non-finite values, non-convergence, singular structure.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace spectral_ood
