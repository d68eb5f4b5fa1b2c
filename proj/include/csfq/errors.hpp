#pragma once

#include <stdexcept>
#include <string>

namespace csfq {

// Configuration / input problems (CLI exit code 2).
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: fit divergence, positivity aborts, non-convergent
// quadrature (CLI exit code 3).
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

class FitDiverged : public numerical_error {
  public:
    explicit FitDiverged(const std::string& msg) : numerical_error(msg) {}
};

class GaussianFitFailed : public numerical_error {
  public:
    explicit GaussianFitFailed(const std::string& msg) : numerical_error(msg) {}
};

// The low-energy persistent-current projection has (near-)equal
// eigenvalues, so the computational basis is undefined at this point.
class DegenerateProjection : public numerical_error {
  public:
    explicit DegenerateProjection(const std::string& msg) : numerical_error(msg) {}
};

class InsufficientData : public config_error {
  public:
    explicit InsufficientData(const std::string& msg) : config_error(msg) {}
};

}  // namespace csfq
