#pragma once

// Common numeric aliases and the error types shared by every module.
//
// Units: hbar = c = lambda = 1 everywhere. Masses and source strengths are
// the dimensionless products m*lambda and M*lambda; times are in lambda/c.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace cqrm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Raised when a state would carry more probability above the Fock cutoff than
// the truncation can represent.
class TailTooHeavy : public Error {
public:
    TailTooHeavy(const std::string& what, double discarded)
        : Error(what), discarded_(discarded) {}
    double discarded() const { return discarded_; }

private:
    double discarded_;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

double max_abs(const Matrix& m);

}  // namespace cqrm
