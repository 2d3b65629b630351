// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace riscouple
{
    using Index = Eigen::Index;
    using Complex = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    inline constexpr Complex j_unit{0.0, 1.0};

    /// Requested geometry or dimensions the constructor does not handle (e.g. MIMO LOS).
    class UnsupportedConfiguration : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// A linear system was singular or its condition estimate exceeded the guard.
    class NumericallySingular : public std::runtime_error
    {
    public:
        NumericallySingular(const std::string &what, double condition)
            : std::runtime_error(what + " (condition estimate " + std::to_string(condition) + ")"), condition_(condition) {}
        double condition() const noexcept { return condition_; }

    private:
        double condition_;
    };

    /// Symmetric matrix has an eigenvalue below the roundoff tolerance.
    class NotPositiveSemidefinite : public std::domain_error
    {
    public:
        NotPositiveSemidefinite(const std::string &what, double min_eigenvalue)
            : std::domain_error(what), min_eigenvalue_(min_eigenvalue) {}
        double min_eigenvalue() const noexcept { return min_eigenvalue_; }

    private:
        double min_eigenvalue_;
    };

    /// Re(g) <= 0, so the reactance-to-phase substitution does not exist for this element.
    class ChangeOfVariablesUndefined : public std::domain_error
    {
    public:
        ChangeOfVariablesUndefined(Index element, double re_g)
            : std::domain_error("Re(g) = " + std::to_string(re_g) + " <= 0 at element " + std::to_string(element)),
              element_(element), re_g_(re_g) {}
        Index element() const noexcept { return element_; }
        double re_g() const noexcept { return re_g_; }

    private:
        Index element_;
        double re_g_;
    };

    /// Rank-one update denominator 1 + j*dx*g vanished.
    class DegenerateUpdate : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A load reactance is zero where its reciprocal is needed.
    class SingularLoad : public std::domain_error
    {
    public:
        SingularLoad(const std::string &what, Index element)
            : std::domain_error(what + " (element " + std::to_string(element) + ")"), element_(element) {}
        Index element() const noexcept { return element_; }

    private:
        Index element_;
    };

    /// Array-gain evaluation below the small-spacing guard without explicit override.
    class SpacingBelowGuard : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };
}
