// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
//
// Impedance-parameter description of a RIS-aided link.
//
//   Z = Z_DS - Z_DR (Z_R + Z_N)^-1 Z_RS,     Z_N = j diag(x)
//
// Z_R carries the mutual coupling of the RIS array; for isotropic radiators on a
// uniform line its entries depend only on the element distance in wavelengths.

#pragma once

#include "riscouple/types.hpp"

namespace riscouple
{
    /// The four impedance blocks of a RIS link plus the reference resistance (ohms).
    struct ImpedanceChannel
    {
        CMatrix Z_DS; // K x M
        CMatrix Z_DR; // K x N
        CMatrix Z_RS; // N x M
        CMatrix Z_R;  // N x N
        double R = 50.0;

        Index n_elements() const { return Z_R.rows(); }
        Index n_rx() const { return Z_DS.rows(); }
        Index n_tx() const { return Z_DS.cols(); }

        /// Throws std::invalid_argument when block dimensions disagree or R <= 0.
        void validate() const;
    };

    /// Geometry and physics of a line-of-sight SISO link over a uniform linear RIS.
    struct Scenario
    {
        Index N = 1;
        Index M = 1;
        Index K = 1;
        double spacing = 0.5;  // d / lambda
        double alpha_tx = 0.0; // radians
        double alpha_rx = 0.0; // radians
        double gamma_dr = 1.0;
        double gamma_rs = 1.0;
        double gamma_loss = 0.0; // R_d / R
        double R = 50.0;

        void validate() const;
    };

    /// Real reactances of a lossless single-connected RIS (ohms).
    struct RisState
    {
        RVector x;

        static RisState zeros(Index N) { return {RVector::Zero(N)}; }
        Index size() const { return x.size(); }
    };

    /// Reject loading matrices whose 1-norm condition estimate exceeds this.
    inline constexpr double max_loading_condition = 1e14;

    /// Relative floor under which eigenvalues are pseudo-inverted to zero.
    inline constexpr double psd_floor_relative = 1e-12;

    /// Negative eigenvalues down to -psd_symmetric_tolerance * max(1, lambda_max) count as roundoff.
    inline constexpr double psd_symmetric_tolerance = 1e-10;

    /// Mutual impedance matrix of N isotropic radiators spaced `spacing` wavelengths apart.
    /// Diagonal entries equal R; off-diagonals are R (sin u + j cos u) / u with u = 2 pi spacing |i-j|.
    CMatrix build_coupling_matrix(Index N, double spacing, double R);

    /// ULA response a_n(alpha) = exp(-j (n-1) 2 pi spacing cos(alpha)).
    CVector steering_vector(Index N, double spacing, double alpha);

    /// LOS SISO link: z_DS = 0, z_DR = sqrt(gamma_dr) R a(alpha_rx)^T, z_RS = sqrt(gamma_rs) R a(alpha_tx).
    /// Ohmic losses add R * gamma_loss to the diagonal of Z_R.
    ImpedanceChannel build_los_scenario(const Scenario &s);

    /// Channel gain of one lossless RIS element in the LOS scenario: gamma_dr * gamma_rs * R^2.
    /// Array gains in this library are channel gains divided by this value.
    double single_element_gain(const Scenario &s);

    /// Z for the diagonal load j diag(x). Throws NumericallySingular above max_loading_condition.
    CMatrix evaluate_channel(const ImpedanceChannel &ch, const RisState &state);

    /// Z for an arbitrary (possibly non-diagonal) N x N load matrix Z_N.
    CMatrix evaluate_channel_with_load(const ImpedanceChannel &ch, const CMatrix &Z_N);

    /// Voltage transfer D = Z / (4R).
    CMatrix voltage_transfer(const CMatrix &Z, double R);

    /// |z|^2 for SISO, squared Frobenius norm otherwise.
    double channel_gain(const CMatrix &Z);

    /// log2 det(I + Z Z^H) in bit/s/Hz.
    double spectral_efficiency(const CMatrix &Z);

    /// Symmetric PSD square root via spectral decomposition. Throws NotPositiveSemidefinite.
    RMatrix psd_sqrt(const RMatrix &S);

    struct InverseSqrt
    {
        RMatrix value;
        Index floored = 0; // eigenvalues pseudo-inverted to zero
    };

    /// Symmetric (pseudo-)inverse square root; eigenvalues below psd_floor_relative * lambda_max map to 0.
    InverseSqrt psd_inv_sqrt(const RMatrix &S);
}
