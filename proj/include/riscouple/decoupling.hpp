// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
//
// Lossless reciprocal power-matching network between the RIS array and its loads.
//
//   Z_DeN = -j [ 0                    sqrt(R) Re(Z_R)^1/2 ]
//              [ sqrt(R) Re(Z_R)^1/2  Im(Z_R)             ]
//
// With this network the loading seen by the array becomes
// Re(Z_R)^1/2 (I R + j diag(x')) Re(Z_R)^1/2 / R with x'_n = -R^2 / x_n, so the
// coupled link behaves like an uncoupled one with whitened channels
//
//   Z_DR' = Z_DR Re(Z_R)^-1/2 sqrt(R),   Z_RS' = sqrt(R) Re(Z_R)^-1/2 Z_RS.

#pragma once

#include "riscouple/channel_model.hpp"

namespace riscouple
{
    /// 2N-port network [[Z11, Z12], [Z12^T, Z22]] (ohms).
    struct DecouplingNetwork
    {
        CMatrix Z11;
        CMatrix Z12;
        CMatrix Z22;

        Index size() const { return Z11.rows(); }
        CMatrix full() const;
    };

    struct EffectiveChannel
    {
        CMatrix Z_DS;     // K x M
        CMatrix Z_DR_eff; // K x N
        CMatrix Z_RS_eff; // N x M
        double R = 50.0;
        Index floored = 0; // eigenvalues of Re(Z_R) pseudo-inverted to zero

        Index n_elements() const { return Z_RS_eff.rows(); }
    };

    DecouplingNetwork power_matching_network(const CMatrix &Z_R, double R);

    /// Z_N' = Z22 - Z12^T (Z11 + j diag(x))^-1 Z12. Throws SingularLoad when Z11 + j diag(x) is singular.
    CMatrix transformed_load(const DecouplingNetwork &net, const RisState &state);

    /// x'_n = -R^2 / x_n. Throws SingularLoad on a zero entry.
    RVector reactance_transform(const RVector &x, double R);

    EffectiveChannel effective_channel(const ImpedanceChannel &ch);

    /// Z' = Z_DS - Z_DR' (I R + j diag(x'))^-1 Z_RS'.
    CMatrix evaluate_effective(const EffectiveChannel &eff, const RVector &x_eff);

    /// Z' = Z_DS + Z_DR' (Theta' - I) Z_RS' / (2R) for unit-modulus Theta'.
    CMatrix evaluate_effective_phases(const EffectiveChannel &eff, const CVector &theta);

    /// theta = (j x - R) / (j x + R)
    Complex reactance_to_reflection(double x, double R);

    /// x = R cot(arg(theta)/2); theta = -1 gives 0, theta = +1 gives x_max.
    double reflection_to_reactance(Complex theta, double R, double x_max = 1e9);

    struct ClosedFormSolution
    {
        double gain = 0.0; // |z'|^2
        CVector theta;     // unit-modulus reflection coefficients
        RVector x_eff;     // effective load reactances x'
    };

    /// Phase alignment on the effective SISO channel; globally optimal.
    ClosedFormSolution closed_form_siso(const EffectiveChannel &eff);

    /// C_R + gamma I
    RMatrix lossy_coupling(const RMatrix &C_R, double gamma);

    /// Specialized gains refuse spacing below this unless overridden.
    inline constexpr double min_guarded_spacing = 0.02;

    struct ArrayGainOptions
    {
        bool allow_small_spacing = false;
    };

    /// Normalized Decoupled array gain
    ///   A = 1/4 (|a_DR^T C^-1 a_RS| + sum_n |a_DR^T C^-1/2 e_n| |e_n^T C^-1/2 a_RS|)^2
    /// with C = Re(Z_R)/R + gamma_loss I.
    double array_gain(const Scenario &s, ArrayGainOptions opt = {});

    /// (1^T C^-1 1)^2
    double front_fire_gain(Index N, double spacing, double gamma_loss = 0.0, ArrayGainOptions opt = {});

    /// (a0^H C^-1 a0)^2 with a0 = a(0)
    double end_fire_gain(Index N, double spacing, double gamma_loss = 0.0, ArrayGainOptions opt = {});

    /// Normalized coupling C = Re(Z_R)/R for N isotropic elements.
    RMatrix normalized_coupling(Index N, double spacing);

    /// lambda_max / lambda_min of normalized_coupling; inf when singular.
    /// Whitened quantities lose about log10 of this many digits.
    double coupling_condition(Index N, double spacing);
}
