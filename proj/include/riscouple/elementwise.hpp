// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
//
// Mutual-coupling aware element-wise optimizer.
//
// One reactance x_n is changed at a time. With the cached inverse
// Zinv = (Z_R + j diag(x))^-1 the channel after x_n -> x_n + dx is
//
//   Z = Zbar + a b'^H * j dx / (1 + j dx g)
//     = Z0 + a b^H theta,          |theta| = 1,
//
// so the best dx follows in closed form from the best unit-modulus theta and
// the cache is refreshed with a rank-one (matrix inversion lemma) update:
// O(N^2) per element, O(N^3) per sweep.

#pragma once

#include "riscouple/channel_model.hpp"

#include <vector>

namespace riscouple
{
    enum class Objective
    {
        siso_gain,
        spectral_efficiency
    };

    struct OptimizerConfig
    {
        int max_sweeps = 500;
        double tol = 1e-10;      // relative objective change per sweep
        int refactor_every = 10; // sweeps between dense re-inversions
        Objective objective = Objective::siso_gain;
        double x_max = 1e9;           // reactance clamp when dx diverges (ohms)
        double objective_scale = 1.0; // trace values are objective / objective_scale

        void validate() const;
    };

    /// Per-element quantities a, b', b, g and Z0 for element n.
    struct ElementParams
    {
        Index n = 0;
        CVector a;       // Z_DR Zinv e_n                       (K)
        CVector b_prime; // (e_n^T Zinv Z_RS)^H                 (M)
        CVector b;       // b_prime / (2 Re g)                  (M)
        Complex g;       // e_n^T Zinv e_n
        CMatrix Z0;      // Zbar + a b^H
    };

    /// Computes element parameters from a given loading inverse and current channel.
    /// Throws ChangeOfVariablesUndefined when Re(g) <= 0.
    ElementParams compute_element_params(const CMatrix &loading_inverse, const CMatrix &Zbar,
                                         const ImpedanceChannel &ch, Index n);

    /// Channel for a given theta: Z0 + a b^H theta.
    CMatrix channel_for_theta(const ElementParams &p, Complex theta);

    struct ThetaChoice
    {
        Complex theta{1.0, 0.0};
        double value = 0.0;     // |z| for SISO, spectral efficiency for SE
        bool no_effect = false; // objective does not depend on theta
    };

    /// argmax |z0 + a conj(b) theta|; value is the attained |z| = |z0| + |a||b|.
    ThetaChoice optimal_theta_siso(Complex z0, Complex a, Complex b);

    /// theta = c12/|c12| with C = F^H A^-1 F; value = log2 det A + log2(1 + c11 + c22 + 2|c12|).
    ThetaChoice optimal_theta_se(const CMatrix &A, const CMatrix &F);

    /// A = I + Z0 (I - b b^H/|b|^2) Z0^H and F = [a |b|, Z0 b/|b|] for the SE objective.
    struct GramTerms
    {
        CMatrix A;
        CMatrix F;
    };
    GramTerms gram_terms(const ElementParams &p);

    struct DeltaX
    {
        double dx = 0.0;
        bool saturated = false;
    };

    /// Inverse of the phase substitution: dx = 1 / (Re(g) tan(arg(theta)/2) + Im(g)).
    /// theta = -1 gives exactly 0; a vanishing denominator clamps to +-x_max.
    DeltaX theta_to_delta_x(Complex theta, Complex g, double x_max = 1e9);

    /// Forward substitution: theta = 2 Re(g) j dx / (1 + j dx g) - 1.
    Complex delta_x_to_theta(double dx, Complex g);

    /// Closed-form choice for one element: the maximizing dx given all other reactances.
    struct ElementStep
    {
        double dx = 0.0;
        Complex theta{-1.0, 0.0};
        bool saturated = false;
        bool no_effect = false;
    };
    ElementStep choose_element_update(const ElementParams &p, const OptimizerConfig &cfg);

    double objective_value(const CMatrix &Z, Objective objective);

    /// Cached (Z_R + j diag(x))^-1 and Zbar, maintained by rank-one updates.
    class RankOneContext
    {
    public:
        RankOneContext(ImpedanceChannel ch, RisState state);

        const ImpedanceChannel &channel() const { return ch_; }
        const RisState &state() const { return state_; }
        const CMatrix &loading_inverse() const { return inverse_; }
        const CMatrix &current_channel() const { return Zbar_; }

        ElementParams element_params(Index n) const;

        /// x_n += dx with an O(N^2) inverse refresh. Throws DegenerateUpdate when |1 + j dx g| < 1e-14.
        void apply_update(Index n, double dx);

        /// Dense re-inversion of the loading matrix and recomputation of Zbar.
        void refactor();

        /// max |Zinv (Z_R + j diag x) - I|.
        double inverse_residual() const;

    private:
        ImpedanceChannel ch_;
        RisState state_;
        CMatrix inverse_;
        CMatrix Zbar_;
    };

    inline RankOneContext init_context(const ImpedanceChannel &ch, const RisState &state)
    {
        return RankOneContext(ch, state);
    }

    struct OptimizeResult
    {
        RisState state;
        std::vector<double> trace;           // objective before any update, then after each element update
        std::vector<double> sweep_objective; // objective before the first sweep, then after each sweep
        std::vector<double> sweep_seconds;   // wall time of each sweep
        int sweeps = 0;
        bool converged = false;
        Index saturations = 0;
    };

    /// Sweeps n = 0..N-1 until the relative per-sweep improvement drops below cfg.tol.
    OptimizeResult optimize(const ImpedanceChannel &ch, const RisState &x0, const OptimizerConfig &cfg);
}
