// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
//
// Reference implementations and comparison methods.

#pragma once

#include "riscouple/decoupling.hpp"
#include "riscouple/elementwise.hpp"

#include <optional>
#include <string_view>

namespace riscouple
{
    enum class MethodId
    {
        Decoupled,
        ElementWise,
        ElementWiseNaive,
        NoCoupling,
        IgnoreMC,
        GridOracle
    };

    std::string_view method_name(MethodId m);
    std::optional<MethodId> parse_method(std::string_view name);
    bool is_iterative(MethodId m);

    /// Same contract as optimize() but re-inverts Z_R + j diag(x) densely before every element
    /// update and evaluates the objective from scratch: O(N^4) per sweep.
    OptimizeResult naive_elementwise(const ImpedanceChannel &ch, const RisState &x0, const OptimizerConfig &cfg);

    inline constexpr Index max_grid_elements = 3;

    struct GridResult
    {
        double gain = 0.0;
        CVector theta;
    };

    /// Exhaustive maximum of |z'|^2 over theta_n = exp(j 2 pi k / points), k = 0..points-1.
    /// Ties resolve to the lowest linear grid index. threads = 0 picks the hardware concurrency.
    GridResult grid_search_phase(const EffectiveChannel &eff, int points_per_element, unsigned threads = 0);

    /// Decoupled: closed-form phase alignment on the whitened LOS channel, normalized.
    double decoupled_gain(const Scenario &s, ArrayGainOptions opt = {});

    /// NoCoupling: Z_R replaced by R (1 + gamma_loss) I, closed-form phase alignment, normalized.
    double no_coupling_gain(const Scenario &s);

    /// IgnoreMC: x = 0 (theta = -1 everywhere) evaluated in the coupled model, normalized.
    double ignore_mc_gain(const Scenario &s);
}
