// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "catch_amalgamated.hpp"
#include "oracles.hpp"

#include "riscouple/baselines.hpp"
#include "riscouple/decoupling.hpp"

using namespace riscouple;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

namespace
{
    RVector nonzero_state(std::mt19937_64 &rng, Index N)
    {
        std::uniform_real_distribution<double> mag(5.0, 300.0);
        std::bernoulli_distribution sign;
        RVector x(N);
        for (Index n = 0; n < N; ++n)
            x(n) = sign(rng) ? mag(rng) : -mag(rng);
        return x;
    }

    Scenario los(Index N, double spacing, double alpha_tx, double alpha_rx, double gamma_loss = 0.0)
    {
        Scenario s;
        s.N = N;
        s.spacing = spacing;
        s.alpha_tx = alpha_tx;
        s.alpha_rx = alpha_rx;
        s.gamma_loss = gamma_loss;
        return s;
    }
}

TEST_CASE("power_matching_network - blocks")
{
    const CMatrix I = CMatrix::Identity(3, 3);
    const DecouplingNetwork plain = power_matching_network(50.0 * I, 50.0);
    CHECK((plain.Z11).norm() == 0.0);
    CHECK((plain.Z12 + j_unit * 50.0 * I).norm() < 1e-12);
    CHECK(plain.Z22.norm() == 0.0);

    const DecouplingNetwork net = power_matching_network(build_coupling_matrix(4, 0.25, 50.0), 50.0);
    const CMatrix full = net.full();
    CHECK(full.rows() == 8);
    CHECK((full - full.transpose()).norm() < 1e-12);
    CHECK(full.real().norm() < 1e-12);
    CHECK((net.Z12 - net.Z12.transpose()).norm() < 1e-12);

    RMatrix bad = RMatrix::Identity(2, 2);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(power_matching_network(bad.cast<Complex>(), 50.0), NotPositiveSemidefinite);
}

TEST_CASE("transformed_load - examples")
{
    const DecouplingNetwork plain = power_matching_network(50.0 * CMatrix::Identity(3, 3), 50.0);
    const CMatrix ZN = transformed_load(plain, {RVector::Constant(3, 50.0)});
    CHECK((ZN + j_unit * 50.0 * CMatrix::Identity(3, 3)).norm() < 1e-12);

    std::mt19937_64 rng(30);
    const DecouplingNetwork net = power_matching_network(build_coupling_matrix(5, 0.19, 50.0), 50.0);
    const CMatrix Zp = transformed_load(net, {nonzero_state(rng, 5)});
    CHECK((Zp - Zp.transpose()).norm() < 1e-9 * Zp.norm());
    CHECK(Zp.real().norm() < 1e-9 * Zp.norm());

    RVector with_zero = RVector::Constant(3, 10.0);
    with_zero(1) = 0.0;
    try
    {
        transformed_load(plain, {with_zero});
        FAIL("expected SingularLoad");
    }
    catch (const SingularLoad &e)
    {
        CHECK(e.element() == 1);
    }
}

TEST_CASE("reactance_transform")
{
    RVector x(3);
    x << 50.0, -50.0, 1e12;
    const RVector xp = reactance_transform(x, 50.0);
    CHECK(xp(0) == -50.0);
    CHECK(xp(1) == 50.0);
    CHECK(std::abs(xp(2)) < 1e-8);

    std::mt19937_64 rng(31);
    const RVector y = nonzero_state(rng, 6);
    CHECK((reactance_transform(reactance_transform(y, 50.0), 50.0) - y).norm() < 1e-12 * y.norm());

    x(1) = 0.0;
    CHECK_THROWS_AS(reactance_transform(x, 50.0), SingularLoad);
}

TEST_CASE("effective_channel - uncoupled real part leaves the channel unchanged")
{
    std::mt19937_64 rng(32);
    ImpedanceChannel ch = oracle::random_channel(rng, 4, 1, 1, 0.5);
    for (const CMatrix &Z_R : {CMatrix(50.0 * CMatrix::Identity(4, 4)), build_coupling_matrix(4, 0.5, 50.0)})
    {
        ch.Z_R = Z_R;
        const EffectiveChannel eff = effective_channel(ch);
        CHECK(oracle::rel_err(eff.Z_DR_eff, ch.Z_DR) < 1e-12);
        CHECK(oracle::rel_err(eff.Z_RS_eff, ch.Z_RS) < 1e-12);
        CHECK(eff.floored == 0);
    }
}

TEST_CASE("effective_channel - dual path through the explicit network")
{
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> sp(0.1, 0.9);
    for (int trial = 0; trial < 25; ++trial)
    {
        const Index N = 1 + trial % 8;
        double d = sp(rng);
        while (coupling_condition(N, d) > 1e6)
            d = sp(rng);
        const ImpedanceChannel ch = oracle::random_channel(rng, N, 1 + trial % 2, 1 + trial % 3, d);
        const RVector x = nonzero_state(rng, N);

        const CMatrix via_network = evaluate_channel_with_load(ch, transformed_load(power_matching_network(ch.Z_R, ch.R), {x}));
        const CMatrix via_effective = evaluate_effective(effective_channel(ch), reactance_transform(x, ch.R));
        CHECK(oracle::rel_err(via_network, via_effective) < 1e-9);
    }
}

TEST_CASE("effective model - reactance and phase forms agree")
{
    std::mt19937_64 rng(34);
    const EffectiveChannel eff = effective_channel(oracle::random_channel(rng, 4, 2, 2, 0.25));
    const RVector x = nonzero_state(rng, 4);
    CVector theta(4);
    for (Index n = 0; n < 4; ++n)
        theta(n) = reactance_to_reflection(x(n), eff.R);
    CHECK(oracle::rel_err(evaluate_effective_phases(eff, theta), evaluate_effective(eff, x)) < 1e-12);
}

TEST_CASE("reflection and reactance conversions")
{
    CHECK(std::abs(reactance_to_reflection(0.0, 50.0) - Complex(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(reactance_to_reflection(50.0, 50.0) - Complex(0.0, 1.0)) < 1e-15);
    CHECK(reflection_to_reactance(Complex(-1.0, 0.0), 50.0) == 0.0);
    CHECK(reflection_to_reactance(Complex(1.0, 0.0), 50.0, 1e7) == 1e7);
    CHECK(reflection_to_reactance(Complex(0.0, 1.0), 50.0) == Approx(50.0));

    for (double x : {-400.0, -3.0, 0.5, 20.0, 1e4})
        CHECK(reflection_to_reactance(reactance_to_reflection(x, 50.0), 50.0) == Approx(x).epsilon(1e-9));
}

TEST_CASE("closed_form_siso - examples")
{
    const double R = 50.0;
    EffectiveChannel eff;
    eff.R = R;
    eff.Z_DS = CMatrix::Zero(1, 1);
    eff.Z_DR_eff = CMatrix::Constant(1, 1, 2.0 * R);
    eff.Z_RS_eff = CMatrix::Constant(1, 1, 3.0 * R);
    const ClosedFormSolution sol = closed_form_siso(eff);
    CHECK(sol.gain == Approx(36.0 * R * R));
    CHECK(std::abs(evaluate_effective_phases(eff, sol.theta)(0, 0)) == Approx(6.0 * R));

    EffectiveChannel dead = eff;
    dead.Z_DR_eff.setZero();
    CHECK(closed_form_siso(dead).gain == 0.0);
    CHECK(std::abs(closed_form_siso(dead).theta(0) - Complex(-1.0, 0.0)) < 1e-15);

    EffectiveChannel mimo = eff;
    mimo.Z_DS = CMatrix::Zero(2, 1);
    CHECK_THROWS_AS(closed_form_siso(mimo), UnsupportedConfiguration);
}

TEST_CASE("closed_form_siso - attained gain and reactance recovery")
{
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Index N = 1 + trial % 6;
        const EffectiveChannel eff = effective_channel(oracle::random_channel(rng, N, 1, 1, 0.21 + 0.01 * trial));
        const ClosedFormSolution sol = closed_form_siso(eff);
        CHECK(channel_gain(evaluate_effective_phases(eff, sol.theta)) == Approx(sol.gain).epsilon(1e-10));
        for (Index n = 0; n < N; ++n)
            CHECK(std::abs(reactance_to_reflection(sol.x_eff(n), eff.R) - sol.theta(n)) < 1e-6);
    }
}

TEST_CASE("closed_form_siso - dominates an exhaustive phase grid")
{
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 4; ++trial)
    {
        const EffectiveChannel eff = effective_channel(oracle::random_channel(rng, 3, 1, 1, 0.3));
        const double grid = grid_search_phase(eff, 72, 1).gain;
        const double closed = closed_form_siso(eff).gain;
        CHECK(closed >= grid * (1.0 - 1e-12));
        CHECK(grid >= 0.95 * closed);
    }
}

TEST_CASE("array_gain - uncoupled anchors")
{
    for (Index N : {1, 2, 4, 8, 16})
    {
        const double N2 = double(N * N);
        CHECK(array_gain(los(N, 0.5, pi / 2, pi / 2)) == Approx(N2).epsilon(1e-9));
        CHECK(array_gain(los(N, 0.5, 0.0, pi)) == Approx(N2).epsilon(1e-9));
        CHECK(front_fire_gain(N, 0.5) == Approx(N2).epsilon(1e-9));
        CHECK(end_fire_gain(N, 0.5) == Approx(N2).epsilon(1e-9));
        CHECK(end_fire_gain(N, 0.5, 1.0) == Approx(N2 / 4.0).epsilon(1e-9));
    }
}

TEST_CASE("array_gain - specialized forms agree with the general expression")
{
    for (Index N = 1; N <= 16; N += 3)
        for (double d : {0.05, 0.1, 0.17, 0.25, 0.4, 0.5, 0.75, 1.0})
        {
            CHECK(array_gain(los(N, d, pi / 2, pi / 2)) == Approx(front_fire_gain(N, d)).epsilon(1e-9));
            CHECK(array_gain(los(N, d, 0.0, pi)) == Approx(end_fire_gain(N, d)).epsilon(1e-9));
        }
}

TEST_CASE("array_gain - frozen high-precision values")
{
    // tests/oracles/array_gain_mp.py
    CHECK(end_fire_gain(4, 0.25) == Approx(163.08229291828144069).epsilon(1e-6));
    CHECK(end_fire_gain(4, 0.1) == Approx(240.12914915940158313).epsilon(1e-6));
    CHECK(end_fire_gain(4, 0.05) == Approx(252.00005871944884828).epsilon(1e-6));
}

TEST_CASE("array_gain - losses reduce the gain")
{
    CHECK(lossy_coupling(RMatrix::Identity(3, 3), 0.0) == RMatrix::Identity(3, 3));
    CHECK(lossy_coupling(RMatrix::Identity(3, 3), 1.0) == 2.0 * RMatrix::Identity(3, 3));
    CHECK_THROWS_AS(lossy_coupling(RMatrix::Identity(3, 3), -0.5), std::invalid_argument);

    for (Index N : {2, 4, 8})
        for (double d : {0.1, 0.25, 0.5})
        {
            double previous = INFINITY;
            for (double gamma : {0.0, 0.01, 0.1, 1.0})
            {
                const double A = array_gain(los(N, d, 0.0, pi, gamma));
                CHECK(A < previous);
                previous = A;
            }
        }
}

TEST_CASE("coupling_condition")
{
    CHECK(coupling_condition(8, 0.5) == Approx(1.0).epsilon(1e-12));
    CHECK(coupling_condition(1, 0.1) == 1.0);
    CHECK(coupling_condition(4, 0.1) > coupling_condition(4, 0.25));
    CHECK(coupling_condition(8, 0.1) > 1e10);
}

TEST_CASE("array_gain - spacing guard")
{
    CHECK_THROWS_AS(end_fire_gain(4, 0.01), SpacingBelowGuard);
    CHECK_THROWS_AS(array_gain(los(4, 0.01, 0.0, pi)), SpacingBelowGuard);
    CHECK(std::isfinite(end_fire_gain(4, 0.01, 0.0, {.allow_small_spacing = true})));
    CHECK_THROWS_AS(end_fire_gain(4, 0.0, 0.0, {.allow_small_spacing = true}), std::invalid_argument);
}

TEST_CASE("array_gain - decoupled closed form equals the general formula")
{
    for (Index N : {1, 3, 6})
        for (double d : {0.1, 0.3, 0.5})
            for (double alpha_tx : {0.0, 0.7, pi / 2})
            {
                const Scenario s = los(N, d, alpha_tx, 2.1, 0.05);
                CHECK(decoupled_gain(s) == Approx(array_gain(s)).epsilon(1e-9));
            }
}
