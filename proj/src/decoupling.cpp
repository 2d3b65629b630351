// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "riscouple/decoupling.hpp"

#include <cmath>
#include <numbers>

namespace riscouple
{
    CMatrix DecouplingNetwork::full() const
    {
        const Index N = size();
        CMatrix Z(2 * N, 2 * N);
        Z.topLeftCorner(N, N) = Z11;
        Z.topRightCorner(N, N) = Z12;
        Z.bottomLeftCorner(N, N) = Z12.transpose();
        Z.bottomRightCorner(N, N) = Z22;
        return Z;
    }

    DecouplingNetwork power_matching_network(const CMatrix &Z_R, double R)
    {
        if (Z_R.rows() != Z_R.cols() || Z_R.rows() == 0)
            throw std::invalid_argument("power_matching_network: Z_R must be square and non-empty");
        if (!(R > 0.0))
            throw std::invalid_argument("power_matching_network: R must be positive");

        const Index N = Z_R.rows();
        const RMatrix root = psd_sqrt(Z_R.real());

        DecouplingNetwork net;
        net.Z11 = CMatrix::Zero(N, N);
        net.Z12 = -j_unit * std::sqrt(R) * root.cast<Complex>();
        net.Z22 = -j_unit * Z_R.imag().cast<Complex>();
        return net;
    }

    CMatrix transformed_load(const DecouplingNetwork &net, const RisState &state)
    {
        const Index N = net.size();
        if (state.size() != N)
            throw std::invalid_argument("transformed_load: state length must equal N");

        CMatrix load = net.Z11;
        load.diagonal() += j_unit * state.x.cast<Complex>();

        if (net.Z11.isZero(0.0))
        {
            for (Index n = 0; n < N; ++n)
                if (state.x(n) == 0.0)
                    throw SingularLoad("transformed_load: zero reactance behind an open Z11 block", n);
            const CVector inv = load.diagonal().cwiseInverse();
            return net.Z22 - net.Z12.transpose() * inv.asDiagonal() * net.Z12;
        }

        const Eigen::PartialPivLU<CMatrix> lu(load);
        const double rcond = lu.rcond();
        if (!(rcond > 0.0) || 1.0 / rcond > max_loading_condition)
            throw SingularLoad("transformed_load: Z11 + Z_N is singular", -1);
        return net.Z22 - net.Z12.transpose() * lu.solve(net.Z12);
    }

    RVector reactance_transform(const RVector &x, double R)
    {
        RVector out(x.size());
        for (Index n = 0; n < x.size(); ++n)
        {
            if (x(n) == 0.0)
                throw SingularLoad("reactance_transform: division by zero reactance", n);
            out(n) = -R * R / x(n);
        }
        return out;
    }

    EffectiveChannel effective_channel(const ImpedanceChannel &ch)
    {
        ch.validate();
        const InverseSqrt whitening = psd_inv_sqrt(ch.Z_R.real());
        const CMatrix T = (std::sqrt(ch.R) * whitening.value).cast<Complex>();

        EffectiveChannel eff;
        eff.Z_DS = ch.Z_DS;
        eff.Z_DR_eff = ch.Z_DR * T;
        eff.Z_RS_eff = T * ch.Z_RS;
        eff.R = ch.R;
        eff.floored = whitening.floored;
        return eff;
    }

    CMatrix evaluate_effective(const EffectiveChannel &eff, const RVector &x_eff)
    {
        if (x_eff.size() != eff.n_elements())
            throw std::invalid_argument("evaluate_effective: state length must equal N");
        CVector load_inv(x_eff.size());
        for (Index n = 0; n < x_eff.size(); ++n)
            load_inv(n) = 1.0 / Complex(eff.R, x_eff(n));
        return eff.Z_DS - eff.Z_DR_eff * load_inv.asDiagonal() * eff.Z_RS_eff;
    }

    CMatrix evaluate_effective_phases(const EffectiveChannel &eff, const CVector &theta)
    {
        if (theta.size() != eff.n_elements())
            throw std::invalid_argument("evaluate_effective_phases: phase vector length must equal N");
        const CVector shifted = theta.array() - 1.0;
        return eff.Z_DS + eff.Z_DR_eff * shifted.asDiagonal() * eff.Z_RS_eff / (2.0 * eff.R);
    }

    Complex reactance_to_reflection(double x, double R)
    {
        return Complex(-R, x) / Complex(R, x);
    }

    double reflection_to_reactance(Complex theta, double R, double x_max)
    {
        const double phi = std::arg(theta);
        if (std::abs(phi) == std::numbers::pi)
            return 0.0;
        const double t = std::tan(0.5 * phi);
        if (!(std::abs(t) * x_max > R))
            return t < 0.0 ? -x_max : x_max;
        return R / t;
    }

    ClosedFormSolution closed_form_siso(const EffectiveChannel &eff)
    {
        if (eff.Z_DS.rows() != 1 || eff.Z_DS.cols() != 1)
            throw UnsupportedConfiguration("closed_form_siso: requires K = M = 1");

        const Index N = eff.n_elements();
        const double half_inv_R = 1.0 / (2.0 * eff.R);

        CVector terms(N);
        for (Index n = 0; n < N; ++n)
            terms(n) = eff.Z_DR_eff(0, n) * eff.Z_RS_eff(n, 0);

        const Complex composite = eff.Z_DS(0, 0) - half_inv_R * terms.sum();
        const double reference = std::arg(composite); // 0 for a vanishing composite term

        ClosedFormSolution sol;
        sol.theta.resize(N);
        sol.x_eff.resize(N);
        double magnitude = std::abs(composite);
        for (Index n = 0; n < N; ++n)
        {
            sol.theta(n) = terms(n) == Complex(0.0) ? Complex(-1.0, 0.0) : std::polar(1.0, reference - std::arg(terms(n)));
            sol.x_eff(n) = reflection_to_reactance(sol.theta(n), eff.R);
            magnitude += half_inv_R * std::abs(terms(n));
        }
        sol.gain = magnitude * magnitude;
        return sol;
    }

    RMatrix lossy_coupling(const RMatrix &C_R, double gamma)
    {
        if (!(gamma >= 0.0))
            throw std::invalid_argument("lossy_coupling: gamma must be nonnegative");
        return C_R + gamma * RMatrix::Identity(C_R.rows(), C_R.cols());
    }

    RMatrix normalized_coupling(Index N, double spacing)
    {
        return build_coupling_matrix(N, spacing, 1.0).real();
    }

    double coupling_condition(Index N, double spacing)
    {
        const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(normalized_coupling(N, spacing), Eigen::EigenvaluesOnly).eigenvalues();
        return ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : INFINITY;
    }

    namespace
    {
        RMatrix guarded_inv_sqrt(Index N, double spacing, double gamma_loss, ArrayGainOptions opt)
        {
            if (!(spacing > 0.0))
                throw std::invalid_argument("array gain: spacing must be positive");
            if (spacing < min_guarded_spacing && !opt.allow_small_spacing)
                throw SpacingBelowGuard("array gain: spacing " + std::to_string(spacing) +
                                        " is below the conditioning guard " + std::to_string(min_guarded_spacing));
            return psd_inv_sqrt(lossy_coupling(normalized_coupling(N, spacing), gamma_loss)).value;
        }
    }

    double array_gain(const Scenario &s, ArrayGainOptions opt)
    {
        s.validate();
        if (s.M != 1 || s.K != 1)
            throw UnsupportedConfiguration("array_gain: requires a SISO scenario");

        const CMatrix T = guarded_inv_sqrt(s.N, s.spacing, s.gamma_loss, opt).cast<Complex>();
        const CVector a_dr = steering_vector(s.N, s.spacing, s.alpha_rx);
        const CVector a_rs = steering_vector(s.N, s.spacing, s.alpha_tx);

        const Eigen::RowVectorXcd left = a_dr.transpose() * T;
        const CVector right = T * a_rs;
        const double coherent = std::abs((left * right).value());
        double aligned = 0.0;
        for (Index n = 0; n < s.N; ++n)
            aligned += std::abs(left(n)) * std::abs(right(n));
        const double sum = coherent + aligned;
        return 0.25 * sum * sum;
    }

    double front_fire_gain(Index N, double spacing, double gamma_loss, ArrayGainOptions opt)
    {
        const RMatrix T = guarded_inv_sqrt(N, spacing, gamma_loss, opt);
        const double q = (T * RVector::Ones(N)).squaredNorm();
        return q * q;
    }

    double end_fire_gain(Index N, double spacing, double gamma_loss, ArrayGainOptions opt)
    {
        const CMatrix T = guarded_inv_sqrt(N, spacing, gamma_loss, opt).cast<Complex>();
        const double q = (T * steering_vector(N, spacing, 0.0)).squaredNorm();
        return q * q;
    }
}
