// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "riscouple/elementwise.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace riscouple
{
    void OptimizerConfig::validate() const
    {
        if (max_sweeps < 1)
            throw std::invalid_argument("OptimizerConfig: max_sweeps must be at least 1");
        if (!(tol >= 0.0))
            throw std::invalid_argument("OptimizerConfig: tol must be nonnegative");
        if (refactor_every < 1)
            throw std::invalid_argument("OptimizerConfig: refactor_every must be at least 1");
        if (!(x_max > 0.0))
            throw std::invalid_argument("OptimizerConfig: x_max must be positive");
        if (!(objective_scale > 0.0) || !std::isfinite(objective_scale))
            throw std::invalid_argument("OptimizerConfig: objective_scale must be positive");
    }

    ElementParams compute_element_params(const CMatrix &loading_inverse, const CMatrix &Zbar,
                                         const ImpedanceChannel &ch, Index n)
    {
        if (n < 0 || n >= loading_inverse.rows())
            throw std::out_of_range("compute_element_params: element index out of range");

        ElementParams p;
        p.n = n;
        p.g = loading_inverse(n, n);
        if (!(p.g.real() > 0.0))
            throw ChangeOfVariablesUndefined(n, p.g.real());

        p.a = ch.Z_DR * loading_inverse.col(n);
        p.b_prime = (loading_inverse.row(n) * ch.Z_RS).adjoint();
        p.b = p.b_prime / (2.0 * p.g.real());
        p.Z0 = Zbar + p.a * p.b.adjoint();
        return p;
    }

    CMatrix channel_for_theta(const ElementParams &p, Complex theta)
    {
        return p.Z0 + theta * (p.a * p.b.adjoint());
    }

    ThetaChoice optimal_theta_siso(Complex z0, Complex a, Complex b)
    {
        ThetaChoice out;
        if (a == Complex(0.0) || b == Complex(0.0))
        {
            out.no_effect = true;
            out.value = std::abs(z0);
            return out;
        }
        // std::arg(0) is 0, so a vanishing z0 selects the zero reference phase.
        const double phi = std::arg(z0) + std::arg(b) - std::arg(a);
        out.theta = std::polar(1.0, phi);
        out.value = std::abs(z0) + std::abs(a) * std::abs(b);
        return out;
    }

    namespace
    {
        struct SeQuadratic
        {
            double log_det_A = 0.0;
            Eigen::Matrix2cd C;
        };

        // log2 det A and C = F^H A^-1 F
        SeQuadratic se_quadratic(const CMatrix &A, const CMatrix &F)
        {
            if (A.rows() != A.cols() || F.rows() != A.rows() || F.cols() != 2)
                throw std::invalid_argument("optimal_theta_se: A must be K x K and F must be K x 2");
            const Eigen::LLT<CMatrix> llt(A);
            if (llt.info() != Eigen::Success)
                throw std::domain_error("optimal_theta_se: A is not positive definite");

            SeQuadratic q;
            for (Index i = 0; i < A.rows(); ++i)
                q.log_det_A += 2.0 * std::log2(llt.matrixLLT()(i, i).real());
            q.C = F.adjoint() * llt.solve(F);
            return q;
        }
    }

    ThetaChoice optimal_theta_se(const CMatrix &A, const CMatrix &F)
    {
        const SeQuadratic q = se_quadratic(A, F);
        const double c11 = q.C(0, 0).real();
        const double c22 = q.C(1, 1).real();
        const Complex c12 = q.C(0, 1);

        ThetaChoice out;
        if (c12 == Complex(0.0))
        {
            out.no_effect = true;
            out.value = q.log_det_A + std::log2(1.0 + c11 + c22);
            return out;
        }
        out.theta = c12 / std::abs(c12);
        out.value = q.log_det_A + std::log2(1.0 + c11 + c22 + 2.0 * std::abs(c12));
        return out;
    }

    GramTerms gram_terms(const ElementParams &p)
    {
        const Index K = p.Z0.rows();
        const double nb = p.b.norm();
        GramTerms t;
        t.F.resize(K, 2);
        if (nb == 0.0)
        {
            t.A = CMatrix::Identity(K, K) + p.Z0 * p.Z0.adjoint();
            t.F.setZero();
            return t;
        }
        const CVector bn = p.b / nb;
        const CMatrix Z0b = p.Z0 * bn;
        t.A = CMatrix::Identity(K, K) + p.Z0 * p.Z0.adjoint() - Z0b * Z0b.adjoint();
        t.F.col(0) = p.a * nb;
        t.F.col(1) = Z0b;
        return t;
    }

    DeltaX theta_to_delta_x(Complex theta, Complex g, double x_max)
    {
        const double phi = std::arg(theta);
        if (std::abs(phi) == std::numbers::pi)
            return {0.0, false};

        const double denom = g.real() * std::tan(0.5 * phi) + g.imag();
        if (!(std::abs(denom) > 1.0 / x_max))
            return {denom < 0.0 ? -x_max : x_max, true};
        return {1.0 / denom, false};
    }

    Complex delta_x_to_theta(double dx, Complex g)
    {
        const Complex t = j_unit * dx / (1.0 + j_unit * dx * g);
        return 2.0 * g.real() * t - 1.0;
    }

    ElementStep choose_element_update(const ElementParams &p, const OptimizerConfig &cfg)
    {
        ElementStep step;
        ThetaChoice choice;
        bool improves = false;

        if (cfg.objective == Objective::siso_gain)
        {
            if (p.Z0.rows() != 1 || p.Z0.cols() != 1)
                throw UnsupportedConfiguration("siso_gain objective requires K = M = 1");
            const Complex z0 = p.Z0(0, 0), a = p.a(0), b = p.b(0);
            choice = optimal_theta_siso(z0, a, b);
            // theta = -1 reproduces the current reactance
            const double current = std::abs(z0 - a * std::conj(b));
            improves = !choice.no_effect && choice.value > current;
        }
        else
        {
            const GramTerms t = gram_terms(p);
            if (p.b.norm() == 0.0)
            {
                step.no_effect = true;
                return step;
            }
            choice = optimal_theta_se(t.A, t.F);
            // theta = -1 contributes -2 Re(c12); the optimum contributes 2 |c12|
            const Complex c12 = se_quadratic(t.A, t.F).C(0, 1);
            improves = !choice.no_effect && std::abs(c12) + c12.real() > 0.0;
        }

        step.no_effect = choice.no_effect;
        if (!improves)
            return step;

        const DeltaX d = theta_to_delta_x(choice.theta, p.g, cfg.x_max);
        step.dx = d.dx;
        step.saturated = d.saturated;
        step.theta = choice.theta;
        return step;
    }

    double objective_value(const CMatrix &Z, Objective objective)
    {
        return objective == Objective::siso_gain ? channel_gain(Z) : spectral_efficiency(Z);
    }

    RankOneContext::RankOneContext(ImpedanceChannel ch, RisState state)
        : ch_(std::move(ch)), state_(std::move(state))
    {
        ch_.validate();
        if (state_.size() != ch_.n_elements())
            throw std::invalid_argument("RankOneContext: state length must equal N");
        if (!state_.x.allFinite())
            throw std::invalid_argument("RankOneContext: reactances must be finite");
        refactor();
    }

    void RankOneContext::refactor()
    {
        CMatrix L = ch_.Z_R;
        L.diagonal() += j_unit * state_.x.cast<Complex>();
        const Eigen::PartialPivLU<CMatrix> lu(L);
        const double rcond = lu.rcond();
        if (!(rcond > 0.0) || 1.0 / rcond > max_loading_condition)
            throw NumericallySingular("RankOneContext: loading matrix is singular", rcond > 0.0 ? 1.0 / rcond : INFINITY);
        inverse_ = lu.inverse();
        Zbar_ = ch_.Z_DS - ch_.Z_DR * inverse_ * ch_.Z_RS;
    }

    ElementParams RankOneContext::element_params(Index n) const
    {
        return compute_element_params(inverse_, Zbar_, ch_, n);
    }

    void RankOneContext::apply_update(Index n, double dx)
    {
        if (n < 0 || n >= inverse_.rows())
            throw std::out_of_range("apply_update: element index out of range");
        if (dx == 0.0)
            return;

        const Complex g = inverse_(n, n);
        const Complex denom = 1.0 + j_unit * dx * g;
        if (std::abs(denom) < 1e-14)
            throw DegenerateUpdate("apply_update: 1 + j dx g vanishes at element " + std::to_string(n));
        const Complex s = j_unit * dx / denom;

        const CVector u = inverse_.col(n);
        const Eigen::RowVectorXcd v = inverse_.row(n);
        const CVector a = ch_.Z_DR * u;
        const Eigen::RowVectorXcd bh = v * ch_.Z_RS;

        inverse_.noalias() -= (s * u) * v;
        Zbar_.noalias() += (s * a) * bh;
        state_.x(n) += dx;
    }

    double RankOneContext::inverse_residual() const
    {
        CMatrix L = ch_.Z_R;
        L.diagonal() += j_unit * state_.x.cast<Complex>();
        return (inverse_ * L - CMatrix::Identity(L.rows(), L.cols())).cwiseAbs().maxCoeff();
    }

    OptimizeResult optimize(const ImpedanceChannel &ch, const RisState &x0, const OptimizerConfig &cfg)
    {
        cfg.validate();
        ch.validate();
        if (cfg.objective == Objective::siso_gain && (ch.n_rx() != 1 || ch.n_tx() != 1))
            throw UnsupportedConfiguration("optimize: siso_gain objective requires K = M = 1");

        RankOneContext ctx(ch, x0);
        const Index N = ch.n_elements();
        auto objective = [&]
        { return objective_value(ctx.current_channel(), cfg.objective) / cfg.objective_scale; };

        OptimizeResult res;
        double current = objective();
        res.trace.reserve(std::size_t(N) * 8 + 1);
        res.trace.push_back(current);
        res.sweep_objective.push_back(current);

        for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const double before = current;

            for (Index n = 0; n < N; ++n)
            {
                const ElementStep step = choose_element_update(ctx.element_params(n), cfg);
                if (step.saturated)
                    ++res.saturations;
                ctx.apply_update(n, step.dx);
                current = objective();
                res.trace.push_back(current);
            }
            if (sweep % cfg.refactor_every == 0)
            {
                ctx.refactor();
                current = objective();
            }

            res.sweep_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            res.sweep_objective.push_back(current);
            res.sweeps = sweep;

            const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
            if ((current - before) / scale < cfg.tol)
            {
                res.converged = true;
                break;
            }
        }

        res.state = ctx.state();
        return res;
    }
}
