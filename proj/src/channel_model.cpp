// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "riscouple/channel_model.hpp"

#include <cmath>
#include <numbers>

namespace riscouple
{
    void ImpedanceChannel::validate() const
    {
        if (!(R > 0.0) || !std::isfinite(R))
            throw std::invalid_argument("ImpedanceChannel: reference resistance must be positive");
        const Index N = Z_R.rows(), K = Z_DS.rows(), M = Z_DS.cols();
        if (N == 0 || Z_R.cols() != N)
            throw std::invalid_argument("ImpedanceChannel: Z_R must be square and non-empty");
        if (Z_DR.rows() != K || Z_DR.cols() != N)
            throw std::invalid_argument("ImpedanceChannel: Z_DR must be K x N");
        if (Z_RS.rows() != N || Z_RS.cols() != M)
            throw std::invalid_argument("ImpedanceChannel: Z_RS must be N x M");
    }

    void Scenario::validate() const
    {
        if (N < 1 || M < 1 || K < 1)
            throw std::invalid_argument("Scenario: N, M and K must be positive");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("Scenario: spacing must be positive");
        if (!std::isfinite(alpha_tx) || !std::isfinite(alpha_rx))
            throw std::invalid_argument("Scenario: angles must be finite");
        if (!(gamma_dr >= 0.0) || !(gamma_rs >= 0.0) || !(gamma_loss >= 0.0))
            throw std::invalid_argument("Scenario: pathloss and loss factors must be nonnegative");
        if (!(R > 0.0) || !std::isfinite(R))
            throw std::invalid_argument("Scenario: R must be positive");
    }

    CMatrix build_coupling_matrix(Index N, double spacing, double R)
    {
        if (N < 1)
            throw std::invalid_argument("build_coupling_matrix: N must be positive");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("build_coupling_matrix: spacing must be positive");
        if (!(R > 0.0) || !std::isfinite(R))
            throw std::invalid_argument("build_coupling_matrix: R must be positive");

        // Entries depend on |i-j| only; tabulate once.
        CVector row(N);
        row(0) = Complex(R, 0.0);
        for (Index m = 1; m < N; ++m)
        {
            const double u = 2.0 * std::numbers::pi * spacing * double(m);
            row(m) = Complex(R * std::sin(u) / u, R * std::cos(u) / u);
        }

        CMatrix Z(N, N);
        for (Index j = 0; j < N; ++j)
            for (Index i = 0; i < N; ++i)
                Z(i, j) = row(i > j ? i - j : j - i);
        return Z;
    }

    CVector steering_vector(Index N, double spacing, double alpha)
    {
        if (N < 1)
            throw std::invalid_argument("steering_vector: N must be positive");
        CVector a(N);
        a(0) = Complex(1.0, 0.0);
        const double phase_step = 2.0 * std::numbers::pi * spacing * std::cos(alpha);
        for (Index n = 1; n < N; ++n)
            a(n) = std::polar(1.0, -double(n) * phase_step);
        return a;
    }

    ImpedanceChannel build_los_scenario(const Scenario &s)
    {
        s.validate();
        if (s.M != 1 || s.K != 1)
            throw UnsupportedConfiguration("build_los_scenario: only SISO (M = K = 1) links are supported");

        ImpedanceChannel ch;
        ch.R = s.R;
        ch.Z_DS = CMatrix::Zero(1, 1);
        ch.Z_DR = (std::sqrt(s.gamma_dr) * s.R) * steering_vector(s.N, s.spacing, s.alpha_rx).transpose();
        ch.Z_RS = (std::sqrt(s.gamma_rs) * s.R) * steering_vector(s.N, s.spacing, s.alpha_tx);
        ch.Z_R = build_coupling_matrix(s.N, s.spacing, s.R);
        if (s.gamma_loss > 0.0)
            ch.Z_R.diagonal().array() += Complex(s.R * s.gamma_loss, 0.0);
        return ch;
    }

    double single_element_gain(const Scenario &s)
    {
        return s.gamma_dr * s.gamma_rs * s.R * s.R;
    }

    CMatrix evaluate_channel_with_load(const ImpedanceChannel &ch, const CMatrix &Z_N)
    {
        ch.validate();
        if (Z_N.rows() != ch.n_elements() || Z_N.cols() != ch.n_elements())
            throw std::invalid_argument("evaluate_channel: load matrix must be N x N");

        const Eigen::PartialPivLU<CMatrix> lu(ch.Z_R + Z_N);
        const double rcond = lu.rcond();
        if (!(rcond > 0.0) || 1.0 / rcond > max_loading_condition)
            throw NumericallySingular("evaluate_channel: loading matrix Z_R + Z_N is singular", rcond > 0.0 ? 1.0 / rcond : INFINITY);

        return ch.Z_DS - ch.Z_DR * lu.solve(ch.Z_RS);
    }

    CMatrix evaluate_channel(const ImpedanceChannel &ch, const RisState &state)
    {
        if (state.size() != ch.n_elements())
            throw std::invalid_argument("evaluate_channel: state length must equal N");
        CMatrix Z_N = CMatrix::Zero(state.size(), state.size());
        Z_N.diagonal() = j_unit * state.x.cast<Complex>();
        return evaluate_channel_with_load(ch, Z_N);
    }

    CMatrix voltage_transfer(const CMatrix &Z, double R)
    {
        return Z / (4.0 * R);
    }

    double channel_gain(const CMatrix &Z)
    {
        return Z.squaredNorm();
    }

    double spectral_efficiency(const CMatrix &Z)
    {
        const CMatrix G = CMatrix::Identity(Z.rows(), Z.rows()) + Z * Z.adjoint();
        const Eigen::LLT<CMatrix> llt(G);
        double log_det = 0.0;
        for (Index i = 0; i < G.rows(); ++i)
            log_det += 2.0 * std::log2(llt.matrixLLT()(i, i).real());
        return log_det;
    }

    namespace
    {
        Eigen::SelfAdjointEigenSolver<RMatrix> checked_eigen(const RMatrix &S, const char *who)
        {
            if (S.rows() != S.cols())
                throw std::invalid_argument(std::string(who) + ": matrix must be square");
            Eigen::SelfAdjointEigenSolver<RMatrix> es(S);
            if (es.info() != Eigen::Success)
                throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
            const double lambda_min = es.eigenvalues().minCoeff();
            const double lambda_max = es.eigenvalues().maxCoeff();
            if (lambda_min < -psd_symmetric_tolerance * std::max(1.0, std::abs(lambda_max)))
                throw NotPositiveSemidefinite(std::string(who) + ": matrix is not positive semidefinite (min eigenvalue " +
                                                  std::to_string(lambda_min) + ")",
                                              lambda_min);
            return es;
        }
    }

    RMatrix psd_sqrt(const RMatrix &S)
    {
        const auto es = checked_eigen(S, "psd_sqrt");
        const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    }

    InverseSqrt psd_inv_sqrt(const RMatrix &S)
    {
        const auto es = checked_eigen(S, "psd_inv_sqrt");
        const RVector &lambda = es.eigenvalues();
        const double floor = psd_floor_relative * std::max(0.0, lambda.maxCoeff());

        InverseSqrt out;
        RVector inv_root(lambda.size());
        for (Index i = 0; i < lambda.size(); ++i)
        {
            if (lambda(i) > floor && lambda(i) > 0.0)
                inv_root(i) = 1.0 / std::sqrt(lambda(i));
            else
            {
                inv_root(i) = 0.0;
                ++out.floored;
            }
        }
        out.value = es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
        return out;
    }
}
