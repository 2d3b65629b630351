// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "riscouple/baselines.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

namespace riscouple
{
    namespace
    {
        constexpr std::array<std::pair<MethodId, std::string_view>, 6> method_names{{
            {MethodId::Decoupled, "Decoupled"},
            {MethodId::ElementWise, "ElementWise"},
            {MethodId::ElementWiseNaive, "ElementWiseNaive"},
            {MethodId::NoCoupling, "NoCoupling"},
            {MethodId::IgnoreMC, "IgnoreMC"},
            {MethodId::GridOracle, "GridOracle"},
        }};
    }

    std::string_view method_name(MethodId m)
    {
        for (const auto &[id, name] : method_names)
            if (id == m)
                return name;
        return "Unknown";
    }

    std::optional<MethodId> parse_method(std::string_view name)
    {
        for (const auto &[id, n] : method_names)
            if (n == name)
                return id;
        if (name == "Element-Wise")
            return MethodId::ElementWise;
        return std::nullopt;
    }

    bool is_iterative(MethodId m)
    {
        return m == MethodId::ElementWise || m == MethodId::ElementWiseNaive;
    }

    OptimizeResult naive_elementwise(const ImpedanceChannel &ch, const RisState &x0, const OptimizerConfig &cfg)
    {
        cfg.validate();
        ch.validate();
        if (x0.size() != ch.n_elements())
            throw std::invalid_argument("naive_elementwise: state length must equal N");
        if (cfg.objective == Objective::siso_gain && (ch.n_rx() != 1 || ch.n_tx() != 1))
            throw UnsupportedConfiguration("naive_elementwise: siso_gain objective requires K = M = 1");

        const Index N = ch.n_elements();
        RisState state = x0;
        auto objective = [&]
        { return objective_value(evaluate_channel(ch, state), cfg.objective) / cfg.objective_scale; };

        OptimizeResult res;
        double current = objective();
        res.trace.push_back(current);
        res.sweep_objective.push_back(current);

        for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep)
        {
            const auto t0 = std::chrono::steady_clock::now();
            const double before = current;

            for (Index n = 0; n < N; ++n)
            {
                CMatrix L = ch.Z_R;
                L.diagonal() += j_unit * state.x.cast<Complex>();
                const Eigen::FullPivLU<CMatrix> lu(L);
                if (!lu.isInvertible())
                    throw NumericallySingular("naive_elementwise: loading matrix is singular", INFINITY);
                const CMatrix inverse = lu.inverse();
                const CMatrix Zbar = ch.Z_DS - ch.Z_DR * inverse * ch.Z_RS;

                const ElementStep step = choose_element_update(compute_element_params(inverse, Zbar, ch, n), cfg);
                if (step.saturated)
                    ++res.saturations;
                state.x(n) += step.dx;
                current = objective();
                res.trace.push_back(current);
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
        res.state = state;
        return res;
    }

    GridResult grid_search_phase(const EffectiveChannel &eff, int points_per_element, unsigned threads)
    {
        const Index N = eff.n_elements();
        if (eff.Z_DS.rows() != 1 || eff.Z_DS.cols() != 1)
            throw UnsupportedConfiguration("grid_search_phase: requires K = M = 1");
        if (N > max_grid_elements)
            throw std::invalid_argument("grid_search_phase: exhaustive grid refused for N > " + std::to_string(max_grid_elements));
        if (points_per_element < 1)
            throw std::invalid_argument("grid_search_phase: points_per_element must be positive");

        const double half_inv_R = 1.0 / (2.0 * eff.R);
        const std::size_t P = std::size_t(points_per_element);

        // z' = base + sum_n weight_n theta_n
        Complex base = eff.Z_DS(0, 0);
        std::vector<std::vector<Complex>> contribution(static_cast<std::size_t>(N), std::vector<Complex>(P));
        for (Index n = 0; n < N; ++n)
        {
            const Complex w = half_inv_R * eff.Z_DR_eff(0, n) * eff.Z_RS_eff(n, 0);
            base -= w;
            for (std::size_t k = 0; k < P; ++k)
                contribution[std::size_t(n)][k] = w * std::polar(1.0, 2.0 * std::numbers::pi * double(k) / double(P));
        }

        std::size_t total = 1;
        for (Index n = 0; n < N; ++n)
            total *= P;

        if (threads == 0)
            threads = std::max(1u, std::thread::hardware_concurrency());
        threads = unsigned(std::min<std::size_t>(threads, total));

        struct Best
        {
            double gain = -1.0;
            std::size_t index = 0;
        };
        std::vector<Best> best(threads);

        auto scan = [&](unsigned worker)
        {
            const std::size_t begin = total * worker / threads;
            const std::size_t end = total * (worker + 1) / threads;
            Best local;
            for (std::size_t idx = begin; idx < end; ++idx)
            {
                Complex z = base;
                std::size_t rest = idx;
                for (Index n = 0; n < N; ++n)
                {
                    z += contribution[std::size_t(n)][rest % P];
                    rest /= P;
                }
                const double gain = std::norm(z);
                if (gain > local.gain)
                    local = {gain, idx};
            }
            best[worker] = local;
        };

        {
            std::vector<std::jthread> pool;
            for (unsigned w = 1; w < threads; ++w)
                pool.emplace_back(scan, w);
            scan(0);
        }

        // Chunks are ordered by index, so a strict comparison keeps the lowest index on ties.
        Best overall = best[0];
        for (unsigned w = 1; w < threads; ++w)
            if (best[w].gain > overall.gain)
                overall = best[w];

        GridResult out;
        out.gain = overall.gain;
        out.theta.resize(N);
        std::size_t rest = overall.index;
        for (Index n = 0; n < N; ++n)
        {
            out.theta(n) = std::polar(1.0, 2.0 * std::numbers::pi * double(rest % P) / double(P));
            rest /= P;
        }
        return out;
    }

    double decoupled_gain(const Scenario &s, ArrayGainOptions opt)
    {
        if (s.spacing < min_guarded_spacing && !opt.allow_small_spacing)
            throw SpacingBelowGuard("decoupled_gain: spacing below the conditioning guard");
        const EffectiveChannel eff = effective_channel(build_los_scenario(s));
        return closed_form_siso(eff).gain / single_element_gain(s);
    }

    double no_coupling_gain(const Scenario &s)
    {
        ImpedanceChannel ch = build_los_scenario(s);
        const Index N = ch.n_elements();
        ch.Z_R = CMatrix::Identity(N, N) * Complex(s.R * (1.0 + s.gamma_loss), 0.0);
        return closed_form_siso(effective_channel(ch)).gain / single_element_gain(s);
    }

    double ignore_mc_gain(const Scenario &s)
    {
        const ImpedanceChannel ch = build_los_scenario(s);
        return channel_gain(evaluate_channel(ch, RisState::zeros(ch.n_elements()))) / single_element_gain(s);
    }
}
