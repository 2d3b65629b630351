// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "riscouple/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace riscouple
{
    namespace
    {
        std::string_view trim(std::string_view s)
        {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string_view::npos)
                return {};
            const auto last = s.find_last_not_of(" \t\r");
            return s.substr(first, last - first + 1);
        }

        struct RawEntry
        {
            int line = 0;
            std::vector<std::string> items;
            bool is_list = false;
        };

        const std::set<std::string, std::less<>> known_keys{
            "name", "N", "spacing", "angles", "gamma_loss", "methods", "gamma_dr", "gamma_rs", "R", "tol",
            "max_sweeps", "refactor_every", "x_max", "allow_small_spacing", "grid_points", "output"};

        std::vector<std::string> split_list(std::string_view body)
        {
            std::vector<std::string> out;
            if (trim(body).empty())
                return out;
            std::size_t start = 0;
            while (true)
            {
                const auto comma = body.find(',', start);
                out.emplace_back(trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
                if (comma == std::string_view::npos)
                    break;
                start = comma + 1;
            }
            return out;
        }

        double parse_number(std::string_view token, int line, const std::string &key)
        {
            token = trim(token);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
            if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
                throw ConfigError("expected a number, got '" + std::string(token) + "'", line, key);
            if (!std::isfinite(v))
                throw ConfigError("value must be finite", line, key);
            return v;
        }

        // number | [k*]pi[/m] with optional leading '-'
        double parse_angle(std::string_view token, int line, const std::string &key)
        {
            token = trim(token);
            const auto pos = token.find("pi");
            if (pos == std::string_view::npos)
                return parse_number(token, line, key);

            double factor = 1.0;
            std::string_view prefix = trim(token.substr(0, pos));
            if (prefix == "-")
                factor = -1.0;
            else if (!prefix.empty())
            {
                if (prefix.back() != '*')
                    throw ConfigError("malformed angle '" + std::string(token) + "'", line, key);
                factor = parse_number(prefix.substr(0, prefix.size() - 1), line, key);
            }
            double divisor = 1.0;
            std::string_view suffix = trim(token.substr(pos + 2));
            if (!suffix.empty())
            {
                if (suffix.front() != '/')
                    throw ConfigError("malformed angle '" + std::string(token) + "'", line, key);
                divisor = parse_number(suffix.substr(1), line, key);
                if (divisor == 0.0)
                    throw ConfigError("division by zero in angle", line, key);
            }
            return factor * std::numbers::pi / divisor;
        }

        AnglePair parse_angle_pair(std::string_view token, int line, const std::string &key)
        {
            constexpr double pi = std::numbers::pi;
            if (token == "front-fire")
                return {pi / 2, pi / 2};
            if (token == "end-fire")
                return {0.0, pi};
            if (token == "corner")
                return {pi / 2, 0.0};
            if (token == "oblique")
                return {pi / 4, pi / 4};
            const auto colon = token.find(':');
            if (colon == std::string_view::npos)
                throw ConfigError("unknown angle preset '" + std::string(token) + "' (use front-fire, end-fire, corner, oblique or tx:rx)", line, key);
            return {parse_angle(token.substr(0, colon), line, key), parse_angle(token.substr(colon + 1), line, key)};
        }

        bool parse_bool(std::string_view token, int line, const std::string &key)
        {
            if (token == "true" || token == "1")
                return true;
            if (token == "false" || token == "0")
                return false;
            throw ConfigError("expected true or false", line, key);
        }

        int parse_int(std::string_view token, int line, const std::string &key)
        {
            const double v = parse_number(token, line, key);
            if (v != std::floor(v) || std::abs(v) > 1e9)
                throw ConfigError("expected an integer", line, key);
            return int(v);
        }

        const RawEntry &single(const std::map<std::string, RawEntry, std::less<>> &entries, const std::string &key)
        {
            const RawEntry &e = entries.at(key);
            if (e.is_list || e.items.size() != 1)
                throw ConfigError("expected a single value", e.line, key);
            return e;
        }

        std::string sanitize_flag(std::string s)
        {
            std::replace(s.begin(), s.end(), ',', ' ');
            std::replace(s.begin(), s.end(), ';', ' ');
            std::replace(s.begin(), s.end(), '\n', ' ');
            return s;
        }
    }

    std::vector<Scenario> SweepSpec::scenarios() const
    {
        std::vector<Scenario> out;
        out.reserve(angles.size() * gamma_loss.size() * N.size() * spacing.size());
        for (const AnglePair &ang : angles)
            for (double g : gamma_loss)
                for (Index n : N)
                    for (double d : spacing)
                    {
                        Scenario s;
                        s.N = n;
                        s.spacing = d;
                        s.alpha_tx = ang.alpha_tx;
                        s.alpha_rx = ang.alpha_rx;
                        s.gamma_loss = g;
                        s.gamma_dr = gamma_dr;
                        s.gamma_rs = gamma_rs;
                        s.R = R;
                        out.push_back(s);
                    }
        return out;
    }

    SweepSpec parse_config(const std::string &text)
    {
        std::map<std::string, RawEntry, std::less<>> entries;
        std::istringstream in(text);
        std::string raw;
        int line = 0;
        while (std::getline(in, raw))
        {
            ++line;
            std::string_view view(raw);
            if (const auto hash = view.find('#'); hash != std::string_view::npos)
                view = view.substr(0, hash);
            view = trim(view);
            if (view.empty())
                continue;

            const auto eq = view.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("expected 'key = value'", line, "");
            const std::string key(trim(view.substr(0, eq)));
            const std::string_view value = trim(view.substr(eq + 1));
            if (!known_keys.contains(key))
                throw ConfigError("unknown key", line, key);
            if (entries.contains(key))
                throw ConfigError("duplicate key", line, key);

            RawEntry e;
            e.line = line;
            if (!value.empty() && value.front() == '[')
            {
                if (value.back() != ']')
                    throw ConfigError("unterminated list", line, key);
                e.is_list = true;
                e.items = split_list(value.substr(1, value.size() - 2));
                for (const auto &item : e.items)
                    if (item.empty())
                        throw ConfigError("empty list item", line, key);
            }
            else
            {
                if (value.empty())
                    throw ConfigError("missing value", line, key);
                e.items.emplace_back(value);
            }
            entries.emplace(key, std::move(e));
        }

        for (const char *required : {"N", "spacing", "angles", "methods"})
            if (!entries.contains(required))
                throw ConfigError("missing required key", 0, required);

        SweepSpec spec;
        for (const auto &[key, e] : entries)
        {
            const int ln = e.line;
            if (key == "name")
                spec.name = single(entries, key).items[0];
            else if (key == "output")
                spec.output = single(entries, key).items[0];
            else if (key == "N")
                for (const auto &item : e.items)
                {
                    const int n = parse_int(item, ln, key);
                    if (n < 1)
                        throw ConfigError("N must be positive", ln, key);
                    spec.N.push_back(n);
                }
            else if (key == "spacing")
                for (const auto &item : e.items)
                {
                    const double d = parse_number(item, ln, key);
                    if (!(d > 0.0))
                        throw ConfigError("spacing must be positive", ln, key);
                    spec.spacing.push_back(d);
                }
            else if (key == "gamma_loss")
            {
                spec.gamma_loss.clear();
                for (const auto &item : e.items)
                {
                    const double g = parse_number(item, ln, key);
                    if (!(g >= 0.0))
                        throw ConfigError("gamma_loss must be nonnegative", ln, key);
                    spec.gamma_loss.push_back(g);
                }
            }
            else if (key == "angles")
                for (const auto &item : e.items)
                    spec.angles.push_back(parse_angle_pair(item, ln, key));
            else if (key == "methods")
                for (const auto &item : e.items)
                {
                    const auto m = parse_method(item);
                    if (!m)
                        throw ConfigError("unknown method '" + item + "'", ln, key);
                    spec.methods.push_back(*m);
                }
            else if (key == "gamma_dr" || key == "gamma_rs" || key == "R" || key == "tol" || key == "x_max")
            {
                const double v = parse_number(single(entries, key).items[0], ln, key);
                if (key == "R" || key == "x_max" ? !(v > 0.0) : !(v >= 0.0))
                    throw ConfigError("value out of range", ln, key);
                if (key == "gamma_dr")
                    spec.gamma_dr = v;
                else if (key == "gamma_rs")
                    spec.gamma_rs = v;
                else if (key == "R")
                    spec.R = v;
                else if (key == "tol")
                    spec.optimizer.tol = v;
                else
                    spec.optimizer.x_max = v;
            }
            else if (key == "max_sweeps" || key == "refactor_every" || key == "grid_points")
            {
                const int v = parse_int(single(entries, key).items[0], ln, key);
                if (key == "grid_points" ? v < 0 : v < 1)
                    throw ConfigError("value out of range", ln, key);
                if (key == "max_sweeps")
                    spec.optimizer.max_sweeps = v;
                else if (key == "refactor_every")
                    spec.optimizer.refactor_every = v;
                else
                    spec.grid_points = v;
            }
            else if (key == "allow_small_spacing")
                spec.allow_small_spacing = parse_bool(single(entries, key).items[0], ln, key);
        }

        auto require_nonempty = [&](bool empty, const std::string &key)
        {
            if (empty)
                throw ConfigError("list must not be empty", entries.at(key).line, key);
        };
        require_nonempty(spec.N.empty(), "N");
        require_nonempty(spec.spacing.empty(), "spacing");
        require_nonempty(spec.angles.empty(), "angles");
        require_nonempty(spec.methods.empty(), "methods");
        if (entries.contains("gamma_loss"))
            require_nonempty(spec.gamma_loss.empty(), "gamma_loss");
        return spec;
    }

    SweepSpec load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("cannot open config file '" + path.string() + "'", 0, "");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str());
    }

    double SweepRecord::array_gain_db() const
    {
        return 10.0 * std::log10(array_gain);
    }

    bool SweepRecord::failed() const
    {
        return std::isnan(array_gain);
    }

    namespace
    {
        int default_grid_points(Index N)
        {
            return N == 1 ? 3600 : N == 2 ? 360 : 72;
        }

        struct ScenarioOutput
        {
            std::vector<SweepRecord> records;
            std::vector<ElementTraceRecord> traces;
        };

        ScenarioOutput run_scenario(const SweepSpec &spec, const Scenario &s, Index id, const RunOptions &opt)
        {
            ScenarioOutput out;
            const ArrayGainOptions guard{spec.allow_small_spacing};

            for (MethodId method : spec.methods)
            {
                SweepRecord rec;
                rec.scenario_id = id;
                rec.method = method;
                rec.N = s.N;
                rec.spacing = s.spacing;
                rec.alpha_tx = s.alpha_tx;
                rec.alpha_rx = s.alpha_rx;
                rec.gamma_loss = s.gamma_loss;

                const auto t0 = std::chrono::steady_clock::now();
                auto elapsed = [&]
                { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

                try
                {
                    switch (method)
                    {
                    case MethodId::Decoupled:
                    case MethodId::GridOracle:
                    {
                        if (s.spacing < min_guarded_spacing && !guard.allow_small_spacing)
                            throw SpacingBelowGuard("spacing below conditioning guard");
                        const EffectiveChannel eff = effective_channel(build_los_scenario(s));
                        if (eff.floored > 0)
                            rec.flags.push_back("pinv-floor=" + std::to_string(eff.floored));
                        if (method == MethodId::Decoupled)
                            rec.array_gain = closed_form_siso(eff).gain / single_element_gain(s);
                        else
                        {
                            const int points = spec.grid_points > 0 ? spec.grid_points : default_grid_points(s.N);
                            rec.array_gain = grid_search_phase(eff, points, 1).gain / single_element_gain(s);
                            rec.flags.push_back("grid=" + std::to_string(points));
                        }
                        rec.wall_time_s = elapsed();
                        out.records.push_back(std::move(rec));
                        break;
                    }
                    case MethodId::NoCoupling:
                        rec.array_gain = no_coupling_gain(s);
                        rec.wall_time_s = elapsed();
                        out.records.push_back(std::move(rec));
                        break;
                    case MethodId::IgnoreMC:
                        rec.array_gain = ignore_mc_gain(s);
                        rec.wall_time_s = elapsed();
                        out.records.push_back(std::move(rec));
                        break;
                    case MethodId::ElementWise:
                    case MethodId::ElementWiseNaive:
                    {
                        const ImpedanceChannel ch = build_los_scenario(s);
                        OptimizerConfig cfg = spec.optimizer;
                        cfg.objective = Objective::siso_gain;
                        cfg.objective_scale = single_element_gain(s);
                        const RisState x0 = RisState::zeros(s.N);
                        const OptimizeResult res = method == MethodId::ElementWise ? optimize(ch, x0, cfg)
                                                                                   : naive_elementwise(ch, x0, cfg);
                        for (std::size_t i = 0; i < res.sweep_objective.size(); ++i)
                        {
                            SweepRecord r = rec;
                            r.sweep_index = int(i);
                            r.array_gain = res.sweep_objective[i];
                            r.wall_time_s = i == 0 ? 0.0 : res.sweep_seconds[i - 1];
                            if (i + 1 == res.sweep_objective.size())
                            {
                                r.flags.push_back(res.converged ? "converged" : "max-sweeps");
                                if (res.saturations > 0)
                                    r.flags.push_back("saturations=" + std::to_string(res.saturations));
                            }
                            out.records.push_back(std::move(r));
                        }
                        if (opt.trace_elements)
                            for (std::size_t k = 0; k < res.trace.size(); ++k)
                            {
                                ElementTraceRecord t;
                                t.scenario_id = id;
                                t.method = method;
                                t.update_index = Index(k);
                                t.sweep = k == 0 ? 0 : int((k - 1) / std::size_t(s.N)) + 1;
                                t.element = k == 0 ? -1 : Index((k - 1) % std::size_t(s.N));
                                t.array_gain = res.trace[k];
                                out.traces.push_back(t);
                            }
                        break;
                    }
                    }
                }
                catch (const std::exception &e)
                {
                    rec.array_gain = std::nan("");
                    rec.sweep_index = is_iterative(method) ? 0 : -1;
                    rec.wall_time_s = elapsed();
                    rec.flags.push_back("error: " + std::string(e.what()));
                    out.records.push_back(std::move(rec));
                }
            }
            return out;
        }
    }

    SweepOutput run_sweep(const SweepSpec &spec, RunOptions opt)
    {
        const std::vector<Scenario> scenarios = spec.scenarios();
        std::vector<ScenarioOutput> results(scenarios.size());

        const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, unsigned(std::max<std::size_t>(1, scenarios.size()))));
        std::atomic<std::size_t> next{0};
        auto worker = [&]
        {
            for (std::size_t i = next++; i < scenarios.size(); i = next++)
                results[i] = run_scenario(spec, scenarios[i], Index(i), opt);
        };
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 1; t < threads; ++t)
                pool.emplace_back(worker);
            worker();
        }

        SweepOutput out;
        for (auto &r : results)
        {
            for (auto &rec : r.records)
            {
                if (rec.failed())
                    ++out.failures;
                out.records.push_back(std::move(rec));
            }
            for (auto &t : r.traces)
                out.element_traces.push_back(t);
        }
        std::stable_sort(out.records.begin(), out.records.end(), [](const SweepRecord &a, const SweepRecord &b)
                         { return std::tie(a.scenario_id, a.method, a.sweep_index) < std::tie(b.scenario_id, b.method, b.sweep_index); });
        std::stable_sort(out.element_traces.begin(), out.element_traces.end(), [](const ElementTraceRecord &a, const ElementTraceRecord &b)
                         { return std::tie(a.scenario_id, a.method, a.update_index) < std::tie(b.scenario_id, b.method, b.update_index); });
        return out;
    }

    std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, ptr);
    }

    std::string to_csv(std::span<const SweepRecord> records)
    {
        std::string out = csv_header;
        out += '\n';
        for (const SweepRecord &r : records)
        {
            std::string flags;
            for (const auto &f : r.flags)
            {
                if (!flags.empty())
                    flags += ';';
                flags += sanitize_flag(f);
            }
            out += std::to_string(r.scenario_id) + ',' + std::string(method_name(r.method)) + ',' + std::to_string(r.N) + ',' +
                   format_double(r.spacing) + ',' + format_double(r.alpha_tx) + ',' + format_double(r.alpha_rx) + ',' +
                   format_double(r.gamma_loss) + ',' + std::to_string(r.sweep_index) + ',' + format_double(r.array_gain) + ',' +
                   format_double(r.array_gain_db()) + ',' + format_double(r.wall_time_s) + ',' + flags + '\n';
        }
        return out;
    }

    namespace
    {
        void write_text(const std::string &text, const std::filesystem::path &path)
        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f)
                throw std::runtime_error("cannot open '" + path.string() + "' for writing");
            f << text;
            f.flush();
            if (!f)
                throw std::runtime_error("write to '" + path.string() + "' failed");
        }
    }

    void write_csv(std::span<const SweepRecord> records, const std::filesystem::path &path)
    {
        write_text(to_csv(records), path);
    }

    void write_element_trace_csv(std::span<const ElementTraceRecord> traces, const std::filesystem::path &path)
    {
        std::string out = "scenario_id,method,update_index,sweep,element,array_gain\n";
        for (const auto &t : traces)
            out += std::to_string(t.scenario_id) + ',' + std::string(method_name(t.method)) + ',' + std::to_string(t.update_index) + ',' +
                   std::to_string(t.sweep) + ',' + std::to_string(t.element) + ',' + format_double(t.array_gain) + '\n';
        write_text(out, path);
    }

    std::span<const FigureInfo> figure_catalog()
    {
        static constexpr FigureInfo catalog[] = {
            {"fig3", "fig3.cfg", "method comparison, N = 4, end-fire, spacing sweep with per-sweep convergence traces"},
            {"fig4", "fig4.cfg", "Decoupled array gain, front-fire, N = 1..8 over spacing"},
            {"fig5", "fig5.cfg", "Decoupled array gain, end-fire, N = 1..8 over spacing"},
            {"fig6", "fig6.cfg", "Decoupled array gain, end-fire, N = 4 with Ohmic losses"},
            {"fig7", "fig7.cfg", "Decoupled array gain, alpha_tx = pi/2, alpha_rx = 0, N = 1..8"},
            {"fig8", "fig8.cfg", "Decoupled array gain, alpha_tx = alpha_rx = pi/4, N = 1..8"},
        };
        return catalog;
    }
}
