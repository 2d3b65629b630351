// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
//
// riscouple run --config <path> --out <dir> [--threads k] [--trace-elements] [--strict]
// riscouple list-figures
// riscouple selftest

#include "riscouple/experiment.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>

namespace fs = std::filesystem;
using namespace riscouple;

namespace
{
    constexpr int exit_ok = 0;
    constexpr int exit_config = 1;
    constexpr int exit_numerical = 2;

    int run_command(const std::string &config, const std::string &out_dir, unsigned threads, bool trace_elements, bool strict)
    {
        SweepSpec spec;
        try
        {
            spec = load_config(config);
        }
        catch (const ConfigError &e)
        {
            std::cerr << "config error in " << config << ": " << e.what() << "\n";
            return exit_config;
        }

        const SweepOutput result = run_sweep(spec, {threads, trace_elements});

        fs::create_directories(out_dir);
        const fs::path csv = fs::path(out_dir) / spec.output_file();
        write_csv(result.records, csv);
        std::cout << "wrote " << result.records.size() << " records to " << csv.string() << "\n";

        if (trace_elements)
        {
            const fs::path trace = fs::path(out_dir) / (spec.name + "_elements.csv");
            write_element_trace_csv(result.element_traces, trace);
            std::cout << "wrote " << result.element_traces.size() << " element updates to " << trace.string() << "\n";
        }

        if (result.failures > 0)
        {
            std::cerr << result.failures << " record(s) failed numerically; see the flags column\n";
            if (strict)
                return exit_numerical;
        }
        return exit_ok;
    }

    int list_figures()
    {
        for (const FigureInfo &f : figure_catalog())
            std::cout << f.id << "  " << (fs::path(RISCOUPLE_CONFIG_DIR) / f.config).string() << "\n    " << f.description << "\n";
        return exit_ok;
    }

    // Rank-one optimizer against dense re-inversion, and the two decoupled channel evaluations.
    // Arrays whose coupling condition exceeds 1e6 are redrawn: beyond that the
    // whitening step alone costs more digits than the 1e-9 comparison allows.
    int selftest()
    {
        std::mt19937_64 rng(20240517);
        std::uniform_real_distribution<double> spacing_dist(0.1, 0.5), angle_dist(0.0, std::numbers::pi);
        std::uniform_int_distribution<int> n_dist(1, 12);

        int failed = 0;
        for (int trial = 0; trial < 10; ++trial)
        {
            Scenario s;
            do
            {
                s.N = n_dist(rng);
                s.spacing = spacing_dist(rng);
            } while (coupling_condition(s.N, s.spacing) > 1e6);
            s.alpha_tx = angle_dist(rng);
            s.alpha_rx = angle_dist(rng);

            const ImpedanceChannel ch = build_los_scenario(s);
            OptimizerConfig cfg;
            cfg.objective_scale = single_element_gain(s);
            const auto fast = optimize(ch, RisState::zeros(s.N), cfg);
            const auto naive = naive_elementwise(ch, RisState::zeros(s.N), cfg);

            double worst = fast.trace.size() == naive.trace.size() ? 0.0 : INFINITY;
            for (std::size_t k = 0; k < std::min(fast.trace.size(), naive.trace.size()); ++k)
                worst = std::max(worst, std::abs(fast.trace[k] - naive.trace[k]) / std::max(1.0, std::abs(naive.trace[k])));

            RVector x = RVector::Random(s.N) * 100.0;
            for (Index n = 0; n < s.N; ++n)
                if (x(n) == 0.0)
                    x(n) = 1.0;
            const CMatrix via_network = evaluate_channel_with_load(ch, transformed_load(power_matching_network(ch.Z_R, ch.R), {x}));
            const CMatrix via_effective = evaluate_effective(effective_channel(ch), reactance_transform(x, ch.R));
            const double dual = (via_network - via_effective).norm() / std::max(1e-300, via_network.norm());

            const bool ok = worst < 1e-9 && dual < 1e-9;
            failed += ok ? 0 : 1;
            std::cout << (ok ? "[PASS]" : "[FAIL]") << " N=" << s.N << " spacing=" << s.spacing
                      << " trace-mismatch=" << worst << " dual-path=" << dual << "\n";
        }
        return failed == 0 ? exit_ok : exit_numerical;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"RIS mutual-coupling simulator"};
    app.require_subcommand(1);

    std::string config, out_dir = ".";
    unsigned threads = 1;
    bool trace_elements = false, strict = false;
    auto *run = app.add_subcommand("run", "Run a sweep described by a config file and write CSV");
    run->add_option("--config", config, "Sweep config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--trace-elements", trace_elements, "Also write per-element-update traces");
    run->add_flag("--strict", strict, "Exit with code 2 when any scenario fails numerically");

    auto *figures = app.add_subcommand("list-figures", "List shipped figure-reproduction configs");
    auto *self = app.add_subcommand("selftest", "Run the oracle-equivalence checks");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try
    {
        if (run->parsed())
            return run_command(config, out_dir, threads, trace_elements, strict);
        if (figures->parsed())
            return list_figures();
        if (self->parsed())
            return selftest();
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_ok;
}
