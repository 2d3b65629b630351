// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
//
// Batch runner for array-gain sweeps over LOS scenarios.
//
// Config files are flat "key = value" lines; '#' starts a comment. List values
// use brackets, e.g.
//
//   name       = endfire_n4
//   N          = [2, 4, 8]
//   spacing    = [0.5, 0.25, 0.1]
//   angles     = [end-fire, pi/2:0]      # preset or alpha_tx:alpha_rx in radians
//   gamma_loss = [0, 0.01]
//   methods    = [Decoupled, ElementWise]
//
// Optional keys: name, gamma_loss, gamma_dr, gamma_rs, R, tol, max_sweeps,
// refactor_every, x_max, allow_small_spacing, grid_points, output.

#pragma once

#include "riscouple/baselines.hpp"

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riscouple
{
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string &what, int line, std::string key)
            : std::runtime_error(line > 0 ? "line " + std::to_string(line) + (key.empty() ? "" : " (" + key + ")") + ": " + what
                                          : (key.empty() ? "" : key + ": ") + what),
              line_(line), key_(std::move(key)) {}
        int line() const noexcept { return line_; }
        const std::string &key() const noexcept { return key_; }

    private:
        int line_;
        std::string key_;
    };

    struct AnglePair
    {
        double alpha_tx = 0.0;
        double alpha_rx = 0.0;
    };

    struct SweepSpec
    {
        std::string name = "sweep";
        std::vector<Index> N;
        std::vector<double> spacing;
        std::vector<AnglePair> angles;
        std::vector<double> gamma_loss{0.0};
        std::vector<MethodId> methods;
        double gamma_dr = 1.0;
        double gamma_rs = 1.0;
        double R = 50.0;
        OptimizerConfig optimizer;
        bool allow_small_spacing = false;
        int grid_points = 0; // 0: 3600 / 360 / 72 for N = 1 / 2 / 3
        std::string output;  // CSV file name; defaults to <name>.csv

        /// Cartesian product, ordered angles > gamma_loss > N > spacing (innermost).
        std::vector<Scenario> scenarios() const;
        std::string output_file() const { return output.empty() ? name + ".csv" : output; }
    };

    /// Throws ConfigError with line/key context.
    SweepSpec parse_config(const std::string &text);
    SweepSpec load_config(const std::filesystem::path &path);

    struct SweepRecord
    {
        Index scenario_id = 0;
        MethodId method = MethodId::Decoupled;
        Index N = 0;
        double spacing = 0.0;
        double alpha_tx = 0.0;
        double alpha_rx = 0.0;
        double gamma_loss = 0.0;
        int sweep_index = -1; // -1 for closed-form methods
        double array_gain = 0.0;
        double wall_time_s = 0.0;
        std::vector<std::string> flags;

        double array_gain_db() const;
        bool failed() const;
    };

    struct ElementTraceRecord
    {
        Index scenario_id = 0;
        MethodId method = MethodId::ElementWise;
        Index update_index = 0; // 0 is the initial state
        int sweep = 0;
        Index element = -1;
        double array_gain = 0.0;
    };

    struct RunOptions
    {
        unsigned threads = 1;
        bool trace_elements = false;
    };

    struct SweepOutput
    {
        std::vector<SweepRecord> records;
        std::vector<ElementTraceRecord> element_traces;
        Index failures = 0;
    };

    /// Deterministic: records are sorted by (scenario_id, method, sweep_index).
    SweepOutput run_sweep(const SweepSpec &spec, RunOptions opt = {});

    inline constexpr const char *csv_header =
        "scenario_id,method,N,spacing,alpha_tx,alpha_rx,gamma_loss,sweep_index,array_gain,array_gain_db,wall_time_s,flags";

    /// Shortest round-trip decimal form.
    std::string format_double(double v);

    std::string to_csv(std::span<const SweepRecord> records);
    void write_csv(std::span<const SweepRecord> records, const std::filesystem::path &path);
    void write_element_trace_csv(std::span<const ElementTraceRecord> traces, const std::filesystem::path &path);

    struct FigureInfo
    {
        std::string_view id;
        std::string_view config;
        std::string_view description;
    };

    std::span<const FigureInfo> figure_catalog();
}
