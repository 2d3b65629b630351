// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "catch_amalgamated.hpp"

#include "riscouple/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace riscouple;
using Catch::Approx;
constexpr double pi = std::numbers::pi;

namespace
{
    std::string read_file(const std::filesystem::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    // Drops the wall_time_s column (index 10) from every line.
    std::string without_wall_time(const std::string &csv)
    {
        std::istringstream in(csv);
        std::string line, out;
        while (std::getline(in, line))
        {
            std::vector<std::string> cols;
            std::string col;
            std::istringstream ls(line);
            while (std::getline(ls, col, ','))
                cols.push_back(col);
            if (!line.empty() && line.back() == ',')
                cols.emplace_back();
            if (cols.size() > 10)
                cols.erase(cols.begin() + 10);
            for (std::size_t i = 0; i < cols.size(); ++i)
                out += (i ? "," : "") + cols[i];
            out += '\n';
        }
        return out;
    }

    int error_line(const std::string &text)
    {
        try
        {
            parse_config(text);
        }
        catch (const ConfigError &e)
        {
            return e.line();
        }
        return -1;
    }
}

TEST_CASE("parse_config - minimal config with defaults")
{
    const SweepSpec s = parse_config("N = 4\nspacing = [0.25]\nangles = end-fire\nmethods = [Decoupled]\n");
    REQUIRE(s.N == std::vector<Index>{4});
    REQUIRE(s.spacing == std::vector<double>{0.25});
    REQUIRE(s.angles.size() == 1);
    CHECK(s.angles[0].alpha_tx == 0.0);
    CHECK(s.angles[0].alpha_rx == Approx(pi));
    CHECK(s.methods == std::vector<MethodId>{MethodId::Decoupled});
    CHECK(s.R == 50.0);
    CHECK(s.optimizer.tol == 1e-10);
    CHECK(s.optimizer.max_sweeps == 500);
    CHECK(s.gamma_loss == std::vector<double>{0.0});
    CHECK(s.output_file() == "sweep.csv");
}

TEST_CASE("parse_config - full syntax")
{
    const SweepSpec s = parse_config(R"(# comment line
name       = demo   # trailing comment
N          = [2, 4]
spacing    = [0.5, 0.1]
angles     = [front-fire, corner, oblique, pi/3:2*pi/3, 0.5:1]
gamma_loss = [0, 0.01]
methods    = [Decoupled, Element-Wise, GridOracle]
R          = 75
tol        = 1e-8
max_sweeps = 20
refactor_every = 3
x_max      = 1e6
allow_small_spacing = true
grid_points = 12
output     = out.csv
)");
    CHECK(s.name == "demo");
    REQUIRE(s.angles.size() == 5);
    CHECK(s.angles[0].alpha_tx == Approx(pi / 2));
    CHECK(s.angles[1].alpha_tx == Approx(pi / 2));
    CHECK(s.angles[1].alpha_rx == 0.0);
    CHECK(s.angles[2].alpha_rx == Approx(pi / 4));
    CHECK(s.angles[3].alpha_tx == Approx(pi / 3));
    CHECK(s.angles[3].alpha_rx == Approx(2 * pi / 3));
    CHECK(s.angles[4].alpha_rx == 1.0);
    CHECK(s.methods[1] == MethodId::ElementWise);
    CHECK(s.R == 75.0);
    CHECK(s.optimizer.tol == 1e-8);
    CHECK(s.optimizer.max_sweeps == 20);
    CHECK(s.optimizer.refactor_every == 3);
    CHECK(s.optimizer.x_max == 1e6);
    CHECK(s.allow_small_spacing);
    CHECK(s.grid_points == 12);
    CHECK(s.output_file() == "out.csv");
}

TEST_CASE("parse_config - errors carry line and key")
{
    const std::string base = "N = 4\nspacing = [0.25]\nangles = end-fire\n";
    CHECK_THROWS_AS(parse_config(base + "methods = []\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base), ConfigError);
    CHECK(error_line(base + "methods = [Decoupled]\nbogus = 1\n") == 5);
    CHECK(error_line(base + "methods = [Z-OPT]\n") == 4);
    CHECK(error_line("N = [four]\n" + base.substr(6) + "methods = [Decoupled]\n") == 1);
    CHECK(error_line(base + "methods = [Decoupled]\nN = 5\n") == 5);
    CHECK(error_line(base + "methods = [Decoupled\n") == 4);
    CHECK(error_line(base + "methods = [Decoupled]\ntol = -1\n") == 5);
    CHECK(error_line("N = 4\nspacing = [0.25]\nangles = sideways\nmethods = [Decoupled]\n") == 3);
    CHECK(error_line("N = 4\nspacing = [-0.25]\nangles = end-fire\nmethods = [Decoupled]\n") == 2);
    CHECK(error_line("just text\n") == 1);

    try
    {
        parse_config(base + "methods = [Decoupled]\nbogus = 1\n");
    }
    catch (const ConfigError &e)
    {
        CHECK(e.key() == "bogus");
    }
}

TEST_CASE("SweepSpec - Cartesian product")
{
    const SweepSpec s = parse_config("N = [2, 4, 8]\nspacing = [0.5, 0.25, 0.1, 0.05]\nangles = end-fire\nmethods = [Decoupled]\n");
    const std::vector<Scenario> sc = s.scenarios();
    REQUIRE(sc.size() == 12);
    CHECK(sc[0].N == 2);
    CHECK(sc[0].spacing == 0.5);
    CHECK(sc[1].spacing == 0.25);
    CHECK(sc[4].N == 4);
    CHECK(sc[11].N == 8);
    CHECK(sc[11].spacing == 0.05);
}

TEST_CASE("write_csv - header and rows")
{
    CHECK(to_csv({}) == std::string(csv_header) + "\n");

    SweepRecord r;
    r.scenario_id = 3;
    r.method = MethodId::NoCoupling;
    r.N = 2;
    r.spacing = 0.1;
    r.alpha_tx = 0.0;
    r.alpha_rx = pi;
    r.array_gain = 100.0;
    r.flags = {"a", "b"};
    const std::vector<SweepRecord> one{r};
    const std::string csv = to_csv(one);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("3,NoCoupling,2,0.1,0,3.141592653589793,0,-1,100,20,0,a;b\n") != std::string::npos);

    const auto path = std::filesystem::temp_directory_path() / "riscouple_test_empty.csv";
    write_csv({}, path);
    CHECK(read_file(path) == std::string(csv_header) + "\n");
    std::filesystem::remove(path);

    CHECK_THROWS(write_csv(one, "/nonexistent-dir/x.csv"));
}

TEST_CASE("format_double - shortest round trip")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(256.0) == "256");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("run_sweep - records and flags")
{
    const SweepSpec s = parse_config("N = [2]\nspacing = [0.5, 0.01]\nangles = end-fire\n"
                                     "methods = [Decoupled, ElementWise, IgnoreMC]\n");
    const SweepOutput out = run_sweep(s);
    CHECK(out.failures == 1);

    std::size_t decoupled = 0, failed = 0;
    for (const SweepRecord &r : out.records)
    {
        if (r.method == MethodId::Decoupled)
        {
            ++decoupled;
            CHECK(r.sweep_index == -1);
        }
        if (r.failed())
        {
            ++failed;
            CHECK(r.spacing == 0.01);
            REQUIRE(!r.flags.empty());
            CHECK(r.flags[0].starts_with("error: "));
        }
        if (r.method == MethodId::Decoupled && r.spacing == 0.5)
            CHECK(r.array_gain == Approx(4.0).epsilon(1e-9));
    }
    CHECK(decoupled == 2);
    CHECK(failed == 1);

    const SweepRecord &last_ew = *std::find_if(out.records.rbegin(), out.records.rend(), [](const SweepRecord &r)
                                               { return r.method == MethodId::ElementWise && r.scenario_id == 0; });
    CHECK(std::find(last_ew.flags.begin(), last_ew.flags.end(), "converged") != last_ew.flags.end());
}

TEST_CASE("run_sweep - element traces")
{
    const SweepSpec s = parse_config("N = [3]\nspacing = [0.2]\nangles = end-fire\nmethods = [ElementWise]\nmax_sweeps = 2\n");
    const SweepOutput out = run_sweep(s, {.threads = 1, .trace_elements = true});
    REQUIRE(out.element_traces.size() >= 4);
    CHECK(out.element_traces[0].element == -1);
    CHECK(out.element_traces[1].element == 0);
    CHECK(out.element_traces[3].element == 2);
    CHECK(out.element_traces[3].sweep == 1);
}

TEST_CASE("run_sweep - deterministic across thread counts")
{
    const SweepSpec spec = load_config(std::filesystem::path(RISCOUPLE_TEST_DATA) / "golden.cfg");
    const std::string one = without_wall_time(to_csv(run_sweep(spec, {.threads = 1}).records));
    const std::string four = without_wall_time(to_csv(run_sweep(spec, {.threads = 4}).records));
    CHECK(one == four);
}

TEST_CASE("run_sweep - matches the frozen golden file")
{
    const SweepSpec spec = load_config(std::filesystem::path(RISCOUPLE_TEST_DATA) / "golden.cfg");
    const std::string produced = without_wall_time(to_csv(run_sweep(spec).records));
    const std::string golden = without_wall_time(read_file(std::filesystem::path(RISCOUPLE_TEST_DATA) / "golden.csv"));
    CHECK(produced == golden);
}

TEST_CASE("shipped figure configs parse")
{
    for (const FigureInfo &f : figure_catalog())
    {
        const SweepSpec s = load_config(std::filesystem::path(RISCOUPLE_CONFIG_DIR) / std::string(f.config));
        CHECK(s.name == f.id);
        CHECK_FALSE(s.scenarios().empty());
    }
    CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), ConfigError);
}
