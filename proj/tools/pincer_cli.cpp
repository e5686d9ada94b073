// Command-line front end for the speed, schedule and simulation studies.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
// scenario, 3 simulation escape, 4 I/O or runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pincer/analytics.hpp"
#include "pincer/config.hpp"
#include "pincer/errors.hpp"
#include "pincer/report.hpp"
#include "pincer/schedule.hpp"

using namespace pincer;

namespace {

enum Exit
{
    ok = 0,
    usage = 1,
    infeasible = 2,
    escaped = 3,
    io = 4
};

struct Options
{
    std::string config;
    std::string out;
    std::string format = "csv";
    std::optional<int> n;
    std::optional<double> multiplier;
    std::optional<int> grid_cells;
    std::optional<double> dt;
    std::string driver;
    bool force = false;
    bool seedless = false;
};

std::string read_file(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunSpec build_spec(Options const& o)
{
    RunSpec spec = o.config.empty() ? default_spec() : parse_config(read_file(o.config));
    if (o.n)
    {
        spec.sweep_over_n.reset();
        spec.scenario.n = *o.n;
    }
    if (o.multiplier)
        spec.scenario.speed = SpeedSpec::times_critical(*o.multiplier);
    if (o.grid_cells || o.dt || !o.driver.empty() || o.force)
    {
        if (!spec.sim)
            spec.sim = SimConfig{};
        if (o.grid_cells)
            spec.sim->grid_cells = *o.grid_cells;
        if (o.dt)
            spec.sim->dt = *o.dt;
        if (!o.driver.empty())
            spec.sim->driver = o.driver == "schedule" ? Driver::schedule : Driver::wavefront;
        if (o.force)
            spec.sim->force = true;
    }
    if (!o.out.empty())
        spec.output_dir = o.out;
    spec.validate();
    return spec;
}

/// Text produced by one verb plus its exit code.
struct Result
{
    std::string text;
    std::string file;  ///< name inside the output directory
    int code = ok;
    std::vector<std::string> notes;
};

Result speeds(RunSpec const& spec, std::string const& format)
{
    Result r;
    r.file = "speeds." + format;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    std::ostringstream csv;
    csv << "n,v_lb,v_simplified,v_critical\n";
    for (int n : spec.team_sizes())
    {
        ScenarioParams p = spec.scenario;
        p.n = n;
        SpeedBenchmarks const b = critical_speed(p);
        csv << n << ',' << format_number(b.v_lb) << ',' << format_number(b.v_simplified) << ','
            << format_number(b.v_critical) << '\n';
        arr.push_back({{"n", n},
                       {"v_lb", quantize(b.v_lb)},
                       {"v_simplified", quantize(b.v_simplified)},
                       {"v_critical", quantize(b.v_critical)}});
    }
    r.text = format == "json" ? arr.dump(2) + "\n" : csv.str();
    return r;
}

Result schedule(RunSpec const& spec, std::string const& format)
{
    auto const sizes = spec.team_sizes();
    if (sizes.size() != 1)
        throw ValidationError("schedule needs a single team size; pass --n");
    ScenarioParams p = spec.scenario;
    p.n = sizes.front();
    Result r;
    r.file = fmt::format("schedule_n{}.{}", p.n, format);
    try
    {
        SweepSchedule const s = build_schedule(p);
        std::ostringstream out;
        if (format == "json")
            write_schedule_json(s, out);
        else
            write_schedule_csv(s, out);
        r.text = out.str();
        r.notes = s.diagnostics;
    }
    catch (InfeasibleSpeed const& e)
    {
        r.code = infeasible;
        r.notes.push_back(e.what());
    }
    return r;
}

Result table(RunSpec const& spec, std::string const& format, bool simulate)
{
    TableResult t = run_table(spec);
    Result r;
    r.file = "table." + format;
    r.code = t.exit_code;
    r.notes = t.diagnostics;
    if (simulate)
    {
        RunSpec s = spec;
        if (!s.sim)
            s.sim = SimConfig{};
        SimValidation const v = run_sim_validation(s, t.rows);
        r.notes.insert(r.notes.end(), v.diagnostics.begin(), v.diagnostics.end());
        if (v.escaped)
            r.code = escaped;
    }
    r.text = format == "json" ? to_json(t.rows) : to_csv(t.rows);
    return r;
}

int emit(Result const& r, Options const& o)
{
    for (auto const& note : r.notes)
        std::cerr << note << '\n';
    if (r.text.empty())
        return r.code;
    if (o.out.empty())
    {
        std::cout << r.text;
        return r.code;
    }
    std::filesystem::create_directories(o.out);
    auto const path = std::filesystem::path(o.out) / r.file;
    std::ofstream f(path, std::ios::binary);
    f << r.text;
    if (!f.flush())
        throw Error("cannot write " + path.string());
    std::cerr << "wrote " << path.string() << '\n';
    return r.code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spiral pincer sweep: speeds, schedules, tables and worst-case simulation"};
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--config", o.config, "YAML run description")->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "output directory (default: stdout)");
    app.add_option("--format", o.format, "table format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--n", o.n, "single even team size");
    app.add_option("--multiplier", o.multiplier, "sweeper speed over the critical speed")
        ->check(CLI::PositiveNumber);
    app.add_option("--grid-cells", o.grid_cells, "simulation grid cells per side")
        ->check(CLI::PositiveNumber);
    app.add_option("--dt", o.dt, "simulation time step")->check(CLI::PositiveNumber);
    app.add_option("--driver", o.driver, "simulation driver")
        ->check(CLI::IsMember({"wavefront", "schedule"}));
    app.add_flag("--force", o.force, "simulate below the critical speed");
    app.add_flag("--seedless", o.seedless, "compute twice and require identical output");

    auto* speeds_cmd = app.add_subcommand("speeds", "lower-bound, simplified and critical speeds");
    auto* schedule_cmd = app.add_subcommand("schedule", "per-cycle sweep schedule for one n");
    app.add_subcommand("table", "sweep-time table over team sizes");
    auto* simulate_cmd = app.add_subcommand("simulate", "table plus worst-case simulation");
    auto* frames_cmd = app.add_subcommand("frames", "simulation with SVG frames");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        return app.exit(e) == 0 ? ok : usage;
    }

    try
    {
        RunSpec spec = build_spec(o);
        if (frames_cmd->parsed())
        {
            if (!spec.sim)
                spec.sim = SimConfig{};
            spec.formats.frames = true;
        }
        auto compute = [&]() {
            if (speeds_cmd->parsed())
                return speeds(spec, o.format);
            if (schedule_cmd->parsed())
                return schedule(spec, o.format);
            return table(spec, o.format, simulate_cmd->parsed() || frames_cmd->parsed());
        };
        Result const r = compute();
        if (o.seedless && compute().text != r.text)
        {
            std::cerr << "determinism check failed: repeated run produced different output\n";
            return io;
        }
        return emit(r, o);
    }
    catch (ParseError const& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return usage;
    }
    catch (ValidationError const& e)
    {
        std::cerr << "invalid input: " << e.what() << '\n';
        return usage;
    }
    catch (OddTeamSize const& e)
    {
        std::cerr << "invalid input: " << e.what() << '\n';
        return usage;
    }
    catch (InfeasibleSpeed const& e)
    {
        std::cerr << "infeasible: " << e.what() << '\n';
        return infeasible;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    }
}
