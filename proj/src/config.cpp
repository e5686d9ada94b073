#include "pincer/config.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "pincer/errors.hpp"

namespace pincer {

namespace {

int line_of(YAML::Node const& node)
{
    return node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
}

[[noreturn]] void fail(YAML::Node const& at, std::string const& field, std::string const& what)
{
    int const line = line_of(at);
    throw ParseError(fmt::format("line {}: {}: {}", line, field, what), line, field);
}

void check_keys(YAML::Node const& map, std::string const& where,
                std::set<std::string> const& allowed)
{
    if (!map.IsMap())
        fail(map, where, "expected a mapping");
    for (auto const& kv : map)
    {
        auto const key = kv.first.as<std::string>();
        if (!allowed.count(key))
            fail(kv.first, where.empty() ? key : where + "." + key, "unknown key");
    }
}

template <class T>
T scalar(YAML::Node const& node, std::string const& field)
{
    if (!node.IsScalar())
        fail(node, field, "expected a scalar");
    try
    {
        return node.as<T>();
    }
    catch (YAML::Exception const&)
    {
        fail(node, field, fmt::format("cannot read '{}'", node.Scalar()));
    }
}

double number(YAML::Node const& node, std::string const& field)
{
    double const v = scalar<double>(node, field);
    if (!std::isfinite(v))
        fail(node, field, "must be finite");
    return v;
}

template <class T>
T required(YAML::Node const& map, char const* key, std::string const& prefix)
{
    std::string const field = prefix + key;
    if (!map[key])
        fail(map, field, "missing required field");
    if constexpr (std::is_same_v<T, double>)
        return number(map[key], field);
    else
        return scalar<T>(map[key], field);
}

double degrees(double d)
{
    return d * std::numbers::pi / 180;
}

SpeedSpec parse_speed(YAML::Node const& node)
{
    if (node.IsScalar())
        return SpeedSpec::times_critical(number(node, "scenario.speed"));
    check_keys(node, "scenario.speed", {"multiplier", "absolute"});
    bool const m = static_cast<bool>(node["multiplier"]);
    bool const a = static_cast<bool>(node["absolute"]);
    if (m == a)
        fail(node, "scenario.speed", "give exactly one of multiplier or absolute");
    if (m)
        return SpeedSpec::times_critical(number(node["multiplier"], "scenario.speed.multiplier"));
    return SpeedSpec::absolute_speed(number(node["absolute"], "scenario.speed.absolute"));
}

Driver parse_driver(YAML::Node const& node)
{
    auto const s = scalar<std::string>(node, "sim.driver");
    if (s == "wavefront")
        return Driver::wavefront;
    if (s == "schedule")
        return Driver::schedule;
    fail(node, "sim.driver", "expected wavefront or schedule");
}

SimConfig parse_sim(YAML::Node const& node)
{
    check_keys(node,
               "sim",
               {"dt", "cell_size", "grid_cells", "frame_interval", "escape_radius",
                "max_sim_time", "driver", "clear_during_dash", "force", "tip_margin_cells"});
    SimConfig c;
    auto opt = [&](char const* key, double& out) {
        if (node[key])
            out = number(node[key], std::string("sim.") + key);
    };
    opt("dt", c.dt);
    opt("cell_size", c.cell_size);
    opt("frame_interval", c.frame_interval);
    opt("escape_radius", c.escape_radius);
    opt("max_sim_time", c.max_sim_time);
    opt("tip_margin_cells", c.tip_margin_cells);
    if (node["grid_cells"])
        c.grid_cells = scalar<int>(node["grid_cells"], "sim.grid_cells");
    if (node["driver"])
        c.driver = parse_driver(node["driver"]);
    if (node["clear_during_dash"])
        c.clear_during_dash = scalar<bool>(node["clear_during_dash"], "sim.clear_during_dash");
    if (node["force"])
        c.force = scalar<bool>(node["force"], "sim.force");
    return c;
}

TeamRange parse_range(YAML::Node const& node)
{
    check_keys(node, "sweep_over_n", {"from", "to", "step"});
    TeamRange r;
    r.first = required<int>(node, "from", "sweep_over_n.");
    r.last = required<int>(node, "to", "sweep_over_n.");
    if (node["step"])
        r.step = scalar<int>(node["step"], "sweep_over_n.step");
    return r;
}

}  // namespace

std::vector<int> TeamRange::values() const
{
    std::vector<int> out;
    for (int n = first; n <= last; n += step)
        out.push_back(n);
    return out;
}

std::vector<int> RunSpec::team_sizes() const
{
    return sweep_over_n ? sweep_over_n->values() : std::vector<int>{scenario.n};
}

void RunSpec::validate() const
{
    if (sweep_over_n)
    {
        auto const& r = *sweep_over_n;
        if (r.step != 2)
            throw ValidationError(fmt::format("sweep_over_n: step must be 2, got {}", r.step));
        if (r.first < 2 || r.last < r.first)
            throw ValidationError("sweep_over_n: need 2 <= from <= to");
        if (r.first % 2 != 0 || r.last % 2 != 0)
            throw ValidationError(
                fmt::format("sweep_over_n: team sizes must be even ({}..{})", r.first, r.last));
    }
    for (int n : team_sizes())
    {
        ScenarioParams p = scenario;
        p.n = n;
        try
        {
            p.validate();
        }
        catch (OddTeamSize const& e)
        {
            throw ValidationError(e.what());
        }
    }
    if (output_dir.empty())
        throw ValidationError("output_dir must not be empty");
    if (formats.frames && !sim)
        throw ValidationError("frames output needs a sim section");
}

RunSpec parse_config(std::string const& text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (YAML::ParserException const& e)
    {
        throw ParseError(fmt::format("line {}: {}", e.mark.line + 1, e.msg),
                         e.mark.line + 1,
                         "");
    }
    if (!root || root.IsNull())
        throw ParseError("empty configuration", 0, "scenario");
    check_keys(root, "", {"scenario", "sweep_over_n", "sim", "output_dir", "formats"});

    RunSpec spec;
    YAML::Node const sc = root["scenario"];
    if (!sc)
        fail(root, "scenario", "missing required field");
    check_keys(sc, "scenario", {"n", "R0", "r", "VT", "alpha_deg", "speed"});
    auto& p = spec.scenario;
    p.R0 = required<double>(sc, "R0", "scenario.");
    p.r = required<double>(sc, "r", "scenario.");
    p.VT = required<double>(sc, "VT", "scenario.");
    p.alpha = degrees(required<double>(sc, "alpha_deg", "scenario."));
    if (sc["speed"])
        p.speed = parse_speed(sc["speed"]);

    if (root["sweep_over_n"])
    {
        spec.sweep_over_n = parse_range(root["sweep_over_n"]);
        if (sc["n"])
            fail(sc["n"], "scenario.n", "give either scenario.n or sweep_over_n");
        p.n = spec.sweep_over_n->first;
    }
    else
    {
        p.n = required<int>(sc, "n", "scenario.");
    }

    if (root["sim"])
        spec.sim = parse_sim(root["sim"]);
    if (root["output_dir"])
        spec.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
    if (YAML::Node const f = root["formats"])
    {
        if (!f.IsSequence())
            fail(f, "formats", "expected a list");
        spec.formats = {false, false, false};
        for (auto const& item : f)
        {
            auto const s = scalar<std::string>(item, "formats");
            if (s == "csv")
                spec.formats.csv = true;
            else if (s == "json")
                spec.formats.json = true;
            else if (s == "frames")
                spec.formats.frames = true;
            else
                fail(item, "formats", "expected csv, json or frames, got " + s);
        }
    }
    spec.validate();
    return spec;
}

RunSpec default_spec()
{
    RunSpec spec;
    spec.scenario.R0 = 1000;
    spec.scenario.r = 100;
    spec.scenario.VT = 1;
    spec.scenario.alpha = degrees(10);
    spec.scenario.n = 2;
    spec.scenario.speed = SpeedSpec::times_critical(1.1);
    spec.sweep_over_n = TeamRange{2, 16, 2};
    return spec;
}

}  // namespace pincer
