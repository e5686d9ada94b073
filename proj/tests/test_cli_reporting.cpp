#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "pincer/config.hpp"
#include "pincer/errors.hpp"
#include "pincer/report.hpp"

using namespace pincer;
using oracle::deg;

namespace {

constexpr char const* fig3_yaml = R"(scenario:
  R0: 1000
  r: 100
  VT: 1
  alpha_deg: 10
  speed:
    multiplier: 1.1
sweep_over_n:
  from: 2
  to: 16
  step: 2
formats: [csv, json]
)";

std::string with_range(int from, int to, int step = 2)
{
    return "scenario: {R0: 1000, r: 100, VT: 1, alpha_deg: 10}\n"
           "sweep_over_n: {from: "
           + std::to_string(from) + ", to: " + std::to_string(to)
           + ", step: " + std::to_string(step) + "}\n";
}

RunSpec single(int n, double multiplier, double alpha_deg = 10)
{
    RunSpec spec = default_spec();
    spec.sweep_over_n.reset();
    spec.scenario.n = n;
    spec.scenario.alpha = deg(alpha_deg);
    spec.scenario.speed = SpeedSpec::times_critical(multiplier);
    return spec;
}

}  // namespace

TEST_CASE("the sweep-time study config parses")
{
    RunSpec const spec = parse_config(fig3_yaml);
    CHECK(spec.scenario.R0 == 1000);
    CHECK(spec.scenario.r == 100);
    CHECK(spec.scenario.VT == 1);
    CHECK(spec.scenario.alpha == doctest::Approx(deg(10)).epsilon(1e-15));
    CHECK(spec.scenario.speed.kind == SpeedSpec::Kind::multiplier);
    CHECK(spec.scenario.speed.value == 1.1);
    CHECK(spec.team_sizes() == std::vector<int>{2, 4, 6, 8, 10, 12, 14, 16});
    CHECK(spec.formats.csv);
    CHECK(spec.formats.json);
    CHECK_FALSE(spec.formats.frames);
    CHECK_FALSE(spec.sim.has_value());
}

TEST_CASE("odd team sizes are rejected")
{
    CHECK_THROWS_AS(parse_config(with_range(3, 15)), ValidationError);
    CHECK_THROWS_AS(parse_config(with_range(2, 16, 1)), ValidationError);
    CHECK_THROWS_AS(parse_config("scenario: {n: 3, R0: 1000, r: 100, VT: 1, alpha_deg: 10}\n"),
                    ValidationError);
    CHECK_NOTHROW(parse_config(with_range(2, 16)));
}

TEST_CASE("missing and malformed fields name the field and line")
{
    std::string const missing_r0 = "scenario:\n  n: 4\n  r: 100\n  VT: 1\n  alpha_deg: 10\n";
    try
    {
        parse_config(missing_r0);
        FAIL("expected ParseError");
    }
    catch (ParseError const& e)
    {
        CHECK(e.field() == "scenario.R0");
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("R0") != std::string::npos);
    }

    std::string const bad_number
        = "scenario:\n  n: 4\n  R0: 1000\n  r: lots\n  VT: 1\n  alpha_deg: 10\n";
    try
    {
        parse_config(bad_number);
        FAIL("expected ParseError");
    }
    catch (ParseError const& e)
    {
        CHECK(e.field() == "scenario.r");
        CHECK(e.line() == 4);
    }

    std::string const typo
        = "scenario:\n  n: 4\n  R0: 1000\n  r: 100\n  VT: 1\n  alpha: 10\n";
    try
    {
        parse_config(typo);
        FAIL("expected ParseError");
    }
    catch (ParseError const& e)
    {
        CHECK(e.field() == "scenario.alpha");
        CHECK(e.line() == 6);
    }

    CHECK_THROWS_AS(parse_config("scenario: [1, 2\n"), ParseError);
    CHECK_THROWS_AS(parse_config(""), ParseError);
}

TEST_CASE("sim section and speeds parse")
{
    RunSpec const spec = parse_config(
        "scenario: {n: 4, R0: 1000, r: 100, VT: 1, alpha_deg: 30, speed: {absolute: 12}}\n"
        "sim: {grid_cells: 600, frame_interval: 100, driver: schedule, clear_during_dash: "
        "true}\n"
        "output_dir: out\n"
        "formats: [frames]\n");
    CHECK(spec.scenario.speed.kind == SpeedSpec::Kind::absolute);
    CHECK(spec.scenario.speed.value == 12);
    REQUIRE(spec.sim);
    CHECK(spec.sim->grid_cells == 600);
    CHECK(spec.sim->frame_interval == 100);
    CHECK(spec.sim->driver == Driver::schedule);
    CHECK(spec.sim->clear_during_dash);
    CHECK(spec.output_dir == "out");
    CHECK(spec.formats.frames);
    CHECK_FALSE(spec.formats.csv);

    CHECK_THROWS_AS(parse_config("scenario: {n: 4, R0: 1000, r: 100, VT: 1, alpha_deg: 10}\n"
                                 "formats: [frames]\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config("scenario: {n: 4, R0: 1000, r: 100, VT: 1, alpha_deg: 95}\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config("scenario: {n: 4, R0: 1000, r: 100, VT: 1, alpha_deg: 10}\n"
                                 "sim: {driver: spiral}\n"),
                    ParseError);
}

TEST_CASE("table has one row per team size and the exact header")
{
    TableResult const t = run_table(parse_config(fig3_yaml));
    CHECK(t.exit_code == 0);
    REQUIRE(t.rows.size() == 8);
    std::string const csv = to_csv(t.rows);
    CHECK(csv.substr(0, csv.find('\n'))
          == "n,v_lb,v_simplified,v_critical,N_n,R_N,eta,T_tilde_spiral,T_tilde_in,T_last,T_l,"
             "T_in_last,T_in_f,T_spiral_total,T_in_total,T_total,sim_clear_time,sim_verdict");

    // 40-digit oracle values printed with 12 significant digits
    auto const& r2 = t.rows.front();
    CHECK(r2.n == 2);
    CHECK(r2.v_lb == 15.7079632679);
    CHECK(r2.v_critical == 16.0165222665);
    CHECK(r2.N_n == 11);
    CHECK(r2.eta == 1);
    CHECK(r2.T_total == 1417.00660662);
    CHECK(csv.find("\n2,15.7079632679,15.1625629124,16.0165222665,11,179.493736504,1,")
          != std::string::npos);
    auto const& r16 = t.rows.back();
    CHECK(r16.n == 16);
    CHECK(r16.T_total == 1134.97640979);

    for (auto const& r : t.rows)
        CHECK(r.T_total == doctest::Approx(r.T_spiral_total + r.T_in_total).epsilon(1e-11));
}

TEST_CASE("tables are byte-identical across runs")
{
    RunSpec const spec = parse_config(fig3_yaml);
    CHECK(to_csv(run_table(spec).rows) == to_csv(run_table(spec).rows));
    CHECK(to_json(run_table(spec).rows) == to_json(run_table(spec).rows));
}

TEST_CASE("at a common absolute speed more sweepers finish sooner")
{
    RunSpec spec = default_spec();
    spec.scenario.speed = SpeedSpec::absolute_speed(20);
    TableResult const t = run_table(spec);
    REQUIRE(t.exit_code == 0);
    for (std::size_t k = 1; k < t.rows.size(); ++k)
        CHECK(t.rows[k].T_total < t.rows[k - 1].T_total);
}

TEST_CASE("infeasible rows are annotated and the run continues")
{
    RunSpec spec = default_spec();
    spec.scenario.speed = SpeedSpec::absolute_speed(5);
    TableResult const t = run_table(spec);
    CHECK(t.exit_code == 2);
    REQUIRE(t.rows.size() == 8);
    for (auto const& r : t.rows)
    {
        CAPTURE(r.n);
        bool const feasible = 5 > r.v_critical;
        CHECK(r.feasible() == feasible);
        if (!feasible)
        {
            CHECK(r.sim_verdict == "INFEASIBLE");
            CHECK(std::isnan(r.T_total));
        }
        else
        {
            CHECK(r.T_total > 0);
        }
    }
    CHECK_FALSE(t.rows.front().feasible());
    CHECK(t.rows.back().feasible());
    std::string const csv = to_csv(t.rows);
    CHECK(csv.find(",,,,,,,,,,,,,INFEASIBLE\n") != std::string::npos);
}

TEST_CASE("JSON round-trips rows exactly")
{
    RunSpec spec = default_spec();
    spec.scenario.speed = SpeedSpec::absolute_speed(5);
    std::vector<ResultRow> rows = run_table(spec).rows;
    rows.back().sim_clear_time = quantize(1234.56789012345);
    rows.back().sim_verdict = "CLEARED";
    std::istringstream in(to_json(rows));
    std::vector<ResultRow> const back = read_json(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
        CHECK(same_row(rows[k], back[k]));
    CHECK(to_csv(back) == to_csv(rows));

    std::istringstream bad("{\"n\": 2}");
    CHECK_THROWS_AS(read_json(bad), ParseError);
}

TEST_CASE("numbers carry 12 significant digits")
{
    CHECK(format_number(1.0 / 3) == "0.333333333333");
    CHECK(format_number(1417.006606620861) == "1417.00660662");
    CHECK(format_number(std::nan("")).empty());
    CHECK(quantize(1.0 / 3) == 0.333333333333);
    double const x = 2.718281828459045;
    CHECK(quantize(quantize(x)) == quantize(x));
}

TEST_CASE("simulation columns and frames")
{
    namespace fs = std::filesystem;
    fs::path const dir = fs::temp_directory_path() / "pincer_report_test";
    fs::remove_all(dir);

    RunSpec spec = single(4, 3.0, 30);
    spec.sim = SimConfig{};
    spec.sim->grid_cells = 200;
    spec.sim->frame_interval = 40;
    spec.output_dir = dir.string();

    SUBCASE("frames requested")
    {
        spec.formats.frames = true;
        std::vector<ResultRow> rows = run_table(spec).rows;
        SimValidation const v = run_sim_validation(spec, rows);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].sim_verdict == "CLEARED");
        REQUIRE(rows[0].sim_clear_time);
        CHECK_FALSE(v.escaped);
        REQUIRE(v.outcomes[0]);
        double const clear = v.outcomes[0]->clear_time;
        CHECK(*rows[0].sim_clear_time == quantize(clear));
        int const expected = static_cast<int>(std::floor(clear / 40)) + 1;
        int svg = 0;
        for (auto const& e : fs::directory_iterator(dir / "frames_n4"))
            svg += e.path().extension() == ".svg";
        CHECK(svg == expected);
        CHECK(fs::exists(dir / "frames_n4" / "manifest.csv"));
    }
    SUBCASE("frames not requested")
    {
        std::vector<ResultRow> rows = run_table(spec).rows;
        SimValidation const v = run_sim_validation(spec, rows);
        CHECK(rows[0].sim_verdict == "CLEARED");
        CHECK_FALSE(fs::exists(dir / "frames_n4"));
        bool warned = false;
        for (auto const& d : v.diagnostics)
            warned = warned || d.find("frames skipped") != std::string::npos;
        CHECK(warned);
    }
    SUBCASE("infeasible rows are skipped unless forced")
    {
        spec.scenario.speed = SpeedSpec::times_critical(0.9);
        spec.sim->grid_cells = 300;
        std::vector<ResultRow> rows = run_table(spec).rows;
        SimValidation v = run_sim_validation(spec, rows);
        CHECK(rows[0].sim_verdict == "INFEASIBLE");
        CHECK_FALSE(v.outcomes[0]);

        spec.sim->force = true;
        v = run_sim_validation(spec, rows);
        CHECK(rows[0].sim_verdict != "CLEARED");
        CHECK_FALSE(rows[0].sim_clear_time);
        REQUIRE(v.outcomes[0]);
        CHECK(v.escaped == (v.outcomes[0]->verdict == Verdict::escaped));
    }
    fs::remove_all(dir);
}
