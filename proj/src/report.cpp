#include "pincer/report.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "pincer/analytics.hpp"
#include "pincer/errors.hpp"

namespace pincer {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b)
{
    return a == b || (std::isnan(a) && std::isnan(b));
}

nlohmann::json number_json(double v)
{
    return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

double number_from(nlohmann::json const& j)
{
    return j.is_null() ? nan : j.get<double>();
}

template <class T>
nlohmann::json optional_json(std::optional<T> const& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> optional_from(nlohmann::json const& j)
{
    if (j.is_null())
        return std::nullopt;
    return j.get<T>();
}

std::string optional_text(std::optional<int> const& v)
{
    return v ? std::to_string(*v) : std::string();
}

}  // namespace

double quantize(double v)
{
    if (!std::isfinite(v))
        return v;
    return std::strtod(fmt::format("{:.12g}", v).c_str(), nullptr);
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return {};
    return fmt::format("{:.12g}", v);
}

bool same_row(ResultRow const& a, ResultRow const& b)
{
    auto same_opt = [](std::optional<double> const& x, std::optional<double> const& y) {
        return x.has_value() == y.has_value() && (!x || same(*x, *y));
    };
    return a.n == b.n && same(a.v_lb, b.v_lb) && same(a.v_simplified, b.v_simplified)
           && same(a.v_critical, b.v_critical) && a.N_n == b.N_n && same(a.R_N, b.R_N)
           && a.eta == b.eta && same(a.T_tilde_spiral, b.T_tilde_spiral)
           && same(a.T_tilde_in, b.T_tilde_in) && same(a.T_last, b.T_last)
           && same(a.T_l, b.T_l) && same(a.T_in_last, b.T_in_last)
           && same(a.T_in_f, b.T_in_f) && same(a.T_spiral_total, b.T_spiral_total)
           && same(a.T_in_total, b.T_in_total) && same(a.T_total, b.T_total)
           && same_opt(a.sim_clear_time, b.sim_clear_time) && a.sim_verdict == b.sim_verdict;
}

ResultRow make_row(ScenarioParams const& params)
{
    params.validate();
    DerivedConstants const c = derive_constants(params);
    ResultRow row;
    row.n = params.n;
    row.v_lb = quantize(c.speeds.v_lb);
    row.v_simplified = quantize(c.speeds.v_simplified);
    row.v_critical = quantize(c.speeds.v_critical);
    try
    {
        SweepSchedule const s = build_schedule(params);
        row.N_n = s.N_n;
        row.R_N = quantize(s.R_N);
        row.eta = s.eta;
        row.T_tilde_spiral = quantize(s.T_tilde_spiral);
        row.T_tilde_in = quantize(s.T_tilde_in);
        row.T_last = quantize(s.T_last);
        row.T_l = quantize(s.T_l);
        row.T_in_last = quantize(s.T_in_last);
        row.T_in_f = quantize(s.T_in_f);
        row.T_spiral_total = quantize(s.T_spiral_total);
        row.T_in_total = quantize(s.T_in_total);
        row.T_total = quantize(s.T_total);
    }
    catch (InfeasibleSpeed const&)
    {
        for (double* f : {&row.R_N, &row.T_tilde_spiral, &row.T_tilde_in, &row.T_last,
                          &row.T_l, &row.T_in_last, &row.T_in_f, &row.T_spiral_total,
                          &row.T_in_total, &row.T_total})
            *f = nan;
        row.sim_verdict = "INFEASIBLE";
    }
    return row;
}

TableResult run_table(RunSpec const& spec)
{
    spec.validate();
    std::vector<std::future<ResultRow>> jobs;
    for (int n : spec.team_sizes())
    {
        ScenarioParams p = spec.scenario;
        p.n = n;
        jobs.push_back(std::async(std::launch::async, [p] { return make_row(p); }));
    }
    TableResult out;
    for (auto& j : jobs)
    {
        out.rows.push_back(j.get());
        auto const& row = out.rows.back();
        if (!row.feasible())
        {
            out.exit_code = 2;
            out.diagnostics.push_back(fmt::format(
                "n={}: speed does not exceed the critical speed {}", row.n,
                format_number(row.v_critical)));
        }
    }
    return out;
}

SimValidation run_sim_validation(RunSpec const& spec, std::vector<ResultRow>& rows)
{
    if (!spec.sim)
        throw ValidationError("simulation requested without a sim section");
    SimConfig base = *spec.sim;
    SimValidation out;
    if (base.frame_interval > 0 && !spec.formats.frames)
        out.diagnostics.push_back("warning: frame_interval set but frames not requested; "
                                  "frames skipped");
    if (spec.formats.frames && !(base.frame_interval > 0))
    {
        base.frame_interval = 50;
        out.diagnostics.push_back("frame_interval not set; using 50");
    }

    std::vector<std::future<SimOutcome>> jobs(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        if (!rows[k].feasible() && !base.force)
            continue;
        ScenarioParams p = spec.scenario;
        p.n = rows[k].n;
        SimConfig c = base;
        if (spec.formats.frames)
            c.frame_dir = (std::filesystem::path(spec.output_dir)
                           / fmt::format("frames_n{}", rows[k].n))
                              .string();
        else
            c.frame_dir.clear();
        jobs[k] = std::async(std::launch::async, [p, c] { return run(p, c); });
    }
    out.outcomes.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        if (!jobs[k].valid())
        {
            out.diagnostics.push_back(
                fmt::format("n={}: infeasible speed, simulation skipped", rows[k].n));
            continue;
        }
        SimOutcome o = jobs[k].get();
        rows[k].sim_verdict = to_string(o.verdict);
        if (o.verdict == Verdict::cleared)
            rows[k].sim_clear_time = quantize(o.clear_time);
        else
            rows[k].sim_clear_time.reset();
        if (o.verdict == Verdict::escaped)
            out.escaped = true;
        for (auto const& d : o.diagnostics)
            out.diagnostics.push_back(fmt::format("n={}: {}", rows[k].n, d));
        out.outcomes[k] = std::move(o);
    }
    return out;
}

void write_csv(std::vector<ResultRow> const& rows, std::ostream& out)
{
    for (std::size_t k = 0; k < result_columns.size(); ++k)
        out << (k ? "," : "") << result_columns[k];
    out << '\n';
    for (auto const& r : rows)
    {
        out << r.n << ',' << format_number(r.v_lb) << ',' << format_number(r.v_simplified) << ','
            << format_number(r.v_critical) << ',' << optional_text(r.N_n) << ','
            << format_number(r.R_N) << ',' << optional_text(r.eta) << ','
            << format_number(r.T_tilde_spiral) << ',' << format_number(r.T_tilde_in) << ','
            << format_number(r.T_last) << ',' << format_number(r.T_l) << ','
            << format_number(r.T_in_last) << ',' << format_number(r.T_in_f) << ','
            << format_number(r.T_spiral_total) << ',' << format_number(r.T_in_total) << ','
            << format_number(r.T_total) << ','
            << (r.sim_clear_time ? format_number(*r.sim_clear_time) : "") << ','
            << r.sim_verdict.value_or("") << '\n';
    }
}

void write_json(std::vector<ResultRow> const& rows, std::ostream& out)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto const& r : rows)
    {
        nlohmann::ordered_json j;
        j["n"] = r.n;
        j["v_lb"] = number_json(r.v_lb);
        j["v_simplified"] = number_json(r.v_simplified);
        j["v_critical"] = number_json(r.v_critical);
        j["N_n"] = optional_json(r.N_n);
        j["R_N"] = number_json(r.R_N);
        j["eta"] = optional_json(r.eta);
        j["T_tilde_spiral"] = number_json(r.T_tilde_spiral);
        j["T_tilde_in"] = number_json(r.T_tilde_in);
        j["T_last"] = number_json(r.T_last);
        j["T_l"] = number_json(r.T_l);
        j["T_in_last"] = number_json(r.T_in_last);
        j["T_in_f"] = number_json(r.T_in_f);
        j["T_spiral_total"] = number_json(r.T_spiral_total);
        j["T_in_total"] = number_json(r.T_in_total);
        j["T_total"] = number_json(r.T_total);
        j["sim_clear_time"] = optional_json(r.sim_clear_time);
        j["sim_verdict"] = optional_json(r.sim_verdict);
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

std::vector<ResultRow> read_json(std::istream& in)
{
    nlohmann::json arr;
    try
    {
        arr = nlohmann::json::parse(in);
    }
    catch (nlohmann::json::parse_error const& e)
    {
        throw ParseError(e.what(), 0, "");
    }
    if (!arr.is_array())
        throw ParseError("result table must be a JSON array", 0, "");
    std::vector<ResultRow> rows;
    for (auto const& j : arr)
    {
        for (auto const col : result_columns)
            if (!j.contains(std::string(col)))
                throw ParseError("missing column " + std::string(col), 0, std::string(col));
        ResultRow r;
        r.n = j["n"].get<int>();
        r.v_lb = number_from(j["v_lb"]);
        r.v_simplified = number_from(j["v_simplified"]);
        r.v_critical = number_from(j["v_critical"]);
        r.N_n = optional_from<int>(j["N_n"]);
        r.R_N = number_from(j["R_N"]);
        r.eta = optional_from<int>(j["eta"]);
        r.T_tilde_spiral = number_from(j["T_tilde_spiral"]);
        r.T_tilde_in = number_from(j["T_tilde_in"]);
        r.T_last = number_from(j["T_last"]);
        r.T_l = number_from(j["T_l"]);
        r.T_in_last = number_from(j["T_in_last"]);
        r.T_in_f = number_from(j["T_in_f"]);
        r.T_spiral_total = number_from(j["T_spiral_total"]);
        r.T_in_total = number_from(j["T_in_total"]);
        r.T_total = number_from(j["T_total"]);
        r.sim_clear_time = optional_from<double>(j["sim_clear_time"]);
        r.sim_verdict = optional_from<std::string>(j["sim_verdict"]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string to_csv(std::vector<ResultRow> const& rows)
{
    std::ostringstream s;
    write_csv(rows, s);
    return s.str();
}

std::string to_json(std::vector<ResultRow> const& rows)
{
    std::ostringstream s;
    write_json(rows, s);
    return s.str();
}

void write_schedule_csv(SweepSchedule const& s, std::ostream& out)
{
    out << "index,R,R_tilde,T_spiral,delta,delta_eff,T_in,R_next,gamma_i\n";
    for (auto const& c : s.cycles)
        out << c.index << ',' << format_number(c.R) << ',' << format_number(c.R_tilde) << ','
            << format_number(c.T_spiral) << ',' << format_number(c.delta) << ','
            << format_number(c.delta_eff) << ',' << format_number(c.T_in) << ','
            << format_number(c.R_next) << ',' << format_number(c.gamma_i) << '\n';
}

void write_schedule_json(SweepSchedule const& s, std::ostream& out)
{
    auto num = [](double v) { return number_json(quantize(v)); };
    nlohmann::ordered_json j;
    j["n"] = s.params.n;
    j["Vs"] = num(s.constants.Vs);
    j["gamma"] = num(s.constants.gamma);
    j["lambda"] = num(s.constants.lambda);
    nlohmann::ordered_json cycles = nlohmann::ordered_json::array();
    for (auto const& c : s.cycles)
        cycles.push_back({{"index", c.index},
                          {"R", num(c.R)},
                          {"R_tilde", num(c.R_tilde)},
                          {"T_spiral", num(c.T_spiral)},
                          {"delta", num(c.delta)},
                          {"delta_eff", num(c.delta_eff)},
                          {"T_in", num(c.T_in)},
                          {"R_next", num(c.R_next)},
                          {"gamma_i", num(c.gamma_i)}});
    j["cycles"] = std::move(cycles);
    j["N_n"] = s.N_n;
    j["N_closed_form"] = s.N_closed_form;
    j["R_N"] = num(s.R_N);
    j["R_N_closed_form"] = num(s.R_N_closed_form);
    j["eta"] = s.eta;
    j["epsilon"] = num(s.end.epsilon);
    j["epsilon_c"] = num(s.end.epsilon_c);
    j["T_tilde_spiral"] = num(s.T_tilde_spiral);
    j["T_tilde_in"] = num(s.T_tilde_in);
    j["T_last"] = num(s.T_last);
    j["T_l"] = num(s.T_l);
    j["T_in_last"] = num(s.T_in_last);
    j["T_in_f"] = num(s.T_in_f);
    j["T_spiral_total"] = num(s.T_spiral_total);
    j["T_in_total"] = num(s.T_in_total);
    j["T_total"] = num(s.T_total);
    j["diagnostics"] = s.diagnostics;
    out << j.dump(2) << '\n';
}

}  // namespace pincer
