/** @file report.hpp
 *  @brief Result tables for team-size studies and their CSV/JSON forms.
 *
 *  Every floating-point value is rounded to 12 significant digits when a
 *  row is built, so text output and parsed-back rows agree exactly.
 */
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "schedule.hpp"
#include "worstcase_sim.hpp"

namespace pincer {

/// One team size. Schedule columns are empty (NaN / nullopt) when the
/// speed does not exceed the critical speed.
struct ResultRow
{
    int n = 0;
    double v_lb = 0;
    double v_simplified = 0;
    double v_critical = 0;
    std::optional<int> N_n;
    double R_N = 0;
    std::optional<int> eta;
    double T_tilde_spiral = 0;
    double T_tilde_in = 0;
    double T_last = 0;
    double T_l = 0;
    double T_in_last = 0;
    double T_in_f = 0;
    double T_spiral_total = 0;
    double T_in_total = 0;
    double T_total = 0;
    std::optional<double> sim_clear_time;
    std::optional<std::string> sim_verdict;

    bool feasible() const { return N_n.has_value(); }
};

/// Equality that treats two NaN values as equal.
bool same_row(ResultRow const& a, ResultRow const& b);

inline constexpr std::array<std::string_view, 18> result_columns = {
    "n",          "v_lb",      "v_simplified", "v_critical",     "N_n",
    "R_N",        "eta",       "T_tilde_spiral", "T_tilde_in",   "T_last",
    "T_l",        "T_in_last", "T_in_f",       "T_spiral_total", "T_in_total",
    "T_total",    "sim_clear_time", "sim_verdict"};

/// Round to 12 significant digits.
double quantize(double v);
/// 12-significant-digit text; empty for NaN.
std::string format_number(double v);

/// Speeds and schedule for one scenario; infeasible speeds give a row
/// annotated with sim_verdict "INFEASIBLE".
ResultRow make_row(ScenarioParams const& params);

struct TableResult
{
    std::vector<ResultRow> rows;
    std::vector<std::string> diagnostics;
    int exit_code = 0;  ///< 2 when any row is infeasible
};

/// One row per team size, in increasing n. Rows are computed concurrently.
TableResult run_table(RunSpec const& spec);

struct SimValidation
{
    /// One per row, same order; empty for rows that were not simulated.
    std::vector<std::optional<SimOutcome>> outcomes;
    std::vector<std::string> diagnostics;
    bool escaped = false;
};

/// Run the simulator for every row and fill the sim columns. Rows whose
/// speed is infeasible are skipped unless the sim config forces them.
/// Frames go to <output_dir>/frames_n<n> when frames are among the output
/// formats.
SimValidation run_sim_validation(RunSpec const& spec, std::vector<ResultRow>& rows);

void write_csv(std::vector<ResultRow> const& rows, std::ostream& out);
void write_json(std::vector<ResultRow> const& rows, std::ostream& out);
std::vector<ResultRow> read_json(std::istream& in);

std::string to_csv(std::vector<ResultRow> const& rows);
std::string to_json(std::vector<ResultRow> const& rows);

/// Per-cycle schedule table.
void write_schedule_csv(SweepSchedule const& s, std::ostream& out);
void write_schedule_json(SweepSchedule const& s, std::ostream& out);

}  // namespace pincer
