/** @file schedule.hpp
 *  @brief Multi-cycle sweep schedule and total detection time.
 */
#pragma once

#include <string>
#include <vector>

#include "analytics.hpp"
#include "scenario.hpp"

namespace pincer {

struct CycleRecord
{
    int index = 0;
    double R = 0;
    double R_tilde = 0;
    double T_spiral = 0;
    double delta = 0;
    double delta_eff = 0;
    double T_in = 0;
    double R_next = 0;
    /// Offset angle evaluated at this cycle's radius (NaN when undefined).
    double gamma_i = 0;
};

struct ClosedFormTimes
{
    double T_tilde_in = 0;       ///< summed, authoritative
    double T_tilde_spiral = 0;   ///< summed, authoritative
    double in_verbatim = 0;      ///< printed inward-time closed form
    double in_normalized = 0;    ///< same with the power read as c2^(N-1)
    double spiral_recursive = 0; ///< geometric-series form of T_{i+1}=c2 T_i+c3
    double spiral_expanded = 0;  ///< fully expanded spiral-time form
    double dev_in_verbatim = 0;
    double dev_in_normalized = 0;
    double dev_spiral_recursive = 0;
    double dev_spiral_expanded = 0;
};

struct EndGame
{
    int eta = 0;
    double T_last = 0;
    double T_in_last = 0;
    double T_l = 0;
    double T_in_f = 0;
    double epsilon = 0;
    double epsilon_c = 0;
    int eta_from_epsilon = 0;
    bool t_last_clamped = false;
};

struct SweepSchedule
{
    ScenarioParams params;
    DerivedConstants constants;
    std::vector<CycleRecord> cycles;
    int N_n = 0;
    int N_closed_form = 0;
    double R_hat_N = 0;
    double R_N = 0;
    double R_N_closed_form = 0;
    double T_tilde_in = 0;
    double T_tilde_spiral = 0;
    ClosedFormTimes closed_forms;
    EndGame end;
    int eta = 0;
    double T_last = 0;
    double T_in_last = 0;
    double T_l = 0;
    double T_in_f = 0;
    double T_in_total = 0;
    double T_spiral_total = 0;
    double T_total = 0;
    std::vector<std::string> diagnostics;
};

/// One spiral sweep followed by one inward dash from radius R_i.
CycleRecord cycle_step(double R_i, DerivedConstants const& c, ScenarioParams const& p);

/// Closed-form sweep count with the 2r estimate of the final radius.
int num_sweeps(ScenarioParams const& p, DerivedConstants const& c);

/// Closed-form reduced radius R_N - r after N sweeps.
double final_reduced_radius(ScenarioParams const& p, DerivedConstants const& c, int N);

/// Final region radius R_N after N sweeps (closed form).
double final_radius(ScenarioParams const& p, DerivedConstants const& c, int N);

ClosedFormTimes closed_form_times(ScenarioParams const& p,
                                  DerivedConstants const& c,
                                  std::vector<CycleRecord> const& cycles);

EndGame end_game(ScenarioParams const& p, DerivedConstants const& c, double R_N);

/// Throws InfeasibleSpeed when the resolved speed is not above critical.
SweepSchedule build_schedule(ScenarioParams const& params);

}  // namespace pincer
