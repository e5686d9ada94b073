/** @file analytics.hpp
 *  @brief Speed benchmarks and the spiral trajectory solution.
 */
#pragma once

#include "scenario.hpp"

namespace pincer {

struct SpeedBenchmarks
{
    double v_lb = 0;
    double v_simplified = 0;
    double v_critical = 0;
    double residual = 0;  ///< |g(v_critical)| / 2r
    int iterations = 0;
    bool used_bisection = false;
};

struct DerivedConstants
{
    double gamma = 0;
    double phi = 0;
    double lambda = 1;
    double c1 = 0;
    double c2 = 1;
    double c3 = 0;
    double Vs = 0;           ///< resolved sweeper speed
    double sweep_angle = 0;  ///< 2pi/n - gamma
    /// (lambda - 1) / VT, finite at VT = 0
    double spiral_time_factor = 0;
    SpeedBenchmarks speeds;
};

double lower_bound_speed(int n, double R0, double r, double VT);

/// Angle swept by one sweeper per cycle.
double sweep_angle(int n, double gamma);

double lambda_factor(int n, double gamma, double Vs, double VT);

/// (lambda - 1) / VT, using the VT -> 0 limit angle / Vs.
double lambda_minus_one_over_vt(int n, double gamma, double Vs, double VT);

double simplified_critical_speed(int n, double R0, double r, double gamma, double VT);

/// g(v) = (R0 - r)(lambda(v) - 1) - 2 r v / (v + VT).
double critical_residual(ScenarioParams const& p, double gamma, double v);

/// Exact critical speed; Newton from the simplified speed with a bisection
/// fallback.
SpeedBenchmarks critical_speed(ScenarioParams const& params);

double spiral_theta(double t, double Ri, double r, double Vs, double VT);
double spiral_radius(double theta, double Ri, double r, double Vs, double VT);

/// Absolute sweeper speed for the scenario's speed spec.
double resolve_speed(ScenarioParams const& params, SpeedBenchmarks const& b);

/// Constants for the resolved speed. No feasibility gate is applied.
DerivedConstants derive_constants(ScenarioParams const& params);

}  // namespace pincer
