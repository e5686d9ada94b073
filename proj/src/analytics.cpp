#include "pincer/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pincer/errors.hpp"
#include "pincer/geometry.hpp"

namespace pincer {

void ScenarioParams::validate() const
{
    if (n % 2 != 0)
        throw OddTeamSize("n must be even, got " + std::to_string(n));
    if (n < 2)
        throw ValidationError("n must be at least 2");
    if (!(r > 0 && std::isfinite(r)))
        throw ValidationError("r must be positive");
    if (!(R0 > r && std::isfinite(R0)))
        throw ValidationError("R0 must exceed r");
    if (!(alpha >= 0 && alpha < std::numbers::pi / 2))
        throw ValidationError("alpha must lie in [0, pi/2)");
    if (!(VT >= 0 && std::isfinite(VT)))
        throw ValidationError("VT must be non-negative");
    if (!(speed.value > 0 && std::isfinite(speed.value)))
        throw ValidationError("speed value must be positive");
    if (speed.kind == SpeedSpec::Kind::multiplier && VT == 0)
        throw ValidationError(
            "a speed multiplier needs VT > 0 (critical speed is 0); give Vs");
    double const gamma = gamma_offset(R0, r, alpha);
    if (!(sweep_angle(n, gamma) > 0))
        throw ValidationError("sensor offset covers the whole sector (2pi/n <= gamma)");
}

double lower_bound_speed(int n, double R0, double r, double VT)
{
    if (n < 1 || !(r > 0))
        throw ValidationError("lower_bound_speed: need n >= 1 and r > 0");
    return std::numbers::pi * R0 * VT / (n * r);
}

double sweep_angle(int n, double gamma)
{
    return two_pi / n - gamma;
}

double lambda_factor(int n, double gamma, double Vs, double VT)
{
    if (!(Vs > VT))
        throw InfeasibleSpeed("lambda_factor: Vs must exceed VT");
    return std::exp(sweep_angle(n, gamma) * VT / std::sqrt(Vs * Vs - VT * VT));
}

double lambda_minus_one_over_vt(int n, double gamma, double Vs, double VT)
{
    if (!(Vs > VT))
        throw InfeasibleSpeed("lambda_factor: Vs must exceed VT");
    double const w = std::sqrt(Vs * Vs - VT * VT);
    double const a = sweep_angle(n, gamma);
    if (VT == 0)
        return a / w;
    return std::expm1(a * VT / w) / VT;
}

double simplified_critical_speed(int n, double R0, double r, double gamma, double VT)
{
    if (!(R0 > r))
        throw DomainError("simplified_critical_speed: R0 must exceed r");
    double const a = sweep_angle(n, gamma);
    double const l = std::log((R0 + r) / (R0 - r));
    return VT * std::sqrt(a * a / (l * l) + 1);
}

double critical_residual(ScenarioParams const& p, double gamma, double v)
{
    double const lm1 = std::expm1(sweep_angle(p.n, gamma) * p.VT
                                  / std::sqrt(v * v - p.VT * p.VT));
    return (p.R0 - p.r) * lm1 - 2 * p.r * v / (v + p.VT);
}

namespace {

double residual_derivative(ScenarioParams const& p, double gamma, double v)
{
    double const a = sweep_angle(p.n, gamma);
    double const w2 = v * v - p.VT * p.VT;
    double const w = std::sqrt(w2);
    double const lam = std::exp(a * p.VT / w);
    double const dlam = -lam * a * p.VT * v / (w2 * w);
    double const s = v + p.VT;
    return (p.R0 - p.r) * dlam - 2 * p.r * p.VT / (s * s);
}

}  // namespace

SpeedBenchmarks critical_speed(ScenarioParams const& params)
{
    params.validate();
    double const gamma = gamma_offset(params.R0, params.r, params.alpha);
    SpeedBenchmarks b;
    b.v_lb = lower_bound_speed(params.n, params.R0, params.r, params.VT);
    b.v_simplified
        = simplified_critical_speed(params.n, params.R0, params.r, gamma, params.VT);
    if (params.VT == 0)
        return b;  // any positive speed confines a stationary region

    double const scale = 2 * params.r;
    auto g = [&](double v) { return critical_residual(params, gamma, v); };

    constexpr int max_newton = 100;
    constexpr double tol = 1e-12;
    double v = b.v_simplified;
    bool ok = false;
    for (int it = 1; it <= max_newton; ++it)
    {
        double const gv = g(v);
        b.iterations = it;
        if (std::abs(gv) / scale < tol)
        {
            ok = true;
            break;
        }
        double const dg = residual_derivative(params, gamma, v);
        if (!(dg < 0) || !std::isfinite(gv))
            break;
        double next = v - gv / dg;
        if (!(next > params.VT))
            next = 0.5 * (v + params.VT);
        v = next;
    }

    if (!ok)
    {
        // g is strictly decreasing from +inf at VT to -2r at infinity
        double lo = params.VT * (1 + 1e-9);
        double hi = std::max(2 * params.VT, b.v_simplified);
        int guard = 0;
        while (g(hi) >= 0)
        {
            lo = hi;
            hi *= 2;
            if (++guard > 2000)
                throw InfeasibleScenario("critical_speed: no sign change found");
        }
        if (!(g(lo) > 0))
            throw InfeasibleScenario("critical_speed: no root above VT");
        for (int it = 0; it < 400; ++it)
        {
            double const mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            (g(mid) > 0 ? lo : hi) = mid;
        }
        v = 0.5 * (lo + hi);
        b.used_bisection = true;
    }
    b.v_critical = v;
    b.residual = std::abs(g(v)) / scale;
    return b;
}

double spiral_theta(double t, double Ri, double r, double Vs, double VT)
{
    if (!(t >= 0) || !(Ri > r) || !(Vs > VT))
        throw DomainError("spiral_theta: need t >= 0, Ri > r, Vs > VT");
    double const w = std::sqrt(Vs * Vs - VT * VT);
    if (VT == 0)
        return Vs * t / (Ri - r);
    return w / VT * std::log1p(VT * t / (Ri - r));
}

double spiral_radius(double theta, double Ri, double r, double Vs, double VT)
{
    if (!(theta >= 0) || !(Vs > VT))
        throw DomainError("spiral_radius: need theta >= 0, Vs > VT");
    return (Ri - r) * std::exp(VT * theta / std::sqrt(Vs * Vs - VT * VT));
}

double resolve_speed(ScenarioParams const& params, SpeedBenchmarks const& b)
{
    if (params.speed.kind == SpeedSpec::Kind::absolute)
        return params.speed.value;
    return params.speed.value * b.v_critical;
}

DerivedConstants derive_constants(ScenarioParams const& params)
{
    params.validate();
    DerivedConstants c;
    c.gamma = gamma_offset(params.R0, params.r, params.alpha);
    c.speeds = critical_speed(params);
    c.Vs = resolve_speed(params, c.speeds);
    double const Vs = c.Vs;
    double const VT = params.VT;
    c.phi = phi_heading(Vs, VT);
    c.sweep_angle = sweep_angle(params.n, c.gamma);
    c.lambda = lambda_factor(params.n, c.gamma, Vs, VT);
    c.spiral_time_factor = lambda_minus_one_over_vt(params.n, c.gamma, Vs, VT);
    c.c1 = -2 * params.r * Vs / (Vs + VT);
    c.c2 = 1 + Vs * VT * c.spiral_time_factor / (Vs + VT);
    c.c3 = c.c1 * c.spiral_time_factor;
    return c;
}

}  // namespace pincer
