#include "pincer/geometry.hpp"

#include <string>

#include "pincer/analytics.hpp"
#include "pincer/errors.hpp"

namespace pincer {

double normalize_angle(double a)
{
    double m = std::fmod(a, two_pi);
    if (m < 0)
        m += two_pi;
    // fmod of a tiny negative value can round up to exactly 2pi
    if (m >= two_pi)
        m = 0;
    return m;
}

void SensorGeometry::validate() const
{
    if (!(r > 0))
        throw ValidationError("sensor: r must be positive");
    if (!(alpha >= 0 && alpha < std::numbers::pi / 2))
        throw ValidationError("sensor: alpha must lie in [0, pi/2)");
}

double gamma_offset(double R0, double r, double alpha)
{
    double const ca = std::cos(alpha);
    double const den = 2 * R0 * (R0 + r * ca - 2 * r);
    if (!(den > 0))
        throw DomainError("gamma_offset: R0 must exceed 2r - r cos(alpha)");
    double const num = 2 * R0 * R0 + 2 * R0 * r * (ca - 2) + r * r * ca * (ca - 2);
    double arg = num / den;
    // Rounding can push the argument a few ulps past 1 for tiny sensors.
    if (arg > 1 && arg < 1 + 1e-14)
        arg = 1;
    if (!(arg >= -1 && arg <= 1))
        throw DomainError("gamma_offset: arccos argument " + std::to_string(arg)
                          + " outside [-1, 1]; sensor too large for region");
    return std::acos(arg);
}

double phi_heading(double Vs, double VT)
{
    if (!(VT >= 0))
        throw DomainError("phi_heading: VT must be non-negative");
    if (!(Vs > VT))
        throw InfeasibleSpeed("phi_heading: sweeper speed must exceed evader speed");
    return std::asin(VT / Vs);
}

double spiral_heading(double psi, RotationSense s, double phi)
{
    return normalize_angle(psi + sign(s) * (std::numbers::pi / 2 - phi));
}

Deployment initial_deployment(ScenarioParams const& params)
{
    if (params.n % 2 != 0)
        throw OddTeamSize("team size must be even, got " + std::to_string(params.n));
    params.validate();
    DerivedConstants const c = derive_constants(params);

    Deployment d;
    d.gamma = c.gamma;
    d.sector_angle = sweep_angle(params.n, c.gamma);
    int const pairs = params.n / 2;
    for (int k = 0; k < pairs; ++k)
    {
        double const psi
            = normalize_angle(std::numbers::pi / 2 + k * two_pi / pairs);
        for (auto s : {RotationSense::counterclockwise, RotationSense::clockwise})
        {
            SweeperPose p;
            p.radial_distance = params.R0 - params.r;
            p.polar_angle = psi;
            p.rotation_sense = s;
            p.heading = spiral_heading(psi, s, c.phi);
            d.poses.push_back(p);
        }
        d.sector_half_pairs.emplace_back(2 * k, 2 * k + 1);
    }
    return d;
}

bool footprint_contains(SweeperPose const& pose, SensorGeometry const& sensor, Vec2 point)
{
    double const r = sensor.r;
    Vec2 const axis = unit(pose.polar_angle);
    Vec2 const d = point - pose.inner_tip(r);
    double const dist = d.norm();
    double const tol = 1e-12 * r;
    if (dist <= tol)
        return true;
    if (dist > 2 * r + tol)
        return false;
    return d.dot(axis) >= dist * std::cos(sensor.alpha) - tol;
}

}  // namespace pincer
