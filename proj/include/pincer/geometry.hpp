/** @file geometry.hpp
 *  @brief Fan footprint, back-to-back deployment and placement angles.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "scenario.hpp"

namespace pincer {

inline constexpr double two_pi = 2 * std::numbers::pi;

struct Vec2
{
    double x = 0;
    double y = 0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 unit(double angle)
{
    return {std::cos(angle), std::sin(angle)};
}

/// Map an angle to [0, 2pi).
double normalize_angle(double a);

enum class FootprintModel
{
    sector_apex_inner
};

struct SensorGeometry
{
    double r = 0;
    double alpha = 0;
    FootprintModel model = FootprintModel::sector_apex_inner;

    void validate() const;
};

enum class RotationSense
{
    clockwise,
    counterclockwise
};

inline double sign(RotationSense s)
{
    return s == RotationSense::counterclockwise ? 1.0 : -1.0;
}

inline RotationSense flipped(RotationSense s)
{
    return s == RotationSense::counterclockwise ? RotationSense::clockwise
                                                : RotationSense::counterclockwise;
}

/// Sensor centre in polar form. The central line is radial.
struct SweeperPose
{
    double radial_distance = 0;
    double polar_angle = 0;
    double heading = 0;
    RotationSense rotation_sense = RotationSense::counterclockwise;

    Vec2 center() const { return unit(polar_angle) * radial_distance; }
    /// Inner end of the central line (apex of the fan).
    Vec2 inner_tip(double r) const
    {
        return unit(polar_angle) * (radial_distance - r);
    }
    Vec2 outer_tip(double r) const
    {
        return unit(polar_angle) * (radial_distance + r);
    }
};

struct Deployment
{
    std::vector<SweeperPose> poses;
    /// (ccw index, cw index) for every back-to-back pair
    std::vector<std::pair<int, int>> sector_half_pairs;
    double sector_angle = 0;
    double gamma = 0;
};

/// Angular offset of the sensor centre so neighbouring fans touch on the
/// region boundary.
double gamma_offset(double R0, double r, double alpha);

/// Outward heading offset that keeps pace with the expanding boundary.
double phi_heading(double Vs, double VT);

/// Heading of a sweeper moving along the spiral at polar angle psi.
double spiral_heading(double psi, RotationSense s, double phi);

Deployment initial_deployment(ScenarioParams const& params);

/// Closed circular sector of radius 2r and half-angle alpha, apex at the
/// inner tip, axis along the central line.
bool footprint_contains(SweeperPose const& pose,
                        SensorGeometry const& sensor,
                        Vec2 point);

}  // namespace pincer
