/** @file scenario.hpp
 *  @brief Problem instance: region, team, sensor and speeds.
 */
#pragma once

namespace pincer {

struct SpeedSpec
{
    enum class Kind
    {
        absolute,
        multiplier
    };
    Kind kind = Kind::multiplier;
    double value = 1.1;

    static SpeedSpec absolute_speed(double vs) { return {Kind::absolute, vs}; }
    static SpeedSpec times_critical(double m) { return {Kind::multiplier, m}; }
};

struct ScenarioParams
{
    int n = 2;         ///< team size, even
    double R0 = 1000;  ///< initial region radius
    double r = 100;    ///< sensor half-length
    double alpha = 0;  ///< fan half-angle [rad]
    double VT = 1;     ///< evader speed
    SpeedSpec speed;

    /// Throws ValidationError / OddTeamSize when an invariant is violated.
    void validate() const;
};

}  // namespace pincer
