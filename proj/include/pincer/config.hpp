/** @file config.hpp
 *  @brief Run specification and its YAML parser.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "worstcase_sim.hpp"

namespace pincer {

/// Inclusive range of even team sizes.
struct TeamRange
{
    int first = 2;
    int last = 2;
    int step = 2;

    std::vector<int> values() const;
};

struct OutputFormats
{
    bool csv = true;
    bool json = false;
    bool frames = false;
};

struct RunSpec
{
    ScenarioParams scenario;
    std::optional<TeamRange> sweep_over_n;
    std::optional<SimConfig> sim;
    std::string output_dir = ".";
    OutputFormats formats;

    /// Team sizes to evaluate: the sweep range, else scenario.n.
    std::vector<int> team_sizes() const;
    /// Throws ValidationError naming the violated invariant.
    void validate() const;
};

/// Parse a YAML run description. Angles use "_deg" keys:
///
///   scenario:
///     R0: 1000
///     r: 100
///     VT: 1
///     alpha_deg: 10
///     n: 4                 # or sweep_over_n
///     speed: {multiplier: 1.1}   # or {absolute: 20}
///   sweep_over_n: {from: 2, to: 16, step: 2}
///   sim: {grid_cells: 600, frame_interval: 100}
///   output_dir: out
///   formats: [csv, json]
///
/// Throws ParseError (with line and field) for malformed or missing
/// entries and ValidationError for out-of-range values.
RunSpec parse_config(std::string const& text);

/// Team-size study: alpha 10 deg, r 100, VT 1, R0 1000, n 2..16, 1.1 x critical.
RunSpec default_spec();

}  // namespace pincer
