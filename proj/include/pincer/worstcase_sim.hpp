/** @file worstcase_sim.hpp
 *  @brief Time-stepped worst-case simulation of the evader region.
 *
 *  The region is rasterised on a square grid. Each contaminated cell
 *  remembers the point and time its contamination was emitted from, so
 *  the front advances at exactly VT in the Euclidean metric regardless of
 *  the time step.
 */
#pragma once

#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "analytics.hpp"
#include "geometry.hpp"
#include "scenario.hpp"
#include "schedule.hpp"

namespace pincer {

enum class Verdict
{
    cleared,
    escaped,
    timeout
};

char const* to_string(Verdict v);

/// How the sweepers decide when to stop sweeping and dashing.
enum class Driver
{
    /// Sweep 2pi/n per cycle; end each dash when the outer tip reaches the
    /// measured front.
    wavefront,
    /// Follow the analytic schedule: sweep 2pi/n - gamma, dash delta_eff.
    schedule
};

char const* to_string(Driver d);

struct SimConfig
{
    double dt = 0;         ///< 0: cell_size / (2 Vs)
    double cell_size = 0;  ///< 0: from grid_cells, else R0 / 300
    int grid_cells = 0;    ///< cells per side; 0: enough to hold R0 + 2r
    double frame_interval = 0;
    double escape_radius = 0;  ///< 0: R0 + 2r + 2 cell_size
    double max_sim_time = 0;   ///< 0: chosen from the schedule
    Driver driver = Driver::wavefront;
    bool clear_during_dash = false;
    /// Run even when the speed does not exceed the critical speed.
    bool force = false;
    /// Gap left between the outer tip and the measured front, in cells.
    double tip_margin_cells = 1.0;
    std::string frame_dir;  ///< empty: no frames
};

/// Config with every automatic value filled in.
struct ResolvedConfig
{
    SimConfig base;
    double Vs = 0;
    double dt = 0;
    double cell_size = 0;
    int cells = 0;
    double half_extent = 0;
    double escape_radius = 0;
    double max_sim_time = 0;
};

ResolvedConfig resolve_config(ScenarioParams const& params,
                              SimConfig const& config,
                              double Vs,
                              double T_total_hint);

/// Segment that contamination cannot cross (a sensing central line).
struct Barrier
{
    Vec2 a, b;
    double x0, y0, x1, y1;  ///< padded bounding box
};

struct WorldGrid
{
    int cells = 0;
    double cell_size = 0;
    double half_extent = 0;
    double sim_time = 0;
    double VT = 0;
    std::vector<std::uint8_t> contamination;
    std::vector<std::uint8_t> swept;  ///< cleared at least once
    // emission point and time of each contaminated cell
    std::vector<double> src_x, src_y, src_t;
    // earliest predicted contamination time of each clean cell
    std::vector<double> arrival;
    std::priority_queue<std::pair<double, int>,
                        std::vector<std::pair<double, int>>,
                        std::greater<>>
        pending;
    std::vector<int> win_di, win_dj;
    std::vector<double> win_dist;
    // radius histogram for the outer-radius query
    double bin_width = 0;
    std::vector<int> bin_of;
    std::vector<int> bin_count;
    std::vector<int> by_radius;   ///< cell indices sorted by radius
    std::vector<int> bin_start;   ///< offsets into by_radius
    int top_bin = 0;
    long contaminated = 0;
    std::vector<Barrier> barriers;
    std::vector<int> mark;  ///< scratch stamps for clear_step
    int mark_gen = 0;

    int index(int i, int j) const { return j * cells + i; }
    Vec2 center(int idx) const
    {
        return {-half_extent + (idx % cells + 0.5) * cell_size,
                -half_extent + (idx / cells + 0.5) * cell_size};
    }
    /// Largest centre radius of any contaminated cell, 0 if none.
    double max_radius();
    void infect(int idx, double sx, double sy, double st);
    void clean(int idx);
};

WorldGrid init_world(ScenarioParams const& params, ResolvedConfig const& cfg);

/// Advance contamination by dt. Claims whose straight path crosses one of
/// world.barriers are held back and retried on the next step.
void spread_step(WorldGrid& world, double VT, double dt);


enum class PhaseKind
{
    spiral,
    dash,
    final_dash,
    final_circle,
    final_spiral,
    final_spiral_dash,
    done
};

char const* to_string(PhaseKind k);

struct PhaseState
{
    PhaseKind kind = PhaseKind::spiral;
    int cycle = 0;
    double start_time = 0;
    double start_radius = 0;  ///< sensor-centre radius at phase start
    double span = 0;          ///< angle for sweeping phases
    double target_radius = 0; ///< for dashes with a fixed end point
    double duration = 0;      ///< length of sweeping and fixed dashes
    std::vector<double> start_angle;
};

struct SweeperTeam
{
    std::vector<SweeperPose> poses;
    PhaseState phase;
    double elapsed = 0;                 ///< time spent in the current phase
    std::vector<SweeperPose> previous;  ///< poses at the start of the step
};

/// Everything the phase machine needs besides the poses.
struct SimContext
{
    ScenarioParams params;
    DerivedConstants constants;
    SensorGeometry sensor;
    ResolvedConfig cfg;
    SweepSchedule const* schedule = nullptr;  ///< schedule driver only
    double margin = 0;
};

struct TraceSample
{
    double t;
    double radius;
};

struct PhaseMark
{
    double t;
    std::string label;
};

struct SimOutcome
{
    Verdict verdict = Verdict::timeout;
    double clear_time = -1;
    double escape_time = -1;
    double end_time = 0;
    std::vector<TraceSample> max_radius_trace;
    std::vector<PhaseMark> cycle_boundaries;
    /// Outer contamination radius when each spiral starts.
    std::vector<double> cycle_start_front;
    /// Outer tip radius when each spiral starts.
    std::vector<double> cycle_start_tip;
    double peak_radius = 0;
    double max_meeting_gap = 0;
    int steps = 0;
    int frames_written = 0;
    bool feasible = true;
    double analytic_T_total = -1;
    ResolvedConfig cfg;
    std::vector<std::string> diagnostics;
};

/// True while the current phase sweeps (clears) rather than dashes.
bool is_sweeping(PhaseKind k, bool clear_during_dash);

SweeperTeam make_team(SimContext const& ctx);

/// Time left in the current phase; infinite when the end depends on the
/// measured front.
double time_to_phase_end(SweeperTeam const& team, SimContext const& ctx);

/// Advance all sweepers by dt within the current phase. The caller keeps
/// dt <= time_to_phase_end().
void sweeper_step(SweeperTeam& team, SimContext const& ctx, double dt);

/// Whether the current phase has finished (reads the front for the
/// wavefront driver's dashes).
bool phase_complete(SweeperTeam const& team, SimContext const& ctx, WorldGrid& world);

/// Switch to the next phase: reverse, dash, sweep or stop.
void advance_phase(SweeperTeam& team, SimContext const& ctx, WorldGrid& world,
                   SimOutcome& out);

/// Install the central lines of sweeping sensors as spread barriers.
void set_barriers(WorldGrid& world, SweeperTeam const& team, SimContext const& ctx);

/// Clear contaminated cells under the footprints (and the band swept by
/// the central lines since the previous step).
int clear_step(WorldGrid& world, SweeperTeam const& team, SimContext const& ctx);

SimOutcome run(ScenarioParams const& params, SimConfig const& config);

/// Write one SVG frame; returns the file name.
std::string write_frame(WorldGrid const& world,
                        SweeperTeam const& team,
                        SimContext const& ctx,
                        std::string const& dir,
                        int frame);

}  // namespace pincer
