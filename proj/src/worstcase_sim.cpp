#include "pincer/worstcase_sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "pincer/errors.hpp"

namespace pincer {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double pi = std::numbers::pi;

// neighbours whose emission points are consulted for a clean cell
constexpr int window_sq = 8;

double spiral_duration(double rho0, double span, double Vs, double VT)
{
    if (VT == 0)
        return rho0 * span / Vs;
    double const w = std::sqrt(Vs * Vs - VT * VT);
    return rho0 * std::expm1(span * VT / w) / VT;
}

}  // namespace

char const* to_string(Verdict v)
{
    switch (v)
    {
        case Verdict::cleared:
            return "CLEARED";
        case Verdict::escaped:
            return "ESCAPED";
        case Verdict::timeout:
            return "TIMEOUT";
    }
    return "?";
}

char const* to_string(Driver d)
{
    return d == Driver::wavefront ? "wavefront" : "schedule";
}

char const* to_string(PhaseKind k)
{
    switch (k)
    {
        case PhaseKind::spiral:
            return "spiral";
        case PhaseKind::dash:
            return "dash";
        case PhaseKind::final_dash:
            return "final_dash";
        case PhaseKind::final_circle:
            return "final_circle";
        case PhaseKind::final_spiral:
            return "final_spiral";
        case PhaseKind::final_spiral_dash:
            return "final_spiral_dash";
        case PhaseKind::done:
            return "done";
    }
    return "?";
}

ResolvedConfig resolve_config(ScenarioParams const& params,
                              SimConfig const& config,
                              double Vs,
                              double T_total_hint)
{
    ResolvedConfig rc;
    rc.base = config;
    rc.Vs = Vs;
    double const reach = params.R0 + 2 * params.r;
    if (config.cell_size < 0 || config.grid_cells < 0 || config.dt < 0)
        throw ValidationError("sim: cell_size, grid_cells and dt must not be negative");
    if (config.cell_size == 0 && config.grid_cells > 0)
    {
        rc.half_extent = 1.05 * reach;
        rc.cells = config.grid_cells;
        rc.cell_size = 2 * rc.half_extent / rc.cells;
    }
    else if (config.cell_size > 0 && config.grid_cells > 0)
    {
        rc.cell_size = config.cell_size;
        rc.cells = config.grid_cells;
        rc.half_extent = 0.5 * rc.cells * rc.cell_size;
    }
    else
    {
        rc.cell_size = config.cell_size > 0 ? config.cell_size : params.R0 / 300;
        rc.cells = static_cast<int>(std::ceil(2 * 1.05 * reach / rc.cell_size));
        rc.half_extent = 0.5 * rc.cells * rc.cell_size;
    }
    if (rc.half_extent < reach + 4 * rc.cell_size)
        throw GridTooSmall(fmt::format("grid half extent {:.6g} leaves no room beyond "
                                       "R0 + 2r = {:.6g} (cell size {:.6g})",
                                       rc.half_extent,
                                       reach,
                                       rc.cell_size));
    rc.dt = config.dt > 0 ? config.dt : rc.cell_size / (2 * Vs);
    if (!(Vs * rc.dt < rc.cell_size))
        throw ValidationError("sim: Vs * dt must be smaller than the cell size");
    rc.escape_radius
        = config.escape_radius > 0 ? config.escape_radius : reach + 2 * rc.cell_size;
    if (rc.escape_radius > rc.half_extent - 2 * rc.cell_size)
        throw GridTooSmall("escape radius lies outside the grid");
    if (config.max_sim_time > 0)
        rc.max_sim_time = config.max_sim_time;
    else if (T_total_hint > 0)
        rc.max_sim_time = 6 * T_total_hint;
    else
        rc.max_sim_time = 50 * reach / Vs;
    if (!(config.tip_margin_cells >= 0))
        throw ValidationError("sim: tip margin must not be negative");
    return rc;
}

// ---------------------------------------------------------------------------
// World grid
// ---------------------------------------------------------------------------

double WorldGrid::max_radius()
{
    if (contaminated == 0)
        return 0;
    while (top_bin > 0 && bin_count[top_bin] == 0)
        --top_bin;
    double best = 0;
    for (int k = bin_start[top_bin]; k < bin_start[top_bin + 1]; ++k)
    {
        int const idx = by_radius[k];
        if (contamination[idx])
            best = std::max(best, center(idx).norm());
    }
    return best;
}

void WorldGrid::infect(int idx, double sx, double sy, double st)
{
    contamination[idx] = 1;
    src_x[idx] = sx;
    src_y[idx] = sy;
    src_t[idx] = st;
    arrival[idx] = inf;
    ++contaminated;
    int const b = bin_of[idx];
    ++bin_count[b];
    top_bin = std::max(top_bin, b);
}

void WorldGrid::clean(int idx)
{
    contamination[idx] = 0;
    swept[idx] = 1;
    --contaminated;
    --bin_count[bin_of[idx]];
}

WorldGrid init_world(ScenarioParams const& params, ResolvedConfig const& cfg)
{
    if (cfg.half_extent < params.R0 + 2 * params.r)
        throw GridTooSmall("grid does not cover R0 + 2r");
    WorldGrid w;
    w.cells = cfg.cells;
    w.cell_size = cfg.cell_size;
    w.half_extent = cfg.half_extent;
    w.VT = params.VT;
    std::size_t const total = static_cast<std::size_t>(w.cells) * w.cells;
    w.contamination.assign(total, 0);
    w.swept.assign(total, 0);
    w.src_x.assign(total, 0);
    w.src_y.assign(total, 0);
    w.src_t.assign(total, 0);
    w.arrival.assign(total, inf);
    w.mark.assign(total, 0);

    for (int dj = -3; dj <= 3; ++dj)
        for (int di = -3; di <= 3; ++di)
            if ((di || dj) && di * di + dj * dj <= window_sq)
            {
                w.win_di.push_back(di);
                w.win_dj.push_back(dj);
                w.win_dist.push_back(std::hypot(di, dj) * w.cell_size);
            }

    w.bin_width = 0.5 * w.cell_size;
    int const nbins
        = static_cast<int>(std::ceil(w.half_extent * std::numbers::sqrt2 / w.bin_width)) + 2;
    w.bin_of.resize(total);
    w.bin_count.assign(nbins, 0);
    std::vector<int> fill(nbins + 1, 0);
    for (std::size_t idx = 0; idx < total; ++idx)
    {
        int const b = static_cast<int>(w.center(static_cast<int>(idx)).norm() / w.bin_width);
        w.bin_of[idx] = b;
        ++fill[b + 1];
    }
    for (int b = 0; b < nbins; ++b)
        fill[b + 1] += fill[b];
    w.bin_start = fill;
    w.by_radius.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx)
        w.by_radius[fill[w.bin_of[idx]]++] = static_cast<int>(idx);

    double const VT = params.VT;
    double const t0 = VT > 0 ? -params.R0 / VT : 0;
    double const halo = params.R0 + 4 * w.cell_size;
    for (std::size_t idx = 0; idx < total; ++idx)
    {
        double const rho = w.center(static_cast<int>(idx)).norm();
        if (rho <= params.R0)
            w.infect(static_cast<int>(idx), 0, 0, t0);
        else if (VT > 0 && rho <= halo)
        {
            w.arrival[idx] = t0 + rho / VT;
            w.pending.emplace(w.arrival[idx], static_cast<int>(idx));
        }
    }
    return w;
}

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Closed segment intersection test.
bool segments_meet(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2)
{
    double const d1 = cross(q1, q2, p1);
    double const d2 = cross(q1, q2, p2);
    double const d3 = cross(p1, p2, q1);
    double const d4 = cross(p1, p2, q2);
    return ((d1 <= 0 && d2 >= 0) || (d1 >= 0 && d2 <= 0))
           && ((d3 <= 0 && d4 >= 0) || (d3 >= 0 && d4 <= 0));
}

struct Arrival
{
    double time;
    int from;
    bool blocked;  ///< an earlier claim was held back by a barrier
};

/// Earliest time any contaminated window neighbour reaches cell idx.
Arrival earliest_arrival(WorldGrid const& w, int idx, double VT)
{
    int const i = idx % w.cells;
    int const j = idx / w.cells;
    Vec2 const c = w.center(idx);
    auto near = [&c](Barrier const& b) {
        return c.x >= b.x0 && c.x <= b.x1 && c.y >= b.y0 && c.y <= b.y1;
    };
    bool const any_near = std::any_of(w.barriers.begin(), w.barriers.end(), near);
    Arrival out{inf, -1, false};
    double blocked_best = inf;
    for (std::size_t k = 0; k < w.win_di.size(); ++k)
    {
        int const ii = i + w.win_di[k];
        int const jj = j + w.win_dj[k];
        if (ii < 0 || jj < 0 || ii >= w.cells || jj >= w.cells)
            continue;
        int const n = w.index(ii, jj);
        if (!w.contamination[n])
            continue;
        double const a
            = w.src_t[n] + std::hypot(c.x - w.src_x[n], c.y - w.src_y[n]) / VT;
        if (a >= out.time && a >= blocked_best)
            continue;
        bool crosses = false;
        if (any_near)
        {
            Vec2 const cn = w.center(n);
            for (auto const& b : w.barriers)
                if (near(b) && segments_meet(cn, c, b.a, b.b))
                {
                    crosses = true;
                    break;
                }
        }
        if (crosses)
            blocked_best = std::min(blocked_best, a);
        else if (a < out.time)
        {
            out.time = a;
            out.from = n;
        }
    }
    out.blocked = blocked_best < out.time;
    return out;
}

}  // namespace

void spread_step(WorldGrid& w, double VT, double dt)
{
    double const t1 = w.sim_time + dt;
    std::vector<int> retry;
    if (VT > 0)
    {
        while (!w.pending.empty() && w.pending.top().first <= t1)
        {
            auto const [a, idx] = w.pending.top();
            w.pending.pop();
            if (w.contamination[idx] || a != w.arrival[idx])
                continue;
            auto const [best, from, blocked] = earliest_arrival(w, idx, VT);
            if (best > t1)
            {
                w.arrival[idx] = best;
                if (blocked)
                    retry.push_back(idx);
                else if (best < inf)
                    w.pending.emplace(best, idx);
                continue;
            }
            double const sx = w.src_x[from];
            double const sy = w.src_y[from];
            double const st = w.src_t[from];
            w.infect(idx, sx, sy, st);
            int const i = idx % w.cells;
            int const j = idx / w.cells;
            for (std::size_t k = 0; k < w.win_di.size(); ++k)
            {
                int const ii = i + w.win_di[k];
                int const jj = j + w.win_dj[k];
                if (ii < 0 || jj < 0 || ii >= w.cells || jj >= w.cells)
                    continue;
                int const z = w.index(ii, jj);
                if (w.contamination[z])
                    continue;
                Vec2 const cz = w.center(z);
                double const cand = st + std::hypot(cz.x - sx, cz.y - sy) / VT;
                if (cand < w.arrival[z])
                {
                    w.arrival[z] = cand;
                    w.pending.emplace(cand, z);
                }
            }
        }
        for (int idx : retry)
        {
            if (w.contamination[idx])
                continue;
            // earlier than any real claim, so it is re-examined next step
            w.arrival[idx] = t1;
            w.pending.emplace(t1, idx);
        }
    }
    w.sim_time = t1;
}

// ---------------------------------------------------------------------------
// Sweepers
// ---------------------------------------------------------------------------

bool is_sweeping(PhaseKind k, bool clear_during_dash)
{
    switch (k)
    {
        case PhaseKind::spiral:
        case PhaseKind::final_circle:
        case PhaseKind::final_spiral:
        case PhaseKind::done:
            return true;
        default:
            return clear_during_dash;
    }
}

namespace {

void start_phase(SweeperTeam& team, PhaseKind kind, double now)
{
    team.phase.kind = kind;
    team.phase.start_time = now;
    team.phase.start_radius = team.poses.front().radial_distance;
    team.phase.start_angle.clear();
    for (auto const& p : team.poses)
        team.phase.start_angle.push_back(p.polar_angle);
    team.elapsed = 0;
}

void start_sweep(SweeperTeam& team, SimContext const& ctx, PhaseKind kind, double span,
                 double now)
{
    start_phase(team, kind, now);
    team.phase.span = std::max(0.0, span);
    double const rho0 = team.phase.start_radius;
    if (kind == PhaseKind::final_circle)
        team.phase.duration = team.phase.span * rho0 / ctx.constants.Vs;
    else
        team.phase.duration
            = spiral_duration(rho0, team.phase.span, ctx.constants.Vs, ctx.params.VT);
}

void start_dash(SweeperTeam& team, SimContext const& ctx, PhaseKind kind, double target,
                double now)
{
    start_phase(team, kind, now);
    team.phase.target_radius = std::max(ctx.params.r, target);
    team.phase.duration
        = std::max(0.0, team.phase.start_radius - team.phase.target_radius)
          / ctx.constants.Vs;
}

void flip_all(SweeperTeam& team)
{
    for (auto& p : team.poses)
        p.rotation_sense = flipped(p.rotation_sense);
}

/// Largest angular distance from a sweeper to the nearest sweeper moving
/// the other way.
double meeting_gap(std::vector<SweeperPose> const& poses)
{
    double worst = 0;
    for (auto const& a : poses)
    {
        double nearest = inf;
        for (auto const& b : poses)
        {
            if (b.rotation_sense == a.rotation_sense)
                continue;
            double d = std::abs(normalize_angle(a.polar_angle - b.polar_angle));
            d = std::min(d, two_pi - d);
            nearest = std::min(nearest, d);
        }
        if (nearest < inf)
            worst = std::max(worst, nearest);
    }
    return worst;
}

}  // namespace

SweeperTeam make_team(SimContext const& ctx)
{
    Deployment const d = initial_deployment(ctx.params);
    SweeperTeam team;
    team.poses = d.poses;
    team.previous = d.poses;
    double const span = ctx.cfg.base.driver == Driver::wavefront
                            ? two_pi / ctx.params.n
                            : d.sector_angle;
    start_sweep(team, ctx, PhaseKind::spiral, span, 0);
    team.phase.cycle = 0;
    return team;
}

double time_to_phase_end(SweeperTeam const& team, SimContext const& ctx)
{
    auto const& ph = team.phase;
    if (ph.kind == PhaseKind::done)
        return inf;
    if (ph.kind == PhaseKind::dash && ctx.cfg.base.driver == Driver::wavefront)
        return std::max(0.0, (team.poses.front().radial_distance - ctx.params.r)
                                 / ctx.constants.Vs);
    return std::max(0.0, ph.duration - team.elapsed);
}

void sweeper_step(SweeperTeam& team, SimContext const& ctx, double dt)
{
    auto const& ph = team.phase;
    double const Vs = ctx.constants.Vs;
    double const VT = ctx.params.VT;
    double const r = ctx.params.r;
    double const phi = ctx.constants.phi;
    team.previous = team.poses;
    team.elapsed += dt;
    double const e = team.elapsed;
    bool const wave_dash
        = ph.kind == PhaseKind::dash && ctx.cfg.base.driver == Driver::wavefront;
    if (!wave_dash && ph.kind != PhaseKind::done
        && e > ph.duration * (1 + 1e-9) + 1e-12)
        throw PhaseDesync(fmt::format("{} phase ran {:.12g} past its end",
                                      to_string(ph.kind),
                                      e - ph.duration));

    for (std::size_t k = 0; k < team.poses.size(); ++k)
    {
        SweeperPose& p = team.poses[k];
        double const s = sign(p.rotation_sense);
        switch (ph.kind)
        {
            case PhaseKind::spiral:
            case PhaseKind::final_spiral: {
                double const theta
                    = std::min(ph.span, spiral_theta(e, ph.start_radius + r, r, Vs, VT));
                p.radial_distance = ph.start_radius + VT * e;
                p.polar_angle = normalize_angle(ph.start_angle[k] + s * theta);
                p.heading = spiral_heading(p.polar_angle, p.rotation_sense, phi);
                break;
            }
            case PhaseKind::final_circle: {
                double const theta = std::min(ph.span, Vs * e / ph.start_radius);
                p.polar_angle = normalize_angle(ph.start_angle[k] + s * theta);
                p.heading = normalize_angle(p.polar_angle + s * pi / 2);
                break;
            }
            case PhaseKind::dash:
            case PhaseKind::final_dash:
            case PhaseKind::final_spiral_dash: {
                double const floor_r = wave_dash ? r : ph.target_radius;
                p.radial_distance = std::max(floor_r, ph.start_radius - Vs * e);
                p.heading = normalize_angle(p.polar_angle + pi);
                break;
            }
            case PhaseKind::done:
                break;
        }
    }
}

bool phase_complete(SweeperTeam const& team, SimContext const& ctx, WorldGrid& world)
{
    auto const& ph = team.phase;
    if (ph.kind == PhaseKind::done)
        return false;
    if (ph.kind == PhaseKind::dash && ctx.cfg.base.driver == Driver::wavefront)
    {
        double const rho = team.poses.front().radial_distance;
        if (rho <= ctx.params.r * (1 + 1e-12))
            return true;
        return rho + ctx.params.r <= world.max_radius() + ctx.margin;
    }
    return team.elapsed >= ph.duration * (1 - 1e-12);
}

namespace {

void begin_spiral(SweeperTeam& team, SimContext const& ctx, WorldGrid& world,
                  SimOutcome& out, int cycle, double span)
{
    double const now = world.sim_time;
    start_sweep(team, ctx, PhaseKind::spiral, span, now);
    team.phase.cycle = cycle;
    out.cycle_start_front.push_back(world.max_radius());
    out.cycle_start_tip.push_back(team.poses.front().radial_distance + ctx.params.r);
    out.cycle_boundaries.push_back({now, fmt::format("spiral {}", cycle)});
}

void advance_wavefront(SweeperTeam& team, SimContext const& ctx, WorldGrid& world,
                       SimOutcome& out)
{
    double const now = world.sim_time;
    double const r = ctx.params.r;
    double const Vs = ctx.constants.Vs;
    double const VT = ctx.params.VT;
    int const n = ctx.params.n;
    auto const kind = team.phase.kind;
    switch (kind)
    {
        case PhaseKind::spiral:
        case PhaseKind::final_circle:
        case PhaseKind::final_spiral: {
            out.max_meeting_gap = std::max(out.max_meeting_gap, meeting_gap(team.poses));
            flip_all(team);
            out.cycle_boundaries.push_back({now, "reverse"});
            if (world.contaminated == 0)
            {
                start_phase(team, PhaseKind::done, now);
                return;
            }
            double const f = world.max_radius();
            double const rho = team.poses.front().radial_distance;
            double const circle_span = std::max(0.0, two_pi / n - ctx.params.alpha);
            double const t_end = (rho - r) / Vs + circle_span * r / Vs;
            if (f + VT * t_end <= 2 * r - ctx.margin)
            {
                start_dash(team, ctx, PhaseKind::final_dash, r, now);
                out.cycle_boundaries.push_back({now, "final dash"});
                return;
            }
            start_dash(team, ctx, PhaseKind::dash, r, now);
            out.cycle_boundaries.push_back({now, "dash"});
            if (rho + r <= f + ctx.margin)
                begin_spiral(team, ctx, world, out,
                             static_cast<int>(out.cycle_start_front.size()), two_pi / n);
            return;
        }
        case PhaseKind::dash: {
            int const cycle = static_cast<int>(out.cycle_start_front.size());
            begin_spiral(team, ctx, world, out, cycle, two_pi / n);
            return;
        }
        case PhaseKind::final_dash:
            start_sweep(team, ctx, PhaseKind::final_circle,
                        two_pi / n - ctx.params.alpha, now);
            out.cycle_boundaries.push_back({now, "final circle"});
            return;
        default:
            start_phase(team, PhaseKind::done, now);
            return;
    }
}

void advance_schedule(SweeperTeam& team, SimContext const& ctx, WorldGrid& world,
                      SimOutcome& out)
{
    double const now = world.sim_time;
    double const r = ctx.params.r;
    auto const& sched = *ctx.schedule;
    int const cycle = team.phase.cycle;
    double const rho = team.poses.front().radial_distance;
    switch (team.phase.kind)
    {
        case PhaseKind::spiral:
            out.max_meeting_gap = std::max(out.max_meeting_gap, meeting_gap(team.poses));
            flip_all(team);
            out.cycle_boundaries.push_back({now, "reverse"});
            if (cycle + 1 < sched.N_n)
            {
                start_dash(team, ctx, PhaseKind::dash,
                           rho - sched.cycles[cycle].delta_eff, now);
                out.cycle_boundaries.push_back({now, "dash"});
            }
            else
            {
                start_dash(team, ctx, PhaseKind::final_dash, r, now);
                out.cycle_boundaries.push_back({now, "final dash"});
            }
            team.phase.cycle = cycle;
            return;
        case PhaseKind::dash: {
            double const analytic = sched.cycles[cycle + 1].R;
            double const actual = rho + r;
            if (std::abs(actual - analytic) > 1e-9 * analytic)
                out.diagnostics.push_back(fmt::format(
                    "cycle {} starts at region radius {:.12g}; schedule expects {:.12g}",
                    cycle + 1,
                    actual,
                    analytic));
            begin_spiral(team, ctx, world, out, cycle + 1, ctx.constants.sweep_angle);
            return;
        }
        case PhaseKind::final_dash:
            start_sweep(team, ctx, PhaseKind::final_circle,
                        two_pi / ctx.params.n - 2 * ctx.params.alpha, now);
            out.cycle_boundaries.push_back({now, "final circle"});
            return;
        case PhaseKind::final_circle:
            out.max_meeting_gap = std::max(out.max_meeting_gap, meeting_gap(team.poses));
            flip_all(team);
            out.cycle_boundaries.push_back({now, "reverse"});
            if (sched.eta == 1)
            {
                start_sweep(team, ctx, PhaseKind::final_spiral, ctx.constants.sweep_angle,
                            now);
                out.cycle_boundaries.push_back({now, "final spiral"});
            }
            else
                start_phase(team, PhaseKind::done, now);
            return;
        case PhaseKind::final_spiral:
            flip_all(team);
            start_dash(team, ctx, PhaseKind::final_spiral_dash, r, now);
            out.cycle_boundaries.push_back({now, "final spiral dash"});
            return;
        default:
            start_phase(team, PhaseKind::done, now);
            return;
    }
}

}  // namespace

void advance_phase(SweeperTeam& team, SimContext const& ctx, WorldGrid& world,
                   SimOutcome& out)
{
    if (ctx.cfg.base.driver == Driver::wavefront)
        advance_wavefront(team, ctx, world, out);
    else
        advance_schedule(team, ctx, world, out);
}

// ---------------------------------------------------------------------------
// Clearing
// ---------------------------------------------------------------------------

void set_barriers(WorldGrid& world, SweeperTeam const& team, SimContext const& ctx)
{
    world.barriers.clear();
    if (!is_sweeping(team.phase.kind, ctx.cfg.base.clear_during_dash))
        return;
    double const r = ctx.params.r;
    double const pad = 3.5 * world.cell_size;
    for (auto const& p : team.poses)
    {
        Barrier b;
        b.a = p.inner_tip(r);
        // one cell past the tip absorbs the front's rasterisation
        b.b = unit(p.polar_angle) * (p.radial_distance + r + world.cell_size);
        b.x0 = std::min(b.a.x, b.b.x) - pad;
        b.x1 = std::max(b.a.x, b.b.x) + pad;
        b.y0 = std::min(b.a.y, b.b.y) - pad;
        b.y1 = std::max(b.a.y, b.b.y) + pad;
        world.barriers.push_back(b);
    }
}

namespace {

struct Box
{
    double x0 = inf, y0 = inf, x1 = -inf, y1 = -inf;
    void add(Vec2 p)
    {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
};

void add_fan(Box& b, SweeperPose const& p, SensorGeometry const& s)
{
    Vec2 const apex = p.inner_tip(s.r);
    double const R = 2 * s.r;
    b.add(apex);
    b.add(apex + unit(p.polar_angle - s.alpha) * R);
    b.add(apex + unit(p.polar_angle + s.alpha) * R);
    for (int q = 0; q < 4; ++q)
    {
        double const a = q * pi / 2;
        double d = std::abs(normalize_angle(a - p.polar_angle));
        d = std::min(d, two_pi - d);
        if (d <= s.alpha)
            b.add(apex + unit(a) * R);
    }
}

/// Whether point q lies in the annular band swept by the central line
/// moving from pose a to pose b.
bool in_band(SweeperPose const& a, SweeperPose const& b, double r, Vec2 q)
{
    double const s = sign(a.rotation_sense);
    double const span = normalize_angle(s * (b.polar_angle - a.polar_angle));
    if (span > pi)
        return false;  // no forward motion
    double const off = normalize_angle(s * (std::atan2(q.y, q.x) - a.polar_angle));
    if (off > span)
        return false;
    double const rho = q.norm();
    double const lo = std::min(a.radial_distance, b.radial_distance) - r;
    double const hi = std::max(a.radial_distance, b.radial_distance) + r;
    return rho >= lo && rho <= hi;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
    Vec2 const ab = b - a;
    double const len2 = ab.dot(ab);
    double u = len2 > 0 ? (p - a).dot(ab) / len2 : 0;
    u = std::clamp(u, 0.0, 1.0);
    return (p - (a + ab * u)).norm();
}

double sector_distance(Vec2 p, SweeperPose const& pose, SensorGeometry const& s)
{
    Vec2 const apex = pose.inner_tip(s.r);
    Vec2 const d = p - apex;
    double const rho = d.norm();
    if (rho == 0)
        return 0;
    double off = std::abs(normalize_angle(std::atan2(d.y, d.x) - pose.polar_angle));
    off = std::min(off, two_pi - off);
    if (off <= s.alpha)
        return std::max(0.0, rho - 2 * s.r);
    double const R = 2 * s.r;
    return std::min(segment_distance(p, apex, apex + unit(pose.polar_angle + s.alpha) * R),
                    segment_distance(p, apex, apex + unit(pose.polar_angle - s.alpha) * R));
}

double band_distance(Vec2 p, SweeperPose const& a, SweeperPose const& b, double r)
{
    double const lo = std::max(0.0, std::min(a.radial_distance, b.radial_distance) - r);
    double const hi = std::max(a.radial_distance, b.radial_distance) + r;
    double const s = sign(a.rotation_sense);
    double const span = normalize_angle(s * (b.polar_angle - a.polar_angle));
    if (span <= pi)
    {
        double const off = normalize_angle(s * (std::atan2(p.y, p.x) - a.polar_angle));
        if (off <= span)
        {
            double const rho = p.norm();
            return std::max({0.0, lo - rho, rho - hi});
        }
    }
    return std::min(
        segment_distance(p, unit(a.polar_angle) * lo, unit(a.polar_angle) * hi),
        segment_distance(p, unit(b.polar_angle) * lo, unit(b.polar_angle) * hi));
}

}  // namespace

int clear_step(WorldGrid& world, SweeperTeam const& team, SimContext const& ctx)
{
    if (!is_sweeping(team.phase.kind, ctx.cfg.base.clear_during_dash))
        return 0;
    bool const band = team.phase.kind == PhaseKind::spiral
                      || team.phase.kind == PhaseKind::final_circle
                      || team.phase.kind == PhaseKind::final_spiral;
    SensorGeometry const& s = ctx.sensor;
    double const cs = world.cell_size;
    std::vector<int> cleared;
    for (std::size_t k = 0; k < team.poses.size(); ++k)
    {
        SweeperPose const& cur = team.poses[k];
        SweeperPose const& prev = team.previous[k];
        Box box;
        add_fan(box, cur, s);
        if (band)
            add_fan(box, prev, s);
        int const i0 = std::max(0, static_cast<int>((box.x0 + world.half_extent) / cs) - 1);
        int const j0 = std::max(0, static_cast<int>((box.y0 + world.half_extent) / cs) - 1);
        int const i1 = std::min(world.cells - 1,
                                static_cast<int>((box.x1 + world.half_extent) / cs) + 1);
        int const j1 = std::min(world.cells - 1,
                                static_cast<int>((box.y1 + world.half_extent) / cs) + 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
            {
                int const idx = world.index(i, j);
                if (!world.contamination[idx])
                    continue;
                Vec2 const c = world.center(idx);
                if (footprint_contains(cur, s, c) || (band && in_band(prev, cur, s.r, c)))
                {
                    world.clean(idx);
                    cleared.push_back(idx);
                }
            }
    }

    double const VT = world.VT;
    if (VT > 0 && !cleared.empty())
    {
        double const t = world.sim_time;
        // Contaminated neighbours must not reach the swept area before now;
        // re-emit them from their own centre with the lead they can keep.
        auto swept_distance = [&](Vec2 c) {
            double best = inf;
            for (std::size_t k = 0; k < team.poses.size(); ++k)
            {
                best = std::min(best, sector_distance(c, team.poses[k], s));
                if (band)
                    best = std::min(best,
                                    band_distance(c, team.previous[k], team.poses[k], s.r));
            }
            return best;
        };
        int const gen = ++world.mark_gen;
        for (int x : cleared)
        {
            int const i = x % world.cells;
            int const j = x / world.cells;
            for (std::size_t k = 0; k < world.win_di.size(); ++k)
            {
                int const ii = i + world.win_di[k];
                int const jj = j + world.win_dj[k];
                if (ii < 0 || jj < 0 || ii >= world.cells || jj >= world.cells)
                    continue;
                int const c = world.index(ii, jj);
                if (!world.contamination[c] || world.mark[c] == gen)
                    continue;
                world.mark[c] = gen;
                Vec2 const cc = world.center(c);
                double const lead
                    = VT * (t - world.src_t[c])
                      - std::hypot(cc.x - world.src_x[c], cc.y - world.src_y[c]);
                double const keep = std::max(0.0, std::min(lead, swept_distance(cc)));
                world.src_x[c] = cc.x;
                world.src_y[c] = cc.y;
                world.src_t[c] = t - keep / VT;
            }
        }
        for (int x : cleared)
        {
            auto const [best, from, blocked] = earliest_arrival(world, x, VT);
            double const when = blocked ? std::min(best, t) : best;
            world.arrival[x] = when;
            if (when < inf)
                world.pending.emplace(when, x);
        }
    }
    return static_cast<int>(cleared.size());
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

std::string write_frame(WorldGrid const& world,
                        SweeperTeam const& team,
                        SimContext const& ctx,
                        std::string const& dir,
                        int frame)
{
    std::string const name = fmt::format("frame_{:06d}.svg", frame);
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f)
        throw Error("cannot write frame " + name);
    double const H = world.half_extent;
    double const cs = world.cell_size;
    f << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6g} {:.6g} {:.6g} "
        "{:.6g}\" width=\"800\" height=\"800\">\n",
        -H, -H, 2 * H, 2 * H);
    f << "<rect x=\"" << -H << "\" y=\"" << -H << "\" width=\"" << 2 * H
      << "\" height=\"" << 2 * H << "\" fill=\"white\"/>\n";
    f << "<g transform=\"scale(1,-1)\" shape-rendering=\"crispEdges\">\n";
    // runs of equal state per row: 1 contaminated, 2 swept and clean
    for (int j = 0; j < world.cells; ++j)
    {
        int i = 0;
        while (i < world.cells)
        {
            int const idx = world.index(i, j);
            int const state = world.contamination[idx] ? 1 : (world.swept[idx] ? 2 : 0);
            int k = i + 1;
            while (k < world.cells)
            {
                int const id2 = world.index(k, j);
                int const s2 = world.contamination[id2] ? 1 : (world.swept[id2] ? 2 : 0);
                if (s2 != state)
                    break;
                ++k;
            }
            if (state)
                f << fmt::format(
                    "<rect x=\"{:.6g}\" y=\"{:.6g}\" width=\"{:.6g}\" height=\"{:.6g}\" "
                    "fill=\"{}\"/>\n",
                    -H + i * cs, -H + j * cs, (k - i) * cs, cs,
                    state == 1 ? "#d62728" : "#98df8a");
            i = k;
        }
    }
    f << fmt::format("<circle cx=\"0\" cy=\"0\" r=\"{:.6g}\" fill=\"none\" "
                     "stroke=\"#777\" stroke-dasharray=\"8,8\" stroke-width=\"2\"/>\n",
                     ctx.params.R0);
    SensorGeometry const& s = ctx.sensor;
    for (auto const& p : team.poses)
    {
        Vec2 const apex = p.inner_tip(s.r);
        std::string pts = fmt::format("{:.6g},{:.6g}", apex.x, apex.y);
        for (int q = 0; q <= 16; ++q)
        {
            double const a = p.polar_angle - s.alpha + 2 * s.alpha * q / 16;
            Vec2 const e = apex + unit(a) * (2 * s.r);
            pts += fmt::format(" {:.6g},{:.6g}", e.x, e.y);
        }
        f << "<polygon points=\"" << pts
          << "\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"#1f77b4\"/>\n";
        Vec2 const c = p.center();
        f << fmt::format("<circle cx=\"{:.6g}\" cy=\"{:.6g}\" r=\"{:.6g}\" "
                         "fill=\"#1f3fb4\"/>\n",
                         c.x, c.y, 3 * cs);
    }
    f << "</g>\n";
    f << fmt::format("<text x=\"{:.6g}\" y=\"{:.6g}\" font-size=\"{:.6g}\">t = {:.6g}"
                     "</text>\n",
                     -H + 10 * cs, -H + 20 * cs, 16 * cs, world.sim_time);
    f << "</svg>\n";
    if (!f)
        throw Error("failed writing frame " + name);
    return name;
}

// ---------------------------------------------------------------------------
// Driver loop
// ---------------------------------------------------------------------------

SimOutcome run(ScenarioParams const& params, SimConfig const& config)
{
    params.validate();
    SimOutcome out;
    SimContext ctx;
    ctx.params = params;
    ctx.constants = derive_constants(params);
    ctx.sensor = {params.r, params.alpha, FootprintModel::sector_apex_inner};

    SweepSchedule sched;
    try
    {
        sched = build_schedule(params);
        out.analytic_T_total = sched.T_total;
    }
    catch (InfeasibleSpeed const&)
    {
        if (!config.force)
            throw;
        out.feasible = false;
        out.diagnostics.push_back(fmt::format(
            "speed {:.12g} does not exceed the critical speed {:.12g}; forced run",
            ctx.constants.Vs,
            ctx.constants.speeds.v_critical));
    }
    if (config.driver == Driver::schedule)
    {
        if (!out.feasible)
            throw ValidationError(
                "the schedule driver needs a feasible schedule; use the wavefront driver "
                "for forced runs");
        ctx.schedule = &sched;
    }
    ctx.cfg = resolve_config(params, config, ctx.constants.Vs, out.analytic_T_total);
    ctx.margin = config.tip_margin_cells * ctx.cfg.cell_size;
    out.cfg = ctx.cfg;

    WorldGrid world = init_world(params, ctx.cfg);
    SweeperTeam team = make_team(ctx);
    out.cycle_start_front.push_back(world.max_radius());
    out.cycle_start_tip.push_back(team.poses.front().radial_distance + params.r);
    out.cycle_boundaries.push_back({0.0, "spiral 0"});

    bool const frames = config.frame_interval > 0 && !config.frame_dir.empty();
    std::ofstream manifest;
    double next_frame = 0;
    if (frames)
    {
        std::filesystem::create_directories(config.frame_dir);
        manifest.open(std::filesystem::path(config.frame_dir) / "manifest.csv");
        if (!manifest)
            throw Error("cannot write frame manifest");
        manifest << "frame,sim_time,file\n";
    }
    auto emit_frames = [&]() {
        if (!frames)
            return;
        while (world.sim_time + 1e-9 * config.frame_interval >= next_frame)
        {
            std::string const name
                = write_frame(world, team, ctx, config.frame_dir, out.frames_written);
            manifest << out.frames_written << ',' << fmt::format("{:.12g}", world.sim_time)
                     << ',' << name << '\n';
            ++out.frames_written;
            next_frame = out.frames_written * config.frame_interval;
        }
    };

    set_barriers(world, team, ctx);
    clear_step(world, team, ctx);
    double peak = world.max_radius();
    out.max_radius_trace.push_back({0.0, peak});
    emit_frames();

    double const dt = ctx.cfg.dt;
    int idle_transitions = 0;
    while (true)
    {
        if (world.contaminated == 0)
        {
            out.verdict = Verdict::cleared;
            out.clear_time = world.sim_time;
            break;
        }
        double const rem = time_to_phase_end(team, ctx);
        if (rem <= 0 && team.phase.kind != PhaseKind::done)
        {
            if (++idle_transitions > 64)
                throw PhaseDesync("phase machine makes no progress");
            advance_phase(team, ctx, world, out);
            continue;
        }
        idle_transitions = 0;
        double const h = rem <= dt * (1 + 1e-9) ? rem : dt;
        if (world.sim_time + h > ctx.cfg.max_sim_time)
        {
            out.verdict = Verdict::timeout;
            break;
        }
        sweeper_step(team, ctx, h);
        set_barriers(world, team, ctx);
        spread_step(world, params.VT, h);
        clear_step(world, team, ctx);
        ++out.steps;
        if (phase_complete(team, ctx, world))
            advance_phase(team, ctx, world, out);

        double const rmax = world.max_radius();
        out.max_radius_trace.push_back({world.sim_time, rmax});
        peak = std::max(peak, rmax);
        emit_frames();
        if (world.contaminated == 0)
        {
            out.verdict = Verdict::cleared;
            out.clear_time = world.sim_time;
            break;
        }
        if (rmax > ctx.cfg.escape_radius)
        {
            out.verdict = Verdict::escaped;
            out.escape_time = world.sim_time;
            break;
        }
    }
    out.end_time = world.sim_time;
    out.peak_radius = peak;

    if (out.feasible)
    {
        out.diagnostics.push_back(fmt::format(
            "{} driver: {} spiral cycles (schedule: {}), max meeting gap {:.6g} rad",
            to_string(config.driver),
            out.cycle_start_front.size(),
            sched.N_n,
            out.max_meeting_gap));
        if (out.verdict == Verdict::cleared)
            out.diagnostics.push_back(fmt::format(
                "clear time {:.12g} vs analytic total {:.12g} (ratio {:.6g})",
                out.clear_time,
                sched.T_total,
                out.clear_time / sched.T_total));
    }
    return out;
}

}  // namespace pincer
