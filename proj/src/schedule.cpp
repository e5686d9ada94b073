#include "pincer/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "pincer/errors.hpp"
#include "pincer/geometry.hpp"

namespace pincer {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double rel_dev(double a, double ref)
{
    if (std::isnan(a) || std::isnan(ref))
        return nan;
    double const s = std::abs(ref);
    return s > 0 ? std::abs(a - ref) / s : std::abs(a - ref);
}

/// lambda - 1 without cancellation.
double lambda_m1(ScenarioParams const& p, DerivedConstants const& c)
{
    return p.VT * c.spiral_time_factor;
}

}  // namespace

CycleRecord cycle_step(double R_i, DerivedConstants const& c, ScenarioParams const& p)
{
    if (!(R_i > p.r))
        throw DomainError("cycle_step: region radius must exceed r");
    double const Vs = c.Vs;
    double const VT = p.VT;
    CycleRecord rec;
    rec.R = R_i;
    rec.R_tilde = R_i - p.r;
    rec.T_spiral = rec.R_tilde * c.spiral_time_factor;
    rec.delta = 2 * p.r - VT * rec.T_spiral;
    if (rec.delta < 0)
        throw InfeasibleSpeed(
            fmt::format("cycle_step: region grows by {:.6g} during the spiral",
                        -rec.delta),
            c.speeds.v_critical);
    rec.delta_eff = rec.delta * Vs / (Vs + VT);
    rec.R_next = R_i - rec.delta_eff;
    rec.T_in = rec.delta_eff / Vs;
    try
    {
        rec.gamma_i = gamma_offset(R_i, p.r, p.alpha);
    }
    catch (DomainError const&)
    {
        rec.gamma_i = nan;
    }
    return rec;
}

int num_sweeps(ScenarioParams const& p, DerivedConstants const& c)
{
    if (p.R0 <= 2 * p.r)
        return 1;
    double const d = lambda_m1(p, c);
    double value;
    if (d == 0)
    {
        // stationary evaders: the reduced radius drops by 2r per cycle
        value = (p.R0 - 2 * p.r) / (2 * p.r);
    }
    else
    {
        double const lam = c.lambda;
        double const ratio = p.r * (3 - lam) / (p.R0 * (1 - lam) + p.r * (1 + lam));
        if (!(ratio > 0))
            throw InfeasibleSpeed("num_sweeps: region does not shrink", c.speeds.v_critical);
        value = std::log(ratio) / std::log1p(c.Vs * d / (c.Vs + p.VT));
    }
    return std::max(1, static_cast<int>(std::ceil(value)));
}

double final_reduced_radius(ScenarioParams const& p, DerivedConstants const& c, int N)
{
    double const d = lambda_m1(p, c);
    if (d == 0)
        return p.R0 - p.r - 2 * p.r * N;
    double const one_minus = -d;
    double const lam = c.lambda;
    return -2 * p.r / one_minus
           + std::pow(c.c2, N) * (p.R0 * one_minus + p.r * (1 + lam)) / one_minus;
}

double final_radius(ScenarioParams const& p, DerivedConstants const& c, int N)
{
    if (p.R0 <= 2 * p.r)
        return p.R0;
    return p.r + final_reduced_radius(p, c, N);
}

ClosedFormTimes closed_form_times(ScenarioParams const& p,
                                  DerivedConstants const& c,
                                  std::vector<CycleRecord> const& cycles)
{
    ClosedFormTimes out;
    int const N = static_cast<int>(cycles.size());
    for (int i = 0; i < N; ++i)
    {
        out.T_tilde_spiral += cycles[i].T_spiral;
        if (i <= N - 2)
            out.T_tilde_in += cycles[i].T_in;
    }

    double const d = lambda_m1(p, c);
    if (d == 0 || N < 1 || p.R0 <= 2 * p.r)
    {
        out.in_verbatim = out.in_normalized = nan;
        out.spiral_recursive = out.spiral_expanded = nan;
        out.dev_in_verbatim = out.dev_in_normalized = nan;
        out.dev_spiral_recursive = out.dev_spiral_expanded = nan;
        return out;
    }

    double const Vs = c.Vs;
    double const VT = p.VT;
    double const r = p.r;
    double const R0 = p.R0;
    double const lam = c.lambda;
    double const one_minus = -d;
    double const X = VT + Vs * lam;
    double const tail = R0 * one_minus + r * (1 + lam);

    double const head = 2 * r / (Vs + VT) + (R0 - r) / Vs
                        + 2 * r * X / (Vs * (Vs + VT) * one_minus);
    out.in_verbatim
        = head - std::pow(X, N - 1) / (Vs * (Vs + VT) * one_minus) * tail;
    out.in_normalized = head - std::pow(c.c2, N - 1) / (Vs * one_minus) * tail;

    // T_{i+1} = c2 T_i + c3 with fixed point c3 / (1 - c2)
    double const one_minus_c2 = -Vs * d / (Vs + VT);
    double const T0 = (R0 - r) * c.spiral_time_factor;
    double const Tfix = c.c3 / one_minus_c2;
    double const T_last_cycle = Tfix + std::pow(c.c2, N - 1) * (T0 - Tfix);
    out.spiral_recursive = (T0 - c.c2 * T_last_cycle + (N - 1) * c.c3) / one_minus_c2;

    out.spiral_expanded = (r - R0) * (Vs + VT) / (VT * Vs)
                          - 2 * r * X / (VT * Vs * one_minus) + 2 * r * (N - 1) / VT
                          - std::pow(c.c2, N)
                                * ((Vs + VT) * (R0 * d - r * (lam + 1))
                                   / (VT * Vs * one_minus));

    out.dev_in_verbatim = rel_dev(out.in_verbatim, out.T_tilde_in);
    out.dev_in_normalized = rel_dev(out.in_normalized, out.T_tilde_in);
    out.dev_spiral_recursive = rel_dev(out.spiral_recursive, out.T_tilde_spiral);
    out.dev_spiral_expanded = rel_dev(out.spiral_expanded, out.T_tilde_spiral);
    return out;
}

EndGame end_game(ScenarioParams const& p, DerivedConstants const& c, double R_N)
{
    double const Vs = c.Vs;
    double const VT = p.VT;
    double const r = p.r;
    EndGame e;
    double const arc = two_pi / p.n - 2 * p.alpha;
    e.t_last_clamped = arc < 0;
    e.T_last = std::max(0.0, arc) * r / Vs;
    e.T_in_last = R_N / Vs;
    e.eta = (2 * r >= VT * e.T_last + VT * e.T_in_last + R_N) ? 0 : 1;
    e.T_l = r * c.spiral_time_factor;
    e.T_in_f = e.T_l * VT / Vs;
    e.epsilon = (2 * r - R_N) / r;
    e.epsilon_c = 2 * VT * (std::numbers::pi - p.n * (p.alpha - 1)) / (p.n * (VT + Vs));
    e.eta_from_epsilon = e.epsilon >= e.epsilon_c ? 0 : 1;
    return e;
}

SweepSchedule build_schedule(ScenarioParams const& params)
{
    params.validate();
    SweepSchedule s;
    s.params = params;
    s.constants = derive_constants(params);
    DerivedConstants const& c = s.constants;
    if (params.VT > 0 && !(c.Vs > c.speeds.v_critical))
        throw InfeasibleSpeed(fmt::format("sweeper speed {:.12g} does not exceed the "
                                          "critical speed {:.12g}",
                                          c.Vs,
                                          c.speeds.v_critical),
                              c.speeds.v_critical);

    double const r = params.r;
    if (params.R0 <= 2 * r)
    {
        s.cycles.push_back(cycle_step(params.R0, c, params));
        s.R_N = std::min(params.R0, 2 * r);
        s.diagnostics.push_back("region starts within 2r; single sweep then end-game");
    }
    else
    {
        double R = params.R0;
        constexpr std::size_t max_cycles = 10'000'000;
        while (R > 2 * r)
        {
            CycleRecord rec = cycle_step(R, c, params);
            rec.index = static_cast<int>(s.cycles.size());
            R = rec.R_next;
            s.cycles.push_back(rec);
            if (s.cycles.size() > max_cycles)
                throw ConsistencyError("build_schedule: recursion does not terminate");
        }
        s.R_N = R;
    }
    s.N_n = static_cast<int>(s.cycles.size());
    s.N_closed_form = num_sweeps(params, c);
    s.R_hat_N = 2 * r;
    s.R_N_closed_form = final_radius(params, c, s.N_n);
    if (s.N_closed_form != s.N_n)
        s.diagnostics.push_back(fmt::format(
            "closed-form sweep count {} differs from recursion count {}",
            s.N_closed_form,
            s.N_n));
    if (rel_dev(s.R_N_closed_form, s.R_N) > 1e-9)
        s.diagnostics.push_back(fmt::format(
            "closed-form final radius {:.12g} differs from recursion {:.12g}",
            s.R_N_closed_form,
            s.R_N));

    s.closed_forms = closed_form_times(params, c, s.cycles);
    s.T_tilde_in = s.closed_forms.T_tilde_in;
    s.T_tilde_spiral = s.closed_forms.T_tilde_spiral;

    s.end = end_game(params, c, s.R_N);
    if (s.end.t_last_clamped)
        s.diagnostics.push_back("final arc 2pi/n - 2 alpha is negative; clamped to 0");
    if (s.end.eta != s.end.eta_from_epsilon)
        s.diagnostics.push_back(fmt::format(
            "end-game branch: direct test gives eta={}, epsilon={:.12g} vs "
            "epsilon_c={:.12g} gives eta={}",
            s.end.eta,
            s.end.epsilon,
            s.end.epsilon_c,
            s.end.eta_from_epsilon));
    s.eta = s.end.eta;
    s.T_last = s.end.T_last;
    s.T_in_last = s.end.T_in_last;
    s.T_l = s.end.T_l;
    s.T_in_f = s.end.T_in_f;

    s.T_spiral_total = s.T_tilde_spiral + s.T_last + s.eta * s.T_l;
    s.T_in_total = s.T_tilde_in + s.T_in_last + s.eta * s.T_in_f;
    s.T_total = s.T_in_total + s.T_spiral_total;
    return s;
}

}  // namespace pincer
