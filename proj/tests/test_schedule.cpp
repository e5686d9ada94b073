#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pincer/errors.hpp"
#include "pincer/geometry.hpp"
#include "pincer/schedule.hpp"

using namespace pincer;
using oracle::deg;

namespace {

struct Frozen
{
    int n;
    int N;
    double R_N;
    int eta;
    double T_total;
};

// 40-digit recursion oracle, team-size study parameters, speed 1.1 x critical
constexpr Frozen fig3_ref[] = {
    {2, 11, 179.493736504277, 1, 1417.00660662086},
    {4, 11, 81.1190309889898, 0, 1286.18917959101},
    {6, 10, 186.85788682691, 1, 1225.83513286024},
    {8, 10, 156.977840862736, 1, 1189.87322445075},
    {10, 10, 140.662772506933, 0, 1149.11923951156},
    {12, 10, 132.864238463828, 0, 1138.06637336779},
    {14, 10, 130.456629975371, 0, 1134.06571246789},
    {16, 10, 131.425011736872, 0, 1134.97640979041},
};

std::vector<ScenarioParams> grid20()
{
    std::vector<ScenarioParams> g;
    for (int n = 2; n <= 16; n += 2)
        for (double m : {1.05, 1.5})
            g.push_back(oracle::study(n, m));
    for (int n : {2, 4, 8, 16})
        g.push_back(oracle::study(n, 3.0));
    return g;
}

}  // namespace

TEST_CASE("frozen schedules for the sweep-time study")
{
    for (auto const& f : fig3_ref)
    {
        SweepSchedule s = build_schedule(oracle::study(f.n));
        CAPTURE(f.n);
        CHECK(s.N_n == f.N);
        CHECK(s.R_N == doctest::Approx(f.R_N).epsilon(1e-10));
        CHECK(s.eta == f.eta);
        CHECK(s.T_total == doctest::Approx(f.T_total).epsilon(1e-10));
    }
    auto p = oracle::study(4);
    p.alpha = deg(30);
    SweepSchedule s = build_schedule(p);
    CHECK(s.N_n == 11);
    CHECK(s.R_N == doctest::Approx(81.1410432282923).epsilon(1e-10));
    CHECK(s.eta == 0);
    CHECK(s.T_total == doctest::Approx(1278.44831079423).epsilon(1e-10));
    SweepSchedule s15 = build_schedule(oracle::study(4, 1.5));
    CHECK(s15.N_n == 8);
    CHECK(s15.T_total == doctest::Approx(636.390592044545).epsilon(1e-10));
}

TEST_CASE("cycle step at exactly the critical speed")
{
    auto p = oracle::study(4);
    double const vc = critical_speed(p).v_critical;
    p.speed = SpeedSpec::absolute_speed(vc);
    auto c = derive_constants(p);
    CycleRecord rec = cycle_step(p.R0, c, p);
    CHECK(rec.delta == doctest::Approx(2 * p.r * p.VT / (vc + p.VT)).epsilon(1e-9));
    CHECK_THROWS_AS(build_schedule(p), InfeasibleSpeed);
}

TEST_CASE("cycle step below critical speed")
{
    auto p = oracle::study(4, 0.8);
    auto c = derive_constants(p);
    CHECK_THROWS_AS(cycle_step(p.R0, c, p), InfeasibleSpeed);
    try
    {
        build_schedule(oracle::study(4, 0.9));
        FAIL("expected InfeasibleSpeed");
    }
    catch (InfeasibleSpeed const& e)
    {
        CHECK(e.v_critical() == doctest::Approx(8.17248536775268).epsilon(1e-11));
    }
}

TEST_CASE("cycle step matches the reduced-radius recursion")
{
    for (auto const& p : grid20())
    {
        auto c = derive_constants(p);
        CycleRecord rec = cycle_step(p.R0, c, p);
        double const direct = c.c2 * (p.R0 - p.r) + c.c1;
        CHECK(oracle::rel(rec.R_next - p.r, direct) < 1e-12);
        CHECK(rec.T_in == doctest::Approx((2 * p.r - rec.R_tilde * (c.lambda - 1)) / (c.Vs + p.VT)).epsilon(1e-12));
    }
}

TEST_CASE("closed forms agree with recursion on a 20-point grid")
{
    auto g = grid20();
    REQUIRE(g.size() == 20);
    for (auto const& p : g)
    {
        SweepSchedule s = build_schedule(p);
        oracle::Schedule o = oracle::schedule(p, s.constants.Vs);
        CAPTURE(p.n);
        CAPTURE(p.speed.value);
        CHECK(s.N_n == o.N);
        CHECK(num_sweeps(p, s.constants) == o.N);
        CHECK(oracle::rel(final_reduced_radius(p, s.constants, s.N_n), o.R_tilde_N) < 1e-9);
        CHECK(oracle::rel(final_radius(p, s.constants, s.N_n), o.R_N) < 1e-9);
        CHECK(oracle::rel(s.R_N, o.R_N) < 1e-9);
        CHECK(oracle::rel(s.T_tilde_spiral, o.T_tilde_spiral) < 1e-12);
        CHECK(s.closed_forms.dev_spiral_recursive < 1e-9);
        CHECK(s.closed_forms.dev_spiral_expanded < 1e-9);
        CHECK(s.closed_forms.dev_in_normalized < 1e-9);
        // the unnormalised power is off by orders of magnitude
        CHECK(s.closed_forms.dev_in_verbatim > 1);
        CHECK(oracle::rel(s.T_total, o.T_total) < 1e-12);
        CHECK(s.diagnostics.size() <= 1);
    }
}

TEST_CASE("bookkeeping identity")
{
    for (auto const& p : grid20())
    {
        SweepSchedule s = build_schedule(p);
        CHECK(s.T_total == s.T_in_total + s.T_spiral_total);
        double sum = 0;
        for (std::size_t i = 0; i < s.cycles.size(); ++i)
        {
            sum += s.cycles[i].T_spiral;
            if (i + 1 < s.cycles.size())
                sum += s.cycles[i].T_in;
        }
        sum += s.T_last + s.T_in_last + s.eta * (s.T_l + s.T_in_f);
        CHECK(oracle::rel(s.T_total, sum) < 1e-9);
    }
}

TEST_CASE("schedule invariants")
{
    for (auto const& p : grid20())
    {
        SweepSchedule s = build_schedule(p);
        REQUIRE(s.N_n >= 1);
        CHECK(s.R_N > 0);
        CHECK(s.R_N <= 2 * p.r);
        CHECK(s.R_hat_N == 2 * p.r);
        for (std::size_t i = 0; i < s.cycles.size(); ++i)
        {
            auto const& c = s.cycles[i];
            CHECK(c.delta >= 0);
            CHECK(c.delta <= 2 * p.r);
            CHECK(c.T_spiral > 0);
            CHECK(c.R_next < c.R);
            if (i > 0)
                CHECK(c.R - c.R_next > s.cycles[i - 1].R - s.cycles[i - 1].R_next);
        }
    }
}

TEST_CASE("single inward time sum is empty for one cycle")
{
    auto p = oracle::study(4);
    p.R0 = 190;
    SweepSchedule s = build_schedule(p);
    CHECK(s.N_n == 1);
    CHECK(s.T_tilde_in == 0);
    CHECK(s.R_N == doctest::Approx(190));
    CHECK(s.T_tilde_spiral == doctest::Approx(s.cycles[0].T_spiral));
}

TEST_CASE("stationary evaders")
{
    auto p = oracle::study(4);
    p.VT = 0;
    p.speed = SpeedSpec::absolute_speed(5);
    SweepSchedule s = build_schedule(p);
    // reduced radius falls by 2r each cycle: 900, 700, ..., 100
    CHECK(s.N_n == 4);
    CHECK(s.N_closed_form == 4);
    CHECK(s.R_N == doctest::Approx(200));
    CHECK(s.eta == 0);
    CHECK(s.T_l == doctest::Approx(p.r * sweep_angle(4, s.constants.gamma) / 5));
    CHECK(std::isfinite(s.T_total));
    CHECK(s.T_total == doctest::Approx(s.T_in_total + s.T_spiral_total));
}

TEST_CASE("end game branch")
{
    auto p = oracle::study(4);
    auto c = derive_constants(p);
    EndGame e = end_game(p, c, 2 * p.r);
    CHECK(e.eta == 1);
    CHECK(e.epsilon == 0);
    CHECK(e.T_l == doctest::Approx(p.r * (c.lambda - 1) / p.VT).epsilon(1e-12));
    CHECK(e.T_in_f == doctest::Approx(e.T_l * p.VT / c.Vs));

    auto q = p;
    q.VT = 0;
    q.speed = SpeedSpec::absolute_speed(5);
    auto cq = derive_constants(q);
    for (double R : {1.0, 100.0, 199.0, 200.0})
        CHECK(end_game(q, cq, R).eta == 0);

    SweepSchedule s = build_schedule(oracle::study(4, 1.2));
    double const rhs = p.VT * (s.T_last + s.T_in_last) + s.R_N;
    CHECK(s.eta == (2 * p.r >= rhs ? 0 : 1));
}

TEST_CASE("final arc is clamped for wide fans")
{
    auto p = oracle::study(16);
    p.alpha = deg(20);  // 2pi/16 < 2 alpha
    auto c = derive_constants(p);
    EndGame e = end_game(p, c, 100);
    CHECK(e.t_last_clamped);
    CHECK(e.T_last == 0);
}

TEST_CASE("dimensional scaling")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.2, 5);
    for (int n : {2, 6, 12})
    {
        auto p = oracle::study(n, 1.3);
        SweepSchedule base = build_schedule(p);
        double const s = us(rng);

        auto q = p;
        q.R0 *= s;
        q.r *= s;
        SweepSchedule len = build_schedule(q);
        CHECK(len.N_n == base.N_n);
        CHECK(len.eta == base.eta);
        CHECK(len.constants.lambda == doctest::Approx(base.constants.lambda).epsilon(1e-12));
        CHECK(len.T_total == doctest::Approx(s * base.T_total).epsilon(1e-10));

        auto w = p;
        w.VT *= s;
        SweepSchedule spd = build_schedule(w);
        CHECK(spd.N_n == base.N_n);
        CHECK(spd.eta == base.eta);
        CHECK(spd.constants.gamma == base.constants.gamma);
        CHECK(spd.T_total == doctest::Approx(base.T_total / s).epsilon(1e-10));
    }
}

TEST_CASE("total time decreases with speed within a fixed branch")
{
    for (int n = 2; n <= 16; n += 2)
    {
        SweepSchedule prev = build_schedule(oracle::study(n, 1.01));
        for (double m = 1.02; m <= 4.0; m += 0.01)
        {
            SweepSchedule cur = build_schedule(oracle::study(n, m));
            if (cur.N_n == prev.N_n && cur.eta == prev.eta)
                CHECK(cur.T_total < prev.T_total);
            prev = cur;
        }
    }
}

TEST_CASE("a branch change can raise the total time")
{
    // documents why the speed monotonicity check is restricted to a branch
    SweepSchedule a = build_schedule(oracle::study(8, 1.975));
    SweepSchedule b = build_schedule(oracle::study(8, 1.98));
    CHECK((a.N_n != b.N_n || a.eta != b.eta));
    CHECK(b.T_total > a.T_total);
}

TEST_CASE("per-cycle offset angle is logged")
{
    SweepSchedule s = build_schedule(oracle::study(4));
    CHECK(s.cycles[0].gamma_i == doctest::Approx(s.constants.gamma));
    CHECK(s.cycles.back().gamma_i > s.cycles[0].gamma_i);
}
