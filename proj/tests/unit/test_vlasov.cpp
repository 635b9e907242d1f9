#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "vlq/error.hpp"
#include "vlq/vlasov.hpp"

using namespace vlq;

namespace {

constexpr double pi = std::numbers::pi;

double maxwell(double v, double drift = 0.0)
{
    return std::exp(-0.5 * (v - drift) * (v - drift)) / std::sqrt(2 * pi);
}

double max_abs_diff(std::vector<double> const& a, std::vector<double> const& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// E(t, tau, x) = value, independent of everything; NaN once t passes `poison_after`
struct ConstantField final : FieldRealization {
    double value = 1.0;
    double poison_after = std::numeric_limits<double>::infinity();
    double eval(double t, double, double) const override
    {
        return t > poison_after ? std::numeric_limits<double>::quiet_NaN() : value;
    }
    std::string kind() const override { return "constant"; }
};

FieldPtr constant_field(double value, double poison_after = std::numeric_limits<double>::infinity())
{
    auto f = std::make_shared<ConstantField>();
    f->value = value;
    f->poison_after = poison_after;
    return f;
}

FieldPtr smooth_field(double eps)
{
    WkbFieldSpec w;
    w.epsilon = eps;
    w.modes = {{1, 0.3, 1.1}, {-1, 0.3, -1.1}, {2, 0.2, 1.4}, {-2, 0.2, -1.4}};
    return make_wkb(w);
}

VlasovConfig base(double eps, std::size_t nx, std::size_t nv, double vmax)
{
    VlasovConfig c;
    c.epsilon = eps;
    c.grid = PhaseGrid(nx, nv, vmax);
    return c;
}

}  // namespace

TEST_CASE("free flow: identity, single mode, group law, unitarity")
{
    PhaseGrid g(32, 65, 6.0);
    auto h = [](double v) { return maxwell(v) * (1 + 0.3 * v); };
    auto f = DistFn::from_function(g, [&](double x, double v) { return std::cos(x) * h(v) + 0.2 * std::sin(3 * x) * maxwell(v); });
    CHECK(free_flow(f, 0.0, 0.5).values == f.values);

    double const eps = 0.7, t = 0.37;
    auto ff = free_flow(f, t, eps);
    double err = 0.0;
    for (std::size_t j = 0; j < g.nv(); ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            double const v = g.v(j), xs = g.x(i) - v * t / (eps * eps);
            err = std::max(err, std::abs(ff.at(i, j) - (std::cos(xs) * h(v) + 0.2 * std::sin(3 * xs) * maxwell(v))));
        }
    CHECK(err < 1e-13);

    auto two = free_flow(free_flow(f, 0.21, eps), 0.16, eps);
    CHECK(max_abs_diff(two.values, ff.values) < 1e-12);

    // row L2 norms are preserved
    for (std::size_t j = 0; j < g.nv(); ++j) {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < g.nx; ++i) a += f.at(i, j) * f.at(i, j), b += ff.at(i, j) * ff.at(i, j);
        CHECK(std::abs(std::sqrt(a) - std::sqrt(b)) <= 1e-12 * std::max(1.0, std::sqrt(a)));
    }
}

TEST_CASE("Poisson solve")
{
    std::size_t const n = 64;
    double const dx = 2 * pi / n;
    std::vector<double> rho(n, 1.0);
    auto E = poisson_solve(rho);
    for (double e : E.values) CHECK(e == 0.0);

    for (int k : {1, 3, 7}) {
        for (std::size_t i = 0; i < n; ++i) rho[i] = 1 + 0.4 * std::cos(k * dx * i);
        E = poisson_solve(rho);
        double mean = 0.0, err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mean += E.values[i];
            err = std::max(err, std::abs(E.values[i] - 0.4 * std::sin(k * dx * i) / k));
        }
        CHECK(err < 1e-14);
        CHECK(std::abs(mean) < 1e-14);
    }

    // dE/dx recovers rho - 1 (spectral derivative of a band-limited field, checked by direct DFT)
    for (std::size_t i = 0; i < n; ++i) rho[i] = 1 + 0.3 * std::cos(2 * dx * i) - 0.1 * std::sin(5 * dx * i + 0.4);
    E = poisson_solve(rho);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (int m = 1; m < static_cast<int>(n / 2); ++m) {
            double a = 0.0, b = 0.0;
            for (std::size_t q = 0; q < n; ++q) a += E.values[q] * std::cos(m * dx * q), b += E.values[q] * std::sin(m * dx * q);
            a *= 2.0 / n, b *= 2.0 / n;
            d += m * (-a * std::sin(m * dx * i) + b * std::cos(m * dx * i));
        }
        err = std::max(err, std::abs(d - (rho[i] - 1)));
    }
    CHECK(err < 1e-10);

    std::vector<double> charged(n, 1.01);
    CHECK_THROWS_AS(poisson_solve(charged), InvalidArgument);
    CHECK_NOTHROW(poisson_solve(charged, 0.02));
    CHECK_THROWS_AS(poisson_solve(std::vector<double>(7, 1.0)), InvalidArgument);
}

TEST_CASE("charge density is the trapezoid v-integral")
{
    PhaseGrid g(16, 33, 4.0);
    auto f = DistFn::from_function(g, [](double x, double v) { return (1 + 0.5 * std::cos(x)) * (1 + v * v); });
    auto rho = charge_density(f);
    // trapezoid of 1 + v^2 on 33 nodes: exact integral plus the v^2 endpoint correction dv^2 * 2 vmax / 6
    double const dv = g.dv();
    double const trap = 8.0 + 128.0 / 3 + dv * dv * 8.0 / 6;
    for (std::size_t i = 0; i < g.nx; ++i) CHECK(rho[i] == doctest::Approx((1 + 0.5 * std::cos(g.x(i))) * trap).epsilon(1e-13));
}

TEST_CASE("CFL bound and default step")
{
    auto c = base(0.5, 32, 65, 8.0);
    double const dx = 2 * pi / 32, dv = 16.0 / 64;
    CHECK(cfl_dt(c, 0.0, 0.5) == doctest::Approx(0.5 * 0.25 * dx / 8).epsilon(1e-15));
    CHECK(cfl_dt(c, 10.0, 0.5) == doctest::Approx(0.5 * 0.25 * std::min(dx / 8, dv * 0.5 / 10)).epsilon(1e-15));
    c.field = constant_field(10.0);
    c.t_end = 1.0;
    VlasovSolver s(c);
    CHECK(s.dt() == doctest::Approx(cfl_dt(c, 10.0, 0.1)).epsilon(1e-14));
    auto bad = base(1.5, 32, 65, 8.0);
    CHECK_THROWS_AS(VlasovSolver{bad}, InvalidArgument);
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(VlasovSolver{bad}, InvalidArgument);
}

TEST_CASE("zero field: a step is the free flow")
{
    auto c = base(0.4, 32, 65, 6.0);
    c.field = zero_field();
    VlasovSolver s(c);
    auto f = DistFn::from_function(c.grid, [](double x, double v) { return (1 + 0.5 * std::cos(x) + 0.1 * std::sin(2 * x)) * maxwell(v); });
    auto g = f;
    s.step(g, 0.01);
    auto ref = free_flow(f, 0.01, 0.4);
    CHECK(max_abs_diff(g.values, ref.values) < 1e-13);
    CHECK(g.time == doctest::Approx(0.01));
}

TEST_CASE("constant field: exact characteristics and reversibility")
{
    double errs[2];
    int idx = 0;
    for (std::size_t nv : {129u, 257u}) {
        auto c = base(1.0, 8, nv, 8.0);
        c.field = constant_field(1.0);
        VlasovSolver s(c);
        auto f = DistFn::from_function(c.grid, [](double, double v) { return maxwell(v); });
        double const dt = 0.05;
        auto g = f;
        s.step(g, dt);
        double err = 0.0;
        for (std::size_t j = 0; j < nv; ++j)
            for (std::size_t i = 0; i < c.grid.nx; ++i) err = std::max(err, std::abs(g.at(i, j) - maxwell(c.grid.v(j) - dt)));
        double const dv = c.grid.dv();
        CHECK(err <= dv * dv * dv * dv);
        errs[idx++] = err;

        // back along the same characteristics; the backward step has its own interpolation error
        auto exact = DistFn::from_function(c.grid, [&](double, double v) { return maxwell(v - dt); });
        exact.time = dt;
        s.step(exact, -dt);
        double const err_back = max_abs_diff(exact.values, f.values);
        auto back = g;
        s.step(back, -dt);
        CHECK(max_abs_diff(back.values, f.values) <= 2 * std::max(err, err_back));

        // a uniform f is untouched away from the outflow edges
        auto u = DistFn::from_function(c.grid, [](double, double) { return 1.0; });
        s.step(u, dt);
        for (std::size_t j = 8; j + 8 < nv; ++j) CHECK(std::abs(u.at(3, j) - 1.0) < 1e-13);
    }
    // fourth order in dv
    CHECK(errs[0] / errs[1] > 10.0);
}

TEST_CASE("prescribed smooth field: mass per step and L2 over 1000 steps")
{
    auto c = base(1.0, 64, 257, 8.0);
    c.field = smooth_field(1.0);
    c.dt = 1e-3;
    c.t_end = 1.0;
    VlasovSolver s(c);
    auto f = DistFn::from_function(c.grid, [](double x, double v) { return (1 + 0.2 * std::cos(x)) * maxwell(v); });
    double const m0 = moments(f, {0})[0];
    auto g = f;
    for (int i = 0; i < 20; ++i) {
        double const before = moments(g, {0})[0];
        double const loss = s.step(g, 1e-3);
        CHECK(std::abs(moments(g, {0})[0] + loss - before) < 1e-12);
    }
    CHECK(std::abs(moments(g, {0})[0] - m0) < 1e-12);

    auto tr = s.run(f, {{0.5, 1.0}, 100});
    REQUIRE_FALSE(tr.aborted);
    CHECK(tr.steps == 1000);
    CHECK(tr.cfl_ok);
    double const l20 = tr.diag.front().l2;
    for (auto const& d : tr.diag) {
        CHECK(std::abs(d.l2 - l20) / l20 <= 1e-6);
        CHECK(std::abs(d.mass - tr.diag.front().mass) < 1e-11);
        CHECK(d.linf <= tr.diag.front().linf * (1 + 1e-3));
    }
}

TEST_CASE("run hits snapshot times exactly and records the schedule")
{
    auto c = base(0.5, 16, 65, 6.0);
    c.field = smooth_field(0.5);
    c.dt = 7e-3;
    c.t_end = 0.1;
    VlasovSolver s(c);
    auto f = DistFn::from_function(c.grid, [](double x, double v) { return (1 + 0.1 * std::cos(x)) * maxwell(v); });
    auto tr = s.run(f, {{0.0, 0.0333, 0.05, 0.1}, 0});
    REQUIRE(tr.snapshots.size() == 4);
    CHECK(tr.snapshots[0].time == 0.0);
    CHECK(tr.snapshots[1].time == 0.0333);
    CHECK(tr.snapshots[2].time == 0.05);
    CHECK(tr.snapshots[3].time == 0.1);
    CHECK(tr.fields.size() == 4);
    CHECK(tr.averages.size() == 4);
    CHECK(tr.diag.back().t == 0.1);
    CHECK_THROWS_AS(s.run(f, {{0.2}, 0}), InvalidArgument);
}

TEST_CASE("free transport homogenizes: x-average fixed, phase weak distance decays")
{
    auto c = base(0.5, 32, 257, 8.0);
    c.field = zero_field();
    c.dt = 0.01;
    c.t_end = 2.0;
    VlasovSolver s(c);
    auto f = DistFn::from_function(c.grid, [](double x, double v) { return (1 + 0.5 * std::cos(x)) * maxwell(v); });
    auto tr = s.run(f, {{0.0, 0.1, 0.5, 2.0}, 0});
    auto tests = hermite_test_set(c.grid.vgrid, 8);
    for (auto const& a : tr.averages) CHECK(max_abs_diff(a.values, tr.averages.front().values) < 1e-12);
    double prev = phase_weak_distance(tr.snapshots[0], tests);
    for (std::size_t i = 1; i < tr.snapshots.size(); ++i) {
        double const d = phase_weak_distance(tr.snapshots[i], tests);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-3 * phase_weak_distance(tr.snapshots[0], tests));
}

TEST_CASE("self-consistent Landau damping: field decays, energy bounded")
{
    auto c = base(1.0, 32, 129, 8.0);
    c.grid = PhaseGrid(32, 129, 8.0);
    c.self_consistent = true;
    c.dt = 0.05;
    c.t_end = 20.0;
    // k = 1 on [0, 2 pi): strongly damped (gamma ~ -0.85 in these units after the eps-scaling of time)
    auto f = DistFn::from_function(c.grid, [](double x, double v) { return (1 + 0.01 * std::cos(x)) * maxwell(v); });
    VlasovSolver s(c);
    auto tr = s.run(f, {{}, 1});
    REQUIRE_FALSE(tr.aborted);
    CHECK_FALSE(tr.energy_violation);
    CHECK(tr.max_energy_excess <= 1e-4);
    double early = 0.0, late = 0.0;
    for (auto const& d : tr.diag) {
        if (d.t <= 2.0) early = std::max(early, d.field_l2);
        if (d.t >= 10.0) late = std::max(late, d.field_l2);
    }
    CHECK(late < 0.1 * early);
    for (auto const& d : tr.diag) CHECK(std::abs(d.mass - tr.diag.front().mass) < 1e-10);
}

TEST_CASE("non-finite values abort with the last good snapshot")
{
    auto c = base(1.0, 8, 33, 5.0);
    c.field = constant_field(0.1, 0.3);
    c.dt = 0.05;
    c.t_end = 1.0;
    VlasovSolver s(c);
    auto f = DistFn::from_function(c.grid, [](double, double v) { return maxwell(v); });
    auto tr = s.run(f, {{1.0}, 1});
    CHECK(tr.aborted);
    CHECK(tr.abort_reason.find("non-finite") != std::string::npos);
    REQUIRE_FALSE(tr.snapshots.empty());
    auto const& last = tr.snapshots.back();
    CHECK(last.time <= 0.3 + 1e-12);
    for (double x : last.values) CHECK(std::isfinite(x));
}
