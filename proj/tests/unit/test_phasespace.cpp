#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "vlq/error.hpp"
#include "vlq/gridio.hpp"
#include "vlq/phasespace.hpp"

using namespace vlq;

namespace {
double maxwell(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi); }
}

TEST_CASE("grid geometry")
{
    PhaseGrid g(16, 33, 4.0);
    CHECK(g.dx() == doctest::Approx(2.0 * std::numbers::pi / 16));
    CHECK(g.dv() == doctest::Approx(0.25));
    CHECK(g.v(0) == -4.0);
    CHECK(g.v(32) == 4.0);
    CHECK_THROWS_AS(PhaseGrid(15, 33, 4.0), InvalidArgument);
}

TEST_CASE("Maxwellian moments")
{
    PhaseGrid g(8, 401, 10.0);
    auto f = DistFn::from_function(g, [](double x, double v) { return (1.0 + 0.3 * std::cos(x)) * maxwell(v); });
    auto m = moments(f, {0, 1, 2, 4});
    CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m[1]) < 1e-15);
    CHECK(m[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m[3] == doctest::Approx(3.0).epsilon(1e-12));
    // L2 norm^2 of M over v = 1/(2 sqrt(pi)); x factor: 2pi * (1 + 0.045)
    double const l2 = lp_norm(f, 2.0);
    CHECK(l2 * l2 == doctest::Approx(2.0 * std::numbers::pi * 1.045 / (2.0 * std::sqrt(std::numbers::pi))).epsilon(1e-10));
    CHECK(lp_norm(f, INFINITY) == doctest::Approx(1.3 * maxwell(0.0)));
}

TEST_CASE("space average removes the x-dependence")
{
    PhaseGrid g(32, 65, 6.0);
    auto f = DistFn::from_function(g, [](double x, double v) { return (1.0 + 0.5 * std::sin(3 * x)) * maxwell(v); });
    auto a = space_average(f);
    for (std::size_t j = 0; j < g.nv(); ++j) CHECK(a.values[j] == doctest::Approx(maxwell(g.v(j))).epsilon(1e-14));
}

TEST_CASE("Hermite functions are orthonormal")
{
    VelocityGrid g(801, 14.0);
    for (double vth : {1.0, 1.7}) {
        auto t = hermite_test_set(g, 8, vth);
        REQUIRE(t.psi.size() == 9);
        auto w = g.weights();
        for (int a = 0; a <= 8; ++a)
            for (int b = 0; b <= 8; ++b) {
                double s = 0;
                for (std::size_t j = 0; j < g.nv; ++j) s += w[j] * t.psi[a][j] * t.psi[b][j];
                CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
            }
    }
    // psi_0 closed form
    CHECK(hermite_function(0, 0.3) == doctest::Approx(std::pow(std::numbers::pi, -0.25) * std::exp(-0.045)));
}

TEST_CASE("weak distances")
{
    VelocityGrid g(201, 8.0);
    auto a = VelocityFn::from_function(g, maxwell);
    auto b = a;
    auto tests = hermite_test_set(g);
    CHECK(weak_distance(a, b, tests) == 0.0);
    for (std::size_t j = 0; j < g.nv; ++j) b.values[j] += 1e-3 * tests.psi[2][j];
    CHECK(weak_distance(a, b, tests) == doctest::Approx(1e-3).epsilon(1e-8));
    VelocityFn c(VelocityGrid(101, 8.0));
    CHECK_THROWS_AS(weak_distance(a, c, tests), InvalidArgument);

    PhaseGrid pg(32, 201, 8.0);
    auto hom = DistFn::from_function(pg, [](double, double v) { return maxwell(v); });
    CHECK(phase_weak_distance(hom, tests) < 1e-15);
    auto pert = DistFn::from_function(pg, [](double x, double v) { return (1.0 + 0.2 * std::cos(2 * x)) * maxwell(v); });
    // (1/2pi) int 0.2 cos^2(2x) dx * <M, psi_0> = 0.1 * <M, psi_0>
    double m_psi0 = 0;
    auto w = g.weights();
    for (std::size_t j = 0; j < g.nv; ++j) m_psi0 += w[j] * maxwell(g.v(j)) * tests.psi[0][j];
    CHECK(phase_weak_distance(pert, tests) == doctest::Approx(0.1 * m_psi0).epsilon(1e-10));
}

TEST_CASE("F64GRID round trip")
{
    PhaseGrid g(8, 17, 3.0);
    auto f = DistFn::from_function(g, [](double x, double v) { return std::sin(x) * v + 1e-300; }, 0.125);
    std::stringstream ss;
    write_f64grid(ss, f);
    write_f64grid(ss, f);
    auto h = read_f64grid(ss);
    CHECK(h.grid == g);
    CHECK(h.time == 0.125);
    CHECK(h.values == f.values);
    std::string const path = "phasespace_stack.f64grid";
    {
        std::ofstream os(path, std::ios::binary);
        write_f64grid(os, f);
        write_f64grid(os, h);
    }
    CHECK(read_f64grid_stack(path).size() == 2);
    std::remove(path.c_str());
    std::stringstream bad("F64GRID nx=8 nv=17 vmax=3 time=0\nshort");
    CHECK_THROWS(read_f64grid(bad));
}
