#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>

#include "vlq/config.hpp"
#include "vlq/error.hpp"
#include "vlq/numerics.hpp"
#include "vlq/parallel.hpp"
#include "vlq/rng.hpp"

using namespace vlq;

TEST_CASE("splitmix64 matches the reference sequence")
{
    // first outputs of the reference generator seeded with 0
    std::uint64_t state = 0;
    auto next = [&] {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    CHECK(rng::splitmix64(0) == next());
    CHECK(rng::splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("derived keys are deterministic and distinct")
{
    CHECK(rng::derive(42, 1, 2) == rng::derive(42, 1, 2));
    CHECK(rng::derive(42, 1, 2) != rng::derive(42, 2, 1));
    std::set<std::uint64_t> keys;
    for (int a = 0; a < 50; ++a)
        for (int b = 0; b < 50; ++b) keys.insert(rng::derive(7, a, b));
    CHECK(keys.size() == 2500);
}

TEST_CASE("counter stream moments")
{
    rng::CounterStream s(rng::derive(1));
    int const n = 200000;
    double m1 = 0, m2 = 0, g1 = 0, g2 = 0, r1 = 0;
    for (int i = 0; i < n; ++i) {
        double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        m1 += u;
        m2 += u * u;
        double z = s.normal();
        g1 += z;
        g2 += z * z;
        r1 += s.rademacher();
    }
    CHECK(m1 / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(m2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(std::abs(g1 / n) < 5.0 / std::sqrt(n));
    CHECK(g2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(r1 / n) < 5.0 / std::sqrt(n));
}

TEST_CASE("parallel_for visits every index once, results independent of workers")
{
    for (int w : {1, 2, 5}) {
        std::vector<std::atomic<int>> hits(1000);
        std::vector<double> slot(1000);
        parallel_for(1000, w, [&](std::size_t i) {
            hits[i]++;
            slot[i] = rng::to_unit(rng::derive(3, i));
        });
        for (auto& h : hits) REQUIRE(h.load() == 1);
        double s = 0;
        for (double x : slot) s += x;
        static double first = s;
        CHECK(s == first);
    }
}

TEST_CASE("parallel_for rethrows")
{
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw NumericalError("boom");
                    }),
                    NumericalError);
}

TEST_CASE("simpson and trapezoid weights integrate polynomials")
{
    auto w = num::simpson_weights(9, 0.25);  // [0, 2]
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(0.25 * i, 3);
    CHECK(s == doctest::Approx(4.0).epsilon(1e-14));
    auto t = num::trapezoid_weights(5, 0.5);
    CHECK(std::accumulate(t.begin(), t.end(), 0.0) == doctest::Approx(2.0));
}

TEST_CASE("tridiagonal solve against a dense product")
{
    std::vector<double> lo{0, -1, -1, -1}, di{4, 4, 4, 4}, up{-1, -1, -1, 0};
    std::vector<double> x{1, 2, 3, 4}, b(4);
    for (int i = 0; i < 4; ++i) b[i] = di[i] * x[i] + (i > 0 ? lo[i] * x[i - 1] : 0) + (i < 3 ? up[i] * x[i + 1] : 0);
    REQUIRE(num::solve_tridiagonal(lo, di, up, b));
    for (int i = 0; i < 4; ++i) CHECK(b[i] == doctest::Approx(x[i]).epsilon(1e-14));
}

TEST_CASE("natural spline reproduces linear data and shifts like evaluation")
{
    std::vector<double> y(21);
    for (int j = 0; j <= 20; ++j) y[j] = 2.0 - 0.5 * j * 0.1;
    num::UniformSpline s(0.0, 0.1, y);
    CHECK(s(0.537) == doctest::Approx(2.0 - 0.5 * 0.537).epsilon(1e-14));
    CHECK(s(5.0, -1.0) == -1.0);
    std::vector<double> z(21);
    for (int j = 0; j <= 20; ++j) z[j] = std::sin(j * 0.1);
    s.fit(0.0, 0.1, z);
    std::vector<double> out(21);
    s.shifted(0.37, out, 0.0);
    for (int j = 0; j <= 20; ++j) {
        double x = (j - 0.37) * 0.1;
        CHECK(out[j] == doctest::Approx(x < 0 ? 0.0 : s(x)).epsilon(1e-13));
    }
    // partition of unity: the shifted sum of nodal values of a spline of constants is exact
    std::vector<double> one(21, 1.0);
    s.fit(0.0, 0.1, one);
    s.shifted(0.37, out, 0.0);
    CHECK(out[10] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("config parse, diagnostics and round trip")
{
    auto c = Config::parse("# c\n[a]\nx = 1.5\ny = hello\n\n[mode]\nk=1\n[mode]\nk=2\n", "t.cfg");
    CHECK(c.require("a").get_double("x") == 1.5);
    CHECK(c.all("mode").size() == 2);
    CHECK(Config::parse(c.serialize()) == c);
    CHECK_THROWS_AS(Config::parse("[a]\nx=1\nx=2\n"), InvalidArgument);
    CHECK_THROWS_AS(Config::parse("x=1\n"), InvalidArgument);
    try {
        c.require("a").require_known({"x"});
        FAIL("unknown key accepted");
    } catch (InvalidArgument const& e) {
        CHECK(std::string(e.what()).find("t.cfg:4") != std::string::npos);
    }
    try {
        c.require("a").get_double("y");
        FAIL("non-number accepted");
    } catch (InvalidArgument const& e) {
        CHECK(std::string(e.what()).find("t.cfg:4") != std::string::npos);
    }
}

TEST_CASE("format_double round-trips")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(*parse_double(format_double(v)) == v);
    CHECK(std::isinf(*parse_double("inf")));
}
