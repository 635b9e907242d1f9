#include "vlq/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "vlq/config.hpp"
#include "vlq/error.hpp"

namespace vlq {

VelocityGrid::VelocityGrid(std::size_t nv_, double vmax_) : nv(nv_), vmax(vmax_)
{
    if (nv_ < 1) throw InvalidArgument("VelocityGrid: nv must be positive");
    if (nv_ > 1 && !(vmax_ > 0.0)) throw InvalidArgument("VelocityGrid: vmax must be positive");
}

std::vector<double> VelocityGrid::nodes() const
{
    std::vector<double> v(nv);
    for (std::size_t j = 0; j < nv; ++j) v[j] = this->v(j);
    return v;
}

std::vector<double> VelocityGrid::weights() const
{
    if (nv == 1) return {1.0};
    std::vector<double> w(nv, dv());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

PhaseGrid::PhaseGrid(std::size_t nx_, std::size_t nv_, double vmax_) : nx(nx_), vgrid(nv_, vmax_)
{
    if (nx_ < 2 || nx_ % 2 != 0) throw InvalidArgument("PhaseGrid: nx must be even and >= 2");
}

double PhaseGrid::dx() const { return 2.0 * std::numbers::pi / static_cast<double>(nx); }

DistFn::DistFn(PhaseGrid const& g, double t) : grid(g), values(g.size(), 0.0), time(t) {}

DistFn DistFn::from_function(PhaseGrid const& g, std::function<double(double, double)> const& fxv, double t)
{
    DistFn f(g, t);
    for (std::size_t j = 0; j < g.nv(); ++j)
        for (std::size_t i = 0; i < g.nx; ++i) f.at(i, j) = fxv(g.x(i), g.v(j));
    return f;
}

VelocityFn::VelocityFn(VelocityGrid const& g, double t) : grid(g), values(g.nv, 0.0), time(t) {}

VelocityFn VelocityFn::from_function(VelocityGrid const& g, std::function<double(double)> const& fv, double t)
{
    VelocityFn h(g, t);
    for (std::size_t j = 0; j < g.nv; ++j) h.values[j] = fv(g.v(j));
    return h;
}

VelocityFn space_average(DistFn const& f)
{
    VelocityFn out(f.grid.vgrid, f.time);
    auto const nx = static_cast<double>(f.grid.nx);
    for (std::size_t j = 0; j < f.grid.nv(); ++j) {
        double s = 0.0;
        for (double x : f.row(j)) s += x;
        out.values[j] = s / nx;
    }
    return out;
}

double velocity_moment(VelocityFn const& g, int order)
{
    auto const w = g.grid.weights();
    double s = 0.0;
    for (std::size_t j = 0; j < g.grid.nv; ++j) s += w[j] * g.values[j] * std::pow(g.grid.v(j), order);
    return s;
}

std::vector<double> moments(DistFn const& f, std::vector<int> const& orders)
{
    // (1/2pi) sum_i dx = (1/nx) sum_i, so the x-part is the space average.
    auto const avg = space_average(f);
    std::vector<double> out;
    out.reserve(orders.size());
    for (int n : orders) {
        if (n < 0) throw InvalidArgument("moments: orders must be nonnegative");
        out.push_back(velocity_moment(avg, n));
    }
    return out;
}

double lp_norm(DistFn const& f, double p)
{
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : f.values) m = std::max(m, std::abs(x));
        return m;
    }
    auto const w = f.grid.vgrid.weights();
    double const dx = f.grid.dx();
    double s = 0.0;
    for (std::size_t j = 0; j < f.grid.nv(); ++j) {
        double r = 0.0;
        for (double x : f.row(j)) r += (p == 1.0 ? std::abs(x) : p == 2.0 ? x * x : std::pow(std::abs(x), p));
        s += w[j] * r;
    }
    s *= dx;
    return p == 1.0 ? s : p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

double lp_norm(VelocityFn const& g, double p)
{
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : g.values) m = std::max(m, std::abs(x));
        return m;
    }
    auto const w = g.grid.weights();
    double s = 0.0;
    for (std::size_t j = 0; j < g.grid.nv; ++j) s += w[j] * std::pow(std::abs(g.values[j]), p);
    return std::pow(s, 1.0 / p);
}

double hermite_function(int m, double v, double v_th)
{
    double const u = v / v_th;
    double prev = 0.0;
    double cur = std::exp(-0.5 * u * u) / std::pow(std::numbers::pi, 0.25);
    for (int n = 0; n < m; ++n) {
        double const next = std::sqrt(2.0 / (n + 1.0)) * u * cur - std::sqrt(n / (n + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return cur / std::sqrt(v_th);
}

TestSet hermite_test_set(VelocityGrid const& g, int m_max, double v_th)
{
    if (m_max < 0 || !(v_th > 0.0)) throw InvalidArgument("hermite_test_set: need m_max >= 0, v_th > 0");
    TestSet ts;
    for (int m = 0; m <= m_max; ++m) {
        std::vector<double> psi(g.nv);
        for (std::size_t j = 0; j < g.nv; ++j) psi[j] = hermite_function(m, g.v(j), v_th);
        ts.psi.push_back(std::move(psi));
        ts.labels.push_back("psi" + std::to_string(m));
    }
    return ts;
}

std::vector<double> weak_components(VelocityFn const& g, VelocityFn const& h, TestSet const& tests)
{
    if (!(g.grid == h.grid)) throw InvalidArgument("weak_distance: mismatched velocity grids");
    if (tests.psi.empty()) throw InvalidArgument("weak_distance: empty test set");
    auto const w = g.grid.weights();
    std::vector<double> out;
    for (auto const& psi : tests.psi) {
        if (psi.size() != g.grid.nv) throw InvalidArgument("weak_distance: test function size mismatch");
        double s = 0.0;
        for (std::size_t j = 0; j < g.grid.nv; ++j) s += w[j] * (g.values[j] - h.values[j]) * psi[j];
        out.push_back(s);
    }
    return out;
}

double weak_distance(VelocityFn const& g, VelocityFn const& h, TestSet const& tests)
{
    double m = 0.0;
    for (double c : weak_components(g, h, tests)) m = std::max(m, std::abs(c));
    return m;
}

double phase_weak_distance(DistFn const& f, TestSet const& tests, int j_max)
{
    auto const& g = f.grid;
    auto const w = g.vgrid.weights();
    std::size_t const nx = g.nx;
    std::vector<double> cs(nx), sn(nx);
    double best = 0.0;
    for (int jm = 1; jm <= j_max; ++jm) {
        for (std::size_t i = 0; i < nx; ++i) {
            cs[i] = std::cos(jm * g.x(i));
            sn[i] = std::sin(jm * g.x(i));
        }
        std::vector<double> ac(g.nv()), as(g.nv());
        for (std::size_t j = 0; j < g.nv(); ++j) {
            double c = 0.0, s = 0.0;
            auto const row = f.row(j);
            for (std::size_t i = 0; i < nx; ++i) {
                c += row[i] * cs[i];
                s += row[i] * sn[i];
            }
            ac[j] = c / static_cast<double>(nx);
            as[j] = s / static_cast<double>(nx);
        }
        for (auto const& psi : tests.psi) {
            double c = 0.0, s = 0.0;
            for (std::size_t j = 0; j < g.nv(); ++j) {
                c += w[j] * psi[j] * ac[j];
                s += w[j] * psi[j] * as[j];
            }
            best = std::max({best, std::abs(c), std::abs(s)});
        }
    }
    return best;
}

void write_csv(DistFn const& f, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "x,v,value\n";
    for (std::size_t j = 0; j < f.grid.nv(); ++j)
        for (std::size_t i = 0; i < f.grid.nx; ++i)
            os << format_double(f.grid.x(i)) << ',' << format_double(f.grid.v(j)) << ','
               << format_double(f.at(i, j)) << '\n';
}

void write_csv(VelocityFn const& g, std::string const& path, std::string const& value_name)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "v," << value_name << "\n";
    for (std::size_t j = 0; j < g.grid.nv; ++j)
        os << format_double(g.grid.v(j)) << ',' << format_double(g.values[j]) << '\n';
}

}  // namespace vlq
