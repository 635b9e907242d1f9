#include "vlq/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vlq/config.hpp"
#include "vlq/error.hpp"
#include "vlq/faddeeva.hpp"

namespace vlq {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

double gauss(double v, MaxwellianComponent const& c)
{
    double const u = (v - c.drift) / c.v_th;
    return c.density * std::exp(-0.5 * u * u) / (std::sqrt(2.0 * pi) * c.v_th);
}

}  // namespace

VelocityProfile VelocityProfile::maxwellian(VelocityGrid const& g, double v_th, double drift)
{
    return mixture(g, {{1.0, drift, v_th}}, "maxwellian");
}

VelocityProfile VelocityProfile::bump_on_tail(VelocityGrid const& g, double n_b, double v_b, double v_tb, double v_th)
{
    if (!(n_b >= 0.0 && n_b < 1.0)) throw InvalidArgument("bump_on_tail: n_b must be in [0, 1)");
    return mixture(g, {{1.0 - n_b, 0.0, v_th}, {n_b, v_b, v_tb}}, "bump_on_tail");
}

VelocityProfile VelocityProfile::mixture(VelocityGrid const& g, std::vector<MaxwellianComponent> comps, std::string tag)
{
    if (comps.empty()) throw InvalidArgument("velocity profile: empty mixture");
    double total = 0.0;
    for (auto const& c : comps) {
        if (!(c.v_th > 0.0) || !(c.density >= 0.0)) throw InvalidArgument("velocity profile: bad component");
        total += c.density;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("velocity profile: densities must sum to 1");
    VelocityProfile p;
    p.components_ = std::move(comps);
    p.tag_ = std::move(tag);
    p.f_ = VelocityFn::from_function(g, [&](double v) { return p.value(v); });
    double const m0 = velocity_moment(p.f_, 0);
    if (std::abs(m0 - 1.0) > 1e-8)
        throw InvalidArgument("velocity profile: grid too narrow, mass " + format_double(m0) + " != 1");
    p.v_th_ = std::sqrt(velocity_moment(p.f_, 2) / m0);
    return p;
}

VelocityProfile VelocityProfile::gridded(VelocityFn const& f)
{
    if (f.grid.nv < 4) throw InvalidArgument("velocity profile: need at least 4 nodes");
    VelocityProfile p;
    p.f_ = f;
    p.tag_ = "gridded";
    double const m0 = velocity_moment(f, 0);
    if (!(m0 > 0.0)) throw InvalidArgument("velocity profile: nonpositive mass");
    p.v_th_ = std::sqrt(velocity_moment(f, 2) / m0);
    p.spline_.fit(-f.grid.vmax, f.grid.dv(), f.values);
    return p;
}

double VelocityProfile::value(double v) const
{
    if (components_.empty()) return spline_(v, 0.0);
    double s = 0.0;
    for (auto const& c : components_) s += gauss(v, c);
    return s;
}

double VelocityProfile::derivative(double v) const
{
    if (components_.empty()) {
        if (std::abs(v) > f_.grid.vmax) return 0.0;
        return spline_.derivative(v);
    }
    double s = 0.0;
    for (auto const& c : components_) s += -(v - c.drift) / (c.v_th * c.v_th) * gauss(v, c);
    return s;
}

double VelocityProfile::bulk_v_th() const
{
    if (components_.empty()) return v_th_;
    auto it = std::max_element(components_.begin(), components_.end(),
                               [](auto const& a, auto const& b) { return a.density < b.density; });
    return it->v_th;
}

double VelocityProfile::mass() const { return velocity_moment(f_, 0); }

double bohm_gross(double k, double v_th, double omega_p)
{
    double const kl = k * v_th / omega_p;
    return omega_p * std::sqrt(1.0 + 3.0 * kl * kl);
}

std::complex<double> dispersion_value(VelocityProfile const& p, double k, std::complex<double> z, double omega_p)
{
    if (k == 0.0 || !std::isfinite(k)) throw InvalidArgument("dispersion_value: k must be nonzero");
    double const pref = omega_p * omega_p / (k * k);
    cplx const c = z / k;  // resonant (complex) velocity
    if (p.analytic()) {
        // -int f'/(v - c) dv = (n/s^2)(1 + zeta Z(zeta)) on the Landau contour; for k < 0 the
        // real-line integral continues through conj(Z(conj zeta)).
        cplx sum = 0.0;
        for (auto const& comp : p.components()) {
            cplx const zeta = (c - comp.drift) / (std::sqrt(2.0) * comp.v_th);
            cplx const Z = k > 0 ? plasma_z(zeta) : std::conj(plasma_z(std::conj(zeta)));
            sum += comp.density / (comp.v_th * comp.v_th) * (1.0 + zeta * Z);
        }
        return 1.0 + pref * sum;
    }
    double const gamma = z.imag();
    if (!(gamma > 0.0) && std::abs(gamma) < 1e-4 * omega_p)
        throw InvalidArgument("dispersion_value: gridded profiles need Im z > 0 or |Im z| >= 1e-4 omega_p");
    auto const& g = p.f().grid;
    auto re = [&](double v) { return (p.derivative(v) / (v - c)).real(); };
    auto im = [&](double v) { return (p.derivative(v) / (v - c)).imag(); };
    cplx integral = 0.0;
    double const dv = g.dv();
    for (std::size_t j = 0; j + 1 < g.nv; ++j) {
        double const a = g.v(j), b = a + dv;
        double er = 0.0, ei = 0.0;
        integral += cplx(boost::math::quadrature::gauss_kronrod<double, 15>::integrate(re, a, b, 8, 1e-12, &er),
                         boost::math::quadrature::gauss_kronrod<double, 15>::integrate(im, a, b, 8, 1e-12, &ei));
    }
    return 1.0 - pref * integral;
}

namespace {

DispersionRoot finish(double k, cplx z, double res, int it, double omega_p)
{
    DispersionRoot r;
    r.k = k;
    r.omega = z.real();
    r.gamma = z.imag();
    r.residual = res;
    r.iterations = it;
    r.unphysical = std::abs(r.gamma) > omega_p;
    return r;
}

}  // namespace

DispersionRoot solve_root(VelocityProfile const& p, double k, std::complex<double> initial, RootOptions const& opt)
{
    auto D = [&](cplx z) { return dispersion_value(p, k, z, opt.omega_p); };
    cplx z = initial;
    cplx z_prev = z;
    cplx f = D(z), f_prev = f;
    bool have_prev = false;
    for (int it = 0; it <= opt.max_iter; ++it) {
        if (!std::isfinite(f.real()) || !std::isfinite(f.imag()))
            throw NumericalError("solve_root: non-finite dispersion value at z = " + format_double(z.real()) + " + " +
                                 format_double(z.imag()) + "i");
        if (std::abs(f) < opt.tol) {
            // one polishing Newton step keeps exponentially small damping rates meaningful
            double const h = 1e-6 * std::max(1.0, std::abs(z));
            cplx const dfd = (D(z + h) - D(z - h)) / (2.0 * h);
            if (std::abs(dfd) > 0.0) {
                cplx const zp = z - f / dfd;
                cplx const fp = D(zp);
                if (std::abs(fp) <= std::abs(f)) z = zp, f = fp;
            }
            return finish(k, z, std::abs(f), it, opt.omega_p);
        }
        if (it == opt.max_iter) break;
        double const h = 1e-6 * std::max(1.0, std::abs(z));
        cplx const dfd = (D(z + h) - D(z - h)) / (2.0 * h);
        cplx step;
        bool const newton_ok = std::abs(dfd) > 1e-12 * std::max(1.0, std::abs(f)) && std::isfinite(std::abs(dfd));
        if (newton_ok) {
            step = -f / dfd;
            // trust region: never jump more than a quarter of |z| (at least 0.25 omega_p)
            double const cap = 0.25 * std::max(opt.omega_p, std::abs(z));
            if (std::abs(step) > cap) step *= cap / std::abs(step);
        } else if (have_prev && f != f_prev) {
            step = -f * (z - z_prev) / (f - f_prev);  // secant fallback
        } else {
            throw NumericalError("solve_root: singular Jacobian at the initial guess");
        }
        cplx z_new = z + step;
        cplx f_new = D(z_new);
        for (int b = 0; b < 30 && !(std::abs(f_new) < std::abs(f)); ++b) {
            step *= 0.5;
            z_new = z + step;
            f_new = D(z_new);
        }
        z_prev = z;
        f_prev = f;
        have_prev = true;
        z = z_new;
        f = f_new;
    }
    throw NumericalError("solve_root: no convergence after " + std::to_string(opt.max_iter) + " iterations at k = " +
                         format_double(k) + " (|D| = " + format_double(std::abs(f)) + ")");
}

DispersionRoot solve_root(VelocityProfile const& p, double k, RootOptions const& opt)
{
    double const w = (k < 0 ? -1.0 : 1.0) * bohm_gross(k, p.bulk_v_th(), opt.omega_p);
    double gam = 0.0;
    if (std::abs(w / k) <= p.f().grid.vmax) gam = ql_growth_rate(p, k, w, opt.omega_p);
    gam = std::clamp(gam, -0.2 * std::abs(w), 0.2 * std::abs(w));
    return solve_root(p, k, cplx(w, gam), opt);
}

double ql_growth_rate(VelocityProfile const& p, double k, double omega, double omega_p)
{
    if (k == 0.0) throw InvalidArgument("ql_growth_rate: k must be nonzero");
    double const v = omega / k;
    if (std::abs(v) > p.f().grid.vmax)
        throw InvalidArgument("ql_growth_rate: resonant velocity " + format_double(v) + " outside the grid");
    return 0.5 * pi * omega_p * omega_p / (k * k) * omega * (k > 0 ? 1.0 : -1.0) * p.derivative(v);
}

double ql_growth_rate(VelocityFn const& f, double k, double omega, double omega_p)
{
    if (k == 0.0) throw InvalidArgument("ql_growth_rate: k must be nonzero");
    double const v = omega / k;
    auto const& g = f.grid;
    if (std::abs(v) > g.vmax)
        throw InvalidArgument("ql_growth_rate: resonant velocity " + format_double(v) + " outside the grid");
    double const dv = g.dv();
    // centered-difference slopes at nodes, linearly interpolated to v
    auto slope = [&](std::size_t j) {
        if (j == 0) return (f.values[1] - f.values[0]) / dv;
        if (j + 1 == g.nv) return (f.values[j] - f.values[j - 1]) / dv;
        return (f.values[j + 1] - f.values[j - 1]) / (2.0 * dv);
    };
    double const u = (v + g.vmax) / dv;
    auto j = static_cast<std::size_t>(std::floor(u));
    if (j + 1 >= g.nv) j = g.nv - 2;
    double const w = u - static_cast<double>(j);
    double const fp = (1.0 - w) * slope(j) + w * slope(j + 1);
    return 0.5 * pi * omega_p * omega_p / (k * k) * omega * (k > 0 ? 1.0 : -1.0) * fp;
}

PenroseResult penrose_check(VelocityProfile const& p)
{
    PenroseResult res;
    auto const& g = p.f().grid;
    auto const& y = p.f().values;
    double const peak = *std::max_element(y.begin(), y.end());
    double const L = g.vmax;
    for (std::size_t j = 1; j + 1 < g.nv; ++j) {
        if (!(y[j] < y[j - 1] && y[j] <= y[j + 1])) continue;
        if (y[j] < 1e-12 * peak) continue;  // numerical noise in the far tail
        // refine v* with a parabola through the three nodes
        double const d2 = y[j - 1] - 2.0 * y[j] + y[j + 1];
        double vs = g.v(j);
        if (d2 > 0.0) vs += 0.5 * g.dv() * (y[j - 1] - y[j + 1]) / d2;
        double const fs = p.value(vs);
        auto integrand = [&](double v) {
            double const d = v - vs;
            if (std::abs(d) < 1e-7) return 0.5 * (p.value(vs + 1e-4) - 2.0 * fs + p.value(vs - 1e-4)) / 1e-8;
            return (p.value(v) - fs) / (d * d);
        };
        double P = 0.0;
        double const pieces = 64.0;
        for (double lo = -L; lo < vs - 1e-15; lo += (vs + L) / pieces)
            P += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo,
                                                                             std::min(lo + (vs + L) / pieces, vs), 10, 1e-12);
        for (double lo = vs; lo < L - 1e-15; lo += (L - vs) / pieces)
            P += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo,
                                                                             std::min(lo + (L - vs) / pieces, L), 10, 1e-12);
        // beyond the grid f ~ 0: int_{|v|>L} -f(v*)/(v-v*)^2 dv
        P -= fs * (1.0 / (L - vs) + 1.0 / (L + vs));
        res.minima.push_back({vs, P});
        if (P > 0.0) res.unstable = true;
    }
    if (res.minima.empty()) res.note = "no interior minimum; stable by default";
    return res;
}

}  // namespace vlq
