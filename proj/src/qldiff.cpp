#include "vlq/qldiff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "vlq/config.hpp"
#include "vlq/dispersion.hpp"
#include "vlq/error.hpp"
#include "vlq/numerics.hpp"

namespace vlq {

std::string to_string(Scheme s) { return s == Scheme::crank_nicolson ? "crank_nicolson" : "implicit_euler"; }

Scheme scheme_from_string(std::string const& s)
{
    if (s == "crank_nicolson" || s == "cn") return Scheme::crank_nicolson;
    if (s == "implicit_euler" || s == "ie") return Scheme::implicit_euler;
    throw InvalidArgument("unknown scheme '" + s + "'");
}

VelocityFn diffuse_step(VelocityFn const& f, std::span<double const> D, double dt, Scheme scheme)
{
    std::size_t const n = f.grid.nv;
    if (D.size() != n) throw InvalidArgument("diffuse_step: D has " + std::to_string(D.size()) + " nodes, grid has " + std::to_string(n));
    if (!(dt > 0.0)) throw InvalidArgument("diffuse_step: dt must be > 0");
    for (std::size_t j = 0; j < n; ++j)
        if (!(D[j] >= 0.0)) throw InvalidArgument("diffuse_step: negative or non-finite D at node " + std::to_string(j));
    double const dv = f.grid.dv();
    auto const w = f.grid.weights();
    // face conductances c_{j+1/2} = D_face / dv
    std::vector<double> c(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) c[j] = 0.5 * (D[j] + D[j + 1]) / dv;

    double const theta = scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
    auto const& y = f.values;
    // (L f)_j = c_{j+1/2}(f_{j+1}-f_j) - c_{j-1/2}(f_j-f_{j-1})
    auto Lf = [&](std::size_t j) {
        double s = 0.0;
        if (j + 1 < n) s += c[j] * (y[j + 1] - y[j]);
        if (j > 0) s -= c[j - 1] * (y[j] - y[j - 1]);
        return s;
    };
    std::vector<double> lo(n, 0.0), di(n), up(n, 0.0), rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
        double cl = j > 0 ? c[j - 1] : 0.0, cr = j + 1 < n ? c[j] : 0.0;
        di[j] = w[j] + theta * dt * (cl + cr);
        if (j > 0) lo[j] = -theta * dt * cl;
        if (j + 1 < n) up[j] = -theta * dt * cr;
        rhs[j] = w[j] * y[j] + (1.0 - theta) * dt * Lf(j);
    }
    VelocityFn out = f;
    if (!num::solve_tridiagonal(lo, di, up, rhs)) throw NumericalError("diffuse_step: tridiagonal solve failed");
    out.values = std::move(rhs);
    return out;
}

DiffusionSource static_diffusion(std::vector<double> D)
{
    return [D = std::move(D)](double, VelocityFn const&) { return D; };
}

DiffusionTrajectory run_diffusion(DiffusionRun const& run, std::vector<double> const& times)
{
    if (!(run.dt > 0.0)) throw InvalidArgument("run_diffusion: dt must be > 0");
    if (!run.D) throw InvalidArgument("run_diffusion: no diffusion source");
    std::vector<double> events(times);
    for (double t : events)
        if (t < 0.0 || t > run.t_end) throw InvalidArgument("run_diffusion: time " + format_double(t) + " outside [0, t_end]");
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    DiffusionTrajectory tr;
    VelocityFn f = run.f;
    double t = 0.0;
    for (double te : events) {
        if (te > t) {
            auto const n = static_cast<std::size_t>(std::ceil((te - t) / run.dt - 1e-9));
            double const h = (te - t) / static_cast<double>(n);
            for (std::size_t s = 0; s < n; ++s) {
                double const tn = t + static_cast<double>(s) * h;
                auto const D = run.D(tn + 0.5 * h, f);
                f = diffuse_step(f, D, h, run.scheme);
                ++tr.steps;
            }
            t = te;
            f.time = te;
        }
        tr.times.push_back(te);
        tr.snapshots.push_back(f);
    }
    return tr;
}

std::vector<SpectralMode> WaveSpectrum::modes() const
{
    std::vector<SpectralMode> m(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) m[i] = SpectralMode{k[i], energy[i], omega[i], 0.0};
    return m;
}

void validate(WaveSpectrum const& s)
{
    if (s.energy.size() != s.k.size() || s.omega.size() != s.k.size())
        throw InvalidArgument("wave spectrum: k, energy and omega lengths differ");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s.k[i]) || !std::isfinite(s.omega[i]) || !std::isfinite(s.energy[i]))
            throw InvalidArgument("wave spectrum: non-finite entry at mode " + std::to_string(i));
        if (s.k[i] == 0.0) throw InvalidArgument("wave spectrum: k = 0 mode");
        if (s.energy[i] < 0.0) throw InvalidArgument("wave spectrum: negative energy at k = " + format_double(s.k[i]));
        bool paired = false;
        for (std::size_t j = 0; j < s.size(); ++j)
            if (s.k[j] == -s.k[i] && s.energy[j] == s.energy[i] && s.omega[j] == -s.omega[i]) paired = true;
        if (!paired) throw InvalidArgument("wave spectrum: mode k = " + format_double(s.k[i]) + " has no -k partner");
    }
}

WaveSpectrum bohm_gross_spectrum(std::vector<double> const& k_positive, double energy, double v_th, double omega_p)
{
    WaveSpectrum s;
    for (double k : k_positive) {
        if (!(k > 0.0)) throw InvalidArgument("bohm_gross_spectrum: k must be > 0");
        double const w = bohm_gross(k, v_th, omega_p);
        for (double sg : {1.0, -1.0}) {
            s.k.push_back(sg * k);
            s.energy.push_back(energy);
            s.omega.push_back(sg * w);
        }
    }
    return s;
}

DiffusionMatrix assemble_ql_coefficient(WaveSpectrum const& s, Regularization reg, VelocityGrid const& g)
{
    validate(s);
    return dql_limit(s.modes(), reg, 0.0, g.nodes());
}

double max_positive_slope(VelocityFn const& f, double lo, double hi)
{
    auto const& g = f.grid;
    double const dv = g.dv();
    double m = 0.0;
    for (std::size_t j = 1; j + 1 < g.nv; ++j) {
        double const v = g.v(j);
        if (v < lo || v > hi) continue;
        m = std::max(m, (f.values[j + 1] - f.values[j - 1]) / (2.0 * dv));
    }
    return m;
}

QlTrajectory ql_system_run(VelocityFn const& f0, WaveSpectrum const& spectrum0, QlOptions const& opt)
{
    validate(spectrum0);
    if (!(opt.dt > 0.0) || !(opt.t_end >= 0.0)) throw InvalidArgument("ql_system_run: need dt > 0 and t_end >= 0");
    auto const& g = f0.grid;
    QlTrajectory tr;
    WaveSpectrum s = spectrum0;
    if (opt.mode == DispersionMode::frozen)
        for (std::size_t i = 0; i < s.size(); ++i) {
            double const w = bohm_gross(std::abs(s.k[i]), opt.v_th, opt.omega_p);
            s.omega[i] = s.k[i] > 0 ? w : -w;
        }
    double lo = opt.window_lo, hi = opt.window_hi;
    if (lo == hi) {
        lo = INFINITY;
        hi = -INFINITY;
        for (std::size_t i = 0; i < s.size(); ++i) {
            double const v = s.omega[i] / s.k[i];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    tr.window_lo = lo;
    tr.window_hi = hi;

    auto const nodes = g.nodes();
    std::vector<double> vmoment(g.nv);
    for (std::size_t j = 0; j < g.nv; ++j) vmoment[j] = g.v(j);
    auto diag = [&](double t, VelocityFn const& f) {
        QlDiagRow r;
        r.t = t;
        r.max_slope = max_positive_slope(f, lo, hi);
        r.mass = velocity_moment(f, 0);
        r.momentum = velocity_moment(f, 1);
        for (std::size_t i = 0; i < s.size(); ++i) {
            r.wave_energy += s.energy[i];
            r.wave_momentum += s.k[i] / (s.omega[i] * opt.omega_p * opt.omega_p) * s.energy[i];
        }
        tr.diag.push_back(r);
    };

    VelocityFn f = f0;
    auto const n = static_cast<std::size_t>(std::ceil(opt.t_end / opt.dt - 1e-9));
    double const h = n > 0 ? opt.t_end / static_cast<double>(n) : 0.0;
    std::vector<double> gamma(s.size(), 0.0);
    std::vector<double> root_gamma(s.size(), NAN);
    tr.snapshots.push_back(f);
    tr.snapshot_times.push_back(0.0);
    for (std::size_t step = 0; step < n; ++step) {
        double const t = static_cast<double>(step) * h;
        // (a) growth rates
        if (opt.mode == DispersionMode::live) {
            auto const prof = VelocityProfile::gridded(f);
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s.k[i] < 0) continue;
                RootOptions ro;
                ro.omega_p = opt.omega_p;
                // start from the last kinetic root; the first guess is the resonant estimate,
                // clamped off the real axis (gridded profiles cannot be evaluated there)
                double g0 = root_gamma[i];
                if (!std::isfinite(g0))
                    g0 = std::clamp(ql_growth_rate(f, s.k[i], s.omega[i], opt.omega_p), 1e-3 * opt.omega_p, 0.2 * opt.omega_p);
                else if (std::abs(g0) < 1e-3 * opt.omega_p)
                    g0 = 1e-3 * opt.omega_p;
                try {
                    auto const r = solve_root(prof, s.k[i], {s.omega[i], g0}, ro);
                    if (!r.unphysical && std::isfinite(r.omega) && r.omega > 0) {
                        s.omega[i] = r.omega;
                        root_gamma[i] = r.gamma;
                    } else {
                        ++tr.live_fallbacks;
                    }
                } catch (std::exception const&) {
                    ++tr.live_fallbacks;
                }
            }
            for (std::size_t i = 0; i < s.size(); ++i)
                if (s.k[i] < 0)
                    for (std::size_t j = 0; j < s.size(); ++j)
                        if (s.k[j] == -s.k[i]) s.omega[i] = -s.omega[j];
        }
        for (std::size_t i = 0; i < s.size(); ++i) gamma[i] = ql_growth_rate(f, s.k[i], s.omega[i], opt.omega_p);
        diag(t, f);
        for (std::size_t i = 0; i < s.size(); ++i)
            tr.spectrum.push_back({t, s.k[i], s.energy[i], gamma[i], s.omega[i]});
        // (b) exact exponential energy update
        for (std::size_t i = 0; i < s.size(); ++i) {
            s.energy[i] *= std::exp(2.0 * gamma[i] * h);
            if (!std::isfinite(s.energy[i]) || s.energy[i] > opt.energy_cap)
                throw NumericalError("ql_system_run: wave energy diverged at step " + std::to_string(step + 1) +
                                     " (k = " + format_double(s.k[i]) + ")");
        }
        // (c) D from the updated spectrum, (d) diffusion
        auto const D = dql_limit(s.modes(), opt.reg, 0.0, nodes);
        f = diffuse_step(f, D.values, h, opt.scheme);
        f.time = t + h;
        ++tr.steps;
        if (opt.snapshot_every > 0 && (step + 1) % static_cast<std::size_t>(opt.snapshot_every) == 0 && step + 1 < n) {
            tr.snapshots.push_back(f);
            tr.snapshot_times.push_back(t + h);
        }
    }
    double const t_final = static_cast<double>(n) * h;
    for (std::size_t i = 0; i < s.size(); ++i) gamma[i] = ql_growth_rate(f, s.k[i], s.omega[i], opt.omega_p);
    diag(t_final, f);
    for (std::size_t i = 0; i < s.size(); ++i) tr.spectrum.push_back({t_final, s.k[i], s.energy[i], gamma[i], s.omega[i]});
    if (n > 0) {
        tr.snapshots.push_back(f);
        tr.snapshot_times.push_back(t_final);
    }
    tr.final_spectrum = s;
    return tr;
}

void write_spectrum_csv(std::vector<SpectrumRow> const& rows, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "t,k,energy,gamma,omega\n";
    for (auto const& r : rows)
        os << format_double(r.t) << ',' << format_double(r.k) << ',' << format_double(r.energy) << ','
           << format_double(r.gamma) << ',' << format_double(r.omega) << '\n';
}

void write_ql_diag_csv(std::vector<QlDiagRow> const& rows, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "t,max_slope,mass,momentum,wave_momentum,wave_energy\n";
    for (auto const& r : rows)
        os << format_double(r.t) << ',' << format_double(r.max_slope) << ',' << format_double(r.mass) << ','
           << format_double(r.momentum) << ',' << format_double(r.wave_momentum) << ','
           << format_double(r.wave_energy) << '\n';
}

}  // namespace vlq
