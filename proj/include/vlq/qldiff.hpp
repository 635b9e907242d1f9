#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vlq/diffmat.hpp"
#include "vlq/phasespace.hpp"

namespace vlq {

enum class Scheme { crank_nicolson, implicit_euler };

std::string to_string(Scheme s);
Scheme scheme_from_string(std::string const& s);

/// One step of f_t = (D f_v)_v: finite volumes on the trapezoid cells of the v-grid,
/// face D = arithmetic mean of node values, zero flux at both ends.
VelocityFn diffuse_step(VelocityFn const& f, std::span<double const> D, double dt,
                        Scheme scheme = Scheme::crank_nicolson);

/// D(t, f) on the nodes of f.grid.
using DiffusionSource = std::function<std::vector<double>(double t, VelocityFn const& f)>;

struct DiffusionRun {
    VelocityFn f;
    DiffusionSource D;
    double dt = 0.0;
    double t_end = 0.0;
    Scheme scheme = Scheme::crank_nicolson;
};

struct DiffusionTrajectory {
    std::vector<double> times;
    std::vector<VelocityFn> snapshots;
    std::size_t steps = 0;
};

/// Integrates to t_end, hitting every requested time exactly (times outside [0, t_end] rejected).
DiffusionTrajectory run_diffusion(DiffusionRun const& run, std::vector<double> const& times);

/// Static table as a source.
DiffusionSource static_diffusion(std::vector<double> D);

struct WaveSpectrum {
    std::vector<double> k;
    std::vector<double> energy;  // |E(t,k)|^2
    std::vector<double> omega;

    std::size_t size() const { return k.size(); }
    std::vector<SpectralMode> modes() const;
};

/// Checks energy >= 0, finite entries and the +-k pairing (equal energy, odd omega).
void validate(WaveSpectrum const& s);

/// Paired spectrum with omega = Bohm-Gross at each listed positive k.
WaveSpectrum bohm_gross_spectrum(std::vector<double> const& k_positive, double energy, double v_th = 1.0,
                                 double omega_p = 1.0);

/// D_QL on the nodes of g; shares its code path with dql_limit.
DiffusionMatrix assemble_ql_coefficient(WaveSpectrum const& s, Regularization reg, VelocityGrid const& g);

enum class DispersionMode { frozen, live };

struct QlOptions {
    DispersionMode mode = DispersionMode::frozen;
    double dt = 0.1;
    double t_end = 10.0;
    Regularization reg{};
    Scheme scheme = Scheme::crank_nicolson;
    double omega_p = 1.0;
    double v_th = 1.0;           // Bohm-Gross thermal speed for the frozen mode
    double window_lo = 0.0;      // resonant window for the plateau diagnostic
    double window_hi = 0.0;      // (lo == hi: span of the spectrum's phase velocities)
    int snapshot_every = 0;      // f snapshots every n steps (0: initial and final only)
    double energy_cap = 1e300;
};

struct QlDiagRow {
    double t = 0.0;
    double max_slope = 0.0;      // max positive df/dv in the window
    double mass = 0.0;
    double momentum = 0.0;       // int f v dv
    double wave_momentum = 0.0;  // sum_k k/(omega omega_p^2) E_k
    double wave_energy = 0.0;    // sum_k E_k
};

struct SpectrumRow {
    double t = 0.0;
    double k = 0.0;
    double energy = 0.0;
    double gamma = 0.0;
    double omega = 0.0;
};

struct QlTrajectory {
    std::vector<VelocityFn> snapshots;
    std::vector<double> snapshot_times;
    std::vector<QlDiagRow> diag;
    std::vector<SpectrumRow> spectrum;
    WaveSpectrum final_spectrum;
    double window_lo = 0.0, window_hi = 0.0;
    std::size_t steps = 0;
    std::size_t live_fallbacks = 0;  // live root solves that failed and kept the previous omega
};

/// Max positive centered slope of f on nodes inside [lo, hi].
double max_positive_slope(VelocityFn const& f, double lo, double hi);

/// Coupled quasilinear system: growth rates, exact exponential energy update, D_QL, diffusion.
QlTrajectory ql_system_run(VelocityFn const& f0, WaveSpectrum const& spectrum0, QlOptions const& opt);

void write_spectrum_csv(std::vector<SpectrumRow> const& rows, std::string const& path);
void write_ql_diag_csv(std::vector<QlDiagRow> const& rows, std::string const& path);

}  // namespace vlq
