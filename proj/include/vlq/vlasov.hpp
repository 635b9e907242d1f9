#pragma once

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vlq/numerics.hpp"
#include "vlq/phasespace.hpp"
#include "vlq/stochfield.hpp"

namespace vlq {

class PeriodicFft;

/// Field values on the x-grid at one slow time.
struct FieldOnGrid {
    std::vector<double> values;
    double time = 0.0;
};

/// Exact free flow g(x - v t / eps^2, v) by a spectral shift of every v-row.
/// The Nyquist mode of a real row cannot be shifted and is multiplied by cos(.).
DistFn free_flow(DistFn const& f, double t, double epsilon);

/// Spectral solve of -Phi'' = rho - 1, E = -Phi'. The mean of rho is removed; a mean
/// farther than neutrality_tol from 1 is an error.
FieldOnGrid poisson_solve(std::span<double const> rho, double neutrality_tol = 1e-10);

/// rho(x_i) = trapezoid integral of f(x_i, .) dv.
std::vector<double> charge_density(DistFn const& f);

enum class Splitting { strang, lie };

struct VlasovConfig {
    double epsilon = 1.0;
    PhaseGrid grid;
    double dt = 0.0;  // <= 0 selects the default (0.1 * CFL bound)
    double t_end = 0.0;
    FieldPtr field;   // prescribed field; ignored when self_consistent
    bool self_consistent = false;
    Splitting splitting = Splitting::strang;
    bool cfl_report = false;
    double c_cfl = 0.5;
    double field_bound = 0.0;  // sup |E| used in the CFL bound; <= 0 estimates it
    double tol_energy = 1e-4;
    double neutrality_tol = 1e-6;
};

/// c * eps^2 * min(dx/vmax, dv * eps / e_inf).
double cfl_dt(VlasovConfig const& cfg, double e_inf, double c);

/// Estimates sup |E| of the configured prescribed field by sampling (0 for none).
double estimate_field_bound(VlasovConfig const& cfg, std::size_t samples = 64);

struct DiagRow {
    double t = 0.0;
    double mass = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double e_kin = 0.0;
    double e_el = 0.0;
    double e_total = 0.0;
    double field_l2 = 0.0;
    double boundary_loss = 0.0;  // cumulative, in mass units
};

struct RunSchedule {
    std::vector<double> snapshot_times;  // DistFn + field snapshots
    int diag_every = 0;                  // diagnostics every n steps (0: only at snapshots)
};

struct Trajectory {
    std::vector<DistFn> snapshots;
    std::vector<FieldOnGrid> fields;
    std::vector<VelocityFn> averages;
    std::vector<DiagRow> diag;
    double dt = 0.0;
    std::size_t steps = 0;
    bool energy_violation = false;
    double max_energy_excess = 0.0;  // max (E(t) - E(0)) / E(0)
    bool aborted = false;
    std::string abort_reason;
    double min_value = 0.0;  // most negative value seen at diagnostics (interpolation undershoot)
    bool cfl_ok = true;
};

/// Semi-Lagrangian solver state for one configuration.
class VlasovSolver {
public:
    explicit VlasovSolver(VlasovConfig cfg);
    ~VlasovSolver();

    VlasovConfig const& config() const { return cfg_; }
    double dt() const { return dt_; }

    /// One split step of length dt from f.time; returns the boundary loss of the step.
    double step(DistFn& f, double dt);

    /// Free flow over time t in place.
    void free_flow(DistFn& f, double t);

    /// v-advection by -dt * E / eps per column; returns the boundary loss.
    double advect_v(DistFn& f, std::span<double const> E, double dt);

    /// Field acting at slow time t on the current state.
    void field_at(DistFn const& f, double t, std::span<double> E) const;

    DiagRow diagnostics(DistFn const& f, double boundary_loss) const;

    Trajectory run(DistFn f0, RunSchedule const& schedule);

private:
    VlasovConfig cfg_;
    double dt_ = 0.0;
    std::unique_ptr<PeriodicFft> rows_;
    std::unique_ptr<PeriodicFft> single_;
    num::UniformSpline spline_;
    std::vector<double> column_;
    std::vector<double> w_;  // v quadrature weights
    std::vector<std::complex<double>> phase_cache_;
    double phase_cache_t_ = -1.0;
    std::vector<std::complex<double>> phase_alt_;  // Strang alternates two lengths
    double phase_alt_t_ = -1.0;
};

void write_diag_csv(std::vector<DiagRow> const& diag, std::string const& path);
void write_field_csv(FieldOnGrid const& E, PhaseGrid const& g, std::string const& path);

}  // namespace vlq
