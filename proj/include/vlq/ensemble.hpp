#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "vlq/qldiff.hpp"
#include "vlq/stochfield.hpp"
#include "vlq/vlasov.hpp"

namespace vlq {

using FieldSpec = std::variant<SpectralFieldSpec, BumpFieldSpec>;

struct EnsembleConfig {
    FieldSpec field;
    VlasovConfig vlasov;  // grid, t_end, splitting; dt <= 0 picks cfl_fraction * CFL per epsilon
    DistFn f0;            // shared initial data; empty values select (1/sqrt(2pi)) exp(-v^2/2)
    double initial_perturbation = 0.0;  // > 0: f0 * (1 + a cos(x + phi_r)), phi_r per realization
    std::size_t n_realizations = 1;
    std::vector<double> epsilons{0.4, 0.28, 0.2};
    std::uint64_t master_seed = 0;
    std::vector<double> compare_times;
    int workers = 1;
    double reference_dt = 1e-3;
    Scheme reference_scheme = Scheme::crank_nicolson;
    int hermite_m_max = 8;
    double cfl_fraction = 0.5;
};

void validate(EnsembleConfig const& cfg);

/// Realization seed: derive(master, epsilon index, realization index).
std::uint64_t realization_seed(std::uint64_t master, std::size_t eps_index, std::size_t realization);

/// Field realization for a spec and seed; bump windows cover fast times [0, tau_end].
FieldPtr sample_field(FieldSpec const& spec, std::uint64_t seed, double tau_end);

/// Sup-norm bound of a spectral field up to slow time t_end (sum of pair amplitudes).
double spectral_field_bound(SpectralFieldSpec const& spec, double t_end);

struct ReferenceDiffusion {
    DiffusionTrajectory trajectory;
    std::vector<double> D0;      // D at t = 0 on the velocity nodes
    double cross_check = 0.0;    // spectral: max |closed form - quadrature| at t = 0
    std::string method;          // sinc2 | quadrature
};

/// Limit diffusion coefficient D(t, v) = int_0^tau R(t; sigma, v sigma) dsigma.
std::vector<double> limit_diffusion(FieldSpec const& spec, double t, std::vector<double> const& v_nodes);

/// Diffusion equation from g0 under the limit coefficient, sampled at `times`.
ReferenceDiffusion reference_diffusion(FieldSpec const& spec, VelocityFn const& g0, std::vector<double> const& times,
                                       double dt, Scheme scheme = Scheme::crank_nicolson);

struct EnsemblePoint {
    double epsilon = 0.0;
    double t = 0.0;
    VelocityFn mean;
    std::vector<double> std_error;  // per node
    VelocityFn reference;
    double weak = 0.0;
    double weak_se = 0.0;  // standard error of the maximizing test-function component
    double l1 = 0.0;
    double l2 = 0.0;
    bool noise_limited = false;
    double mass = 0.0;           // mass of the ensemble mean
    double boundary_loss = 0.0;  // mean cumulative boundary loss
};

struct EnsembleReport {
    std::vector<double> epsilons;
    std::vector<double> times;
    std::vector<EnsemblePoint> points;  // epsilon-major
    std::vector<std::size_t> used;      // realizations kept per epsilon
    std::vector<std::size_t> dropped;
    std::vector<double> dt;             // solver step per epsilon
    bool drop_flag = false;             // more than 5% dropped at some epsilon
    double reference_cross_check = 0.0;
    std::string reference_method;
    std::vector<std::string> log;

    EnsemblePoint const& at(std::size_t eps_index, std::size_t t_index) const
    {
        return points[eps_index * times.size() + t_index];
    }
};

EnsembleReport run_ensemble(EnsembleConfig const& cfg);

struct SweepRow {
    double t = 0.0;
    double slope = 0.0;
    bool indeterminate = false;
    std::vector<bool> noise_flags;  // per epsilon
};

struct SweepInput {
    double epsilon, t, distance, std_error;
};

/// Least-squares slope of log distance against log epsilon per time over nodes that are
/// not noise-limited (distance < 2 SE); fewer than two such nodes: indeterminate.
std::vector<SweepRow> epsilon_sweep_report(std::vector<SweepInput> const& rows);
std::vector<SweepRow> epsilon_sweep_report(EnsembleReport const& report);

struct HomogenizationConfig {
    VlasovConfig vlasov;  // self-consistent is forced; dt <= 0 picks cfl_fraction * CFL
    DistFn f0;
    std::vector<double> epsilons{0.5, 0.35, 0.25};
    std::size_t samples = 40;  // diagnostic points over [0, t_end]
    int workers = 1;
    double cfl_fraction = 0.5;
};

struct HomogenizationRow {
    double epsilon = 0.0;
    double phase_weak0 = 0.0;     // x-inhomogeneity of f at t = 0
    double phase_weak = 0.0;      // (a) at t_end
    double field_l2_avg = 0.0;    // (b) time average of ||E|| over [t_end/2, t_end]
    double average_drift = 0.0;   // (c) max_t weak distance of the x-average to its t = 0 value
    double energy_excess = 0.0;
    std::size_t steps = 0;
    double dt = 0.0;
    bool aborted = false;
};

std::vector<HomogenizationRow> homogenization_experiment(HomogenizationConfig const& cfg);

void write_report_csv(EnsembleReport const& r, std::string const& path);
void write_sweep_csv(std::vector<SweepRow> const& rows, std::string const& path);
void write_homogenization_csv(std::vector<HomogenizationRow> const& rows, std::string const& path);

}  // namespace vlq
