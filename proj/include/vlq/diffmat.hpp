#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vlq/stochfield.hpp"

namespace vlq {

/// Scalar (d = 1) autocorrelation R(t,t,sigma,x) tabulated on a uniform sigma-grid
/// sigma_j = (j - m) h, j = 0..2m, and a periodic x-grid of n_x points.
/// `n_half` nodes span [0, tau]; `extent` > 1 tabulates beyond the support.
struct AutocorrTensor {
    double tau = 1.0;
    double t = 0.0;
    std::size_t n_half = 0;  // h = tau / n_half
    std::size_t m = 0;       // n_half * extent
    std::size_t n_x = 0;
    std::vector<double> values;     // values[j * n_x + i]
    std::vector<double> std_error;  // empty unless empirical
    std::string form;               // spectral | bump | empirical | custom

    double h() const { return tau / static_cast<double>(n_half); }
    std::size_t n_sigma() const { return 2 * m + 1; }
    double sigma(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(m)) * h(); }
    double x(std::size_t i) const;
    double& at(std::size_t j, std::size_t i) { return values[j * n_x + i]; }
    double at(std::size_t j, std::size_t i) const { return values[j * n_x + i]; }
    /// Trigonometric interpolation of row j at arbitrary x.
    double interp(std::size_t j, double x) const;
};

/// Tabulates fn(sigma, x). n_half must be a positive multiple of 4, n_x even.
AutocorrTensor tabulate_autocorr(std::function<double(double, double)> const& fn, double tau, double t,
                                 std::size_t n_half, std::size_t n_x, std::size_t extent = 1,
                                 std::string form = "custom");

/// Tabulated analytic spectral autocorrelation sum_k E A cos(k x - omega sigma).
AutocorrTensor tabulate_spectral_autocorr(SpectralFieldSpec const& spec, double t, std::size_t n_half,
                                          std::size_t n_x, std::size_t extent = 1);

enum class DiffKind { quadrature, sinc2, quasilinear, rbt_fixed_point };

std::string to_string(DiffKind k);

/// D(t, v) as d x d blocks per velocity node (d = 1: one scalar per node).
struct DiffusionMatrix {
    int d = 1;
    double t = 0.0;
    std::vector<std::vector<double>> v;  // velocity points, each of length d
    std::vector<double> values;          // values[node * d*d + a*d + b]
    DiffKind kind = DiffKind::quadrature;
    std::string detail;

    double symmetry_defect = 0.0;
    double min_eigenvalue = 0.0;
    double sup_norm = 0.0;

    // quadrature error estimate (quadrature kind)
    double quadrature_error = 0.0;

    // resonance-broadening fixed point
    std::vector<double> residual;
    int iterations = 0;
    bool converged = true;
    double final_residual = 0.0;
    std::size_t psd_projections = 0;
    double start_sensitivity = 0.0;

    std::size_t size() const { return v.size(); }
    double at(std::size_t node, int a = 0, int b = 0) const
    {
        return values[node * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(a * d + b)];
    }
    /// Scalar values (d = 1 only).
    std::vector<double> scalar() const;
    /// Recomputes symmetry defect, min symmetric-part eigenvalue and sup norm.
    void update_metadata();

    static DiffusionMatrix scalar_on(std::vector<double> const& v_nodes, double t, DiffKind kind);
};

/// sin(u)/u with a Taylor branch near 0.
double sinc(double u);

/// Finite-tau kernel sin(tau D/2)/(tau D/2) * sin((tau/2 + eta) D)/D; tau/2 sinc^2(tau D/2) at eta = 0.
double sinc2_kernel(double delta, double tau, double eta = 0.0);

/// Resonance-broadening integral Re int_0^inf exp(i xi s) exp(-a s^3/3) ds, a > 0.
/// At a = 0 the xi != 0 value is the a -> 0+ limit (0); xi = 0, a = 0 throws.
double resonance_rbt(double xi, double a, double tol = 1e-13);

/// Composite Simpson over sigma in [0, tau] of R(sigma, sigma v mod 2pi) at each node.
/// Throws NumericalError when the Richardson error estimate exceeds tol * max(1, |D|).
DiffusionMatrix dtau_quadrature(AutocorrTensor const& R, std::vector<double> const& v_nodes, double tol = 1e-9);

/// d = 1 closed form: sum over modes of sinc2_kernel(omega - k v) * E0^2, E0^2 = energy(t).
DiffusionMatrix dtau_sinc2(std::vector<SpectralMode> const& modes, double tau, double eta, double t,
                           std::vector<double> const& v_nodes);

/// General-d mode: wavevector k, amplitude vector E0, frequency omega.
struct VectorMode {
    std::vector<double> k;
    std::vector<double> e0;
    double omega = 0.0;
};

/// General-d closed form sum_k K(omega - k.v) E0 (x) E0, or with projection
/// |E0|^2 k (x) k / |k|^2.
DiffusionMatrix dtau_sinc2(std::vector<VectorMode> const& modes, double tau, double eta,
                           std::vector<std::vector<double>> const& v_points, bool projection);

struct Regularization {
    enum class Kind { lorentzian, sinc2 } kind = Kind::lorentzian;
    /// Lorentzian half-width gamma (<= 0 selects max(|k| dv, 1e-3) per mode), or sinc2 tau_reg.
    double width = 0.0;
};

/// Regularized delta: Lorentzian (1/pi) g/(xi^2+g^2) or sinc^2 R_tau(xi)/pi.
double regularized_delta(Regularization::Kind kind, double width, double xi);

/// Mass of the regularized delta: quadrature over |xi| <= window plus the analytic tail.
double regularized_delta_mass(Regularization::Kind kind, double width, double window);

/// Quasilinear D(v) = pi sum_k E(t,k) delta_reg(omega - k v).
DiffusionMatrix dql_limit(std::vector<SpectralMode> const& modes, Regularization reg, double t,
                          std::vector<double> const& v_nodes);

struct RbtOptions {
    double tol = 1e-8;
    int max_iter = 60;
    double damping = 0.5;
    double quad_tol = 1e-13;
    bool second_start = true;
};

/// Resonance-broadening fixed point D(v) = sum_k E I(omega - k v, k^2 D(v)) by damped Picard
/// iteration from the Lorentzian QL matrix with width mean|k| dv. Non-convergence is reported
/// through `converged`/`final_residual` (best iterate returned), not thrown.
DiffusionMatrix drbt_fixed_point(std::vector<SpectralMode> const& modes, double t, std::vector<double> const& v_nodes,
                                 RbtOptions const& opt = {});

/// One application of the resonance-broadening map at every node.
std::vector<double> drbt_map(std::vector<SpectralMode> const& modes, double t, std::vector<double> const& v_nodes,
                             std::vector<double> const& D, double quad_tol = 1e-13);

struct PropCheckItem {
    std::string name;
    bool pass = true;
    double worst = 0.0;
    std::string where;
};

struct PropCheckReport {
    std::vector<PropCheckItem> items;  // symmetry, support, finiteness, psd
    bool all_pass() const;
};

PropCheckReport check_prop_dprop(DiffusionMatrix const& D, AutocorrTensor const& R);

void write_csv(DiffusionMatrix const& D, std::string const& path);

}  // namespace vlq
