#pragma once

#include <complex>
#include <string>
#include <vector>

#include "vlq/numerics.hpp"
#include "vlq/phasespace.hpp"

namespace vlq {

struct MaxwellianComponent {
    double density = 1.0;
    double drift = 0.0;
    double v_th = 1.0;
};

/// Normalized 1D velocity profile, either analytic (Maxwellian mixture with a tag) or gridded.
class VelocityProfile {
public:
    static VelocityProfile maxwellian(VelocityGrid const& g, double v_th = 1.0, double drift = 0.0);
    /// (1 - n_b) M(0, v_th) + n_b M(v_b, v_tb).
    static VelocityProfile bump_on_tail(VelocityGrid const& g, double n_b, double v_b, double v_tb, double v_th = 1.0);
    /// Arbitrary mixture; densities must sum to 1.
    static VelocityProfile mixture(VelocityGrid const& g, std::vector<MaxwellianComponent> comps,
                                   std::string tag = "mixture");
    /// Gridded data; derivatives from a natural cubic spline.
    static VelocityProfile gridded(VelocityFn const& f);

    bool analytic() const { return !components_.empty(); }
    std::string const& tag() const { return tag_; }
    std::vector<MaxwellianComponent> const& components() const { return components_; }
    VelocityFn const& f() const { return f_; }

    double value(double v) const;
    double derivative(double v) const;

    /// sqrt(int f v^2 / int f) on the grid.
    double v_th() const { return v_th_; }
    /// Thermal velocity of the bulk (first, densest) component for analytic tags; v_th() otherwise.
    double bulk_v_th() const;
    double mass() const;

private:
    VelocityFn f_;
    std::vector<MaxwellianComponent> components_;
    std::string tag_;
    double v_th_ = 0.0;
    num::UniformSpline spline_;
};

double bohm_gross(double k, double v_th, double omega_p = 1.0);

/// D(k, z) = 1 + (omega_p^2/k^2) int k f'(v) / (z - k v) dv. Analytic tags use the Landau
/// continuation through Z; gridded profiles need Im z > 0 or |Im z| >= 1e-4 omega_p.
std::complex<double> dispersion_value(VelocityProfile const& p, double k, std::complex<double> z,
                                      double omega_p = 1.0);

struct DispersionRoot {
    double k = 0.0;
    double omega = 0.0;
    double gamma = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool unphysical = false;  // |gamma| > omega_p
};

struct RootOptions {
    double tol = 1e-10;
    int max_iter = 50;
    double omega_p = 1.0;
};

/// Complex Newton with a central-difference Jacobian and secant fallback.
/// Throws NumericalError after max_iter iterations.
DispersionRoot solve_root(VelocityProfile const& p, double k, std::complex<double> initial, RootOptions const& opt = {});
/// Default start: sign(k) * Bohm-Gross(bulk v_th) + i * QL growth rate there.
DispersionRoot solve_root(VelocityProfile const& p, double k, RootOptions const& opt = {});

/// gamma = (pi/2)(omega_p^2/k^2) omega sign(k) f'(omega/k). Throws if omega/k is off-grid.
double ql_growth_rate(VelocityProfile const& p, double k, double omega, double omega_p = 1.0);
/// Same from tabulated slopes (centered differences of a gridded f).
double ql_growth_rate(VelocityFn const& f, double k, double omega, double omega_p = 1.0);

struct PenroseMinimum {
    double v = 0.0;
    double value = 0.0;  // P(v*)
};

struct PenroseResult {
    bool unstable = false;
    std::vector<PenroseMinimum> minima;
    std::string note;
};

PenroseResult penrose_check(VelocityProfile const& p);

}  // namespace vlq
