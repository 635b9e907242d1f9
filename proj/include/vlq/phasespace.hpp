#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vlq {

/// Truncated velocity axis v_j = -vmax + j*dv, endpoints included.
struct VelocityGrid {
    std::size_t nv = 0;
    double vmax = 0.0;

    VelocityGrid() = default;
    VelocityGrid(std::size_t nv_, double vmax_);

    double dv() const { return 2.0 * vmax / static_cast<double>(nv - 1); }
    double v(std::size_t j) const { return -vmax + static_cast<double>(j) * dv(); }
    std::vector<double> nodes() const;
    /// Trapezoid weights (dv/2 at the ends).
    std::vector<double> weights() const;
    bool operator==(VelocityGrid const&) const = default;
};

/// Periodic x in [0, 2pi) times the truncated velocity axis (d = 1).
struct PhaseGrid {
    std::size_t nx = 0;
    VelocityGrid vgrid;

    PhaseGrid() = default;
    PhaseGrid(std::size_t nx_, std::size_t nv_, double vmax_);

    std::size_t nv() const { return vgrid.nv; }
    double vmax() const { return vgrid.vmax; }
    double dx() const;
    double dv() const { return vgrid.dv(); }
    double x(std::size_t i) const { return static_cast<double>(i) * dx(); }
    double v(std::size_t j) const { return vgrid.v(j); }
    std::size_t size() const { return nx * vgrid.nv; }
    bool operator==(PhaseGrid const&) const = default;
};

/// f(x_i, v_j) stored x-fastest: values[j*nx + i].
struct DistFn {
    PhaseGrid grid;
    std::vector<double> values;
    double time = 0.0;

    DistFn() = default;
    explicit DistFn(PhaseGrid const& g, double t = 0.0);
    static DistFn from_function(PhaseGrid const& g, std::function<double(double, double)> const& fxv,
                                double t = 0.0);

    double& at(std::size_t ix, std::size_t iv) { return values[iv * grid.nx + ix]; }
    double at(std::size_t ix, std::size_t iv) const { return values[iv * grid.nx + ix]; }
    std::span<double> row(std::size_t iv) { return {values.data() + iv * grid.nx, grid.nx}; }
    std::span<double const> row(std::size_t iv) const { return {values.data() + iv * grid.nx, grid.nx}; }
};

struct VelocityFn {
    VelocityGrid grid;
    std::vector<double> values;
    double time = 0.0;

    VelocityFn() = default;
    explicit VelocityFn(VelocityGrid const& g, double t = 0.0);
    static VelocityFn from_function(VelocityGrid const& g, std::function<double(double)> const& fv,
                                    double t = 0.0);
};

VelocityFn space_average(DistFn const& f);

/// (1/2pi) * sum_i dx * trapezoid_v f v^n, one value per requested order.
std::vector<double> moments(DistFn const& f, std::vector<int> const& orders);
/// Trapezoid integral of g v^n over the velocity grid.
double velocity_moment(VelocityFn const& g, int order);

/// Discrete L^p norm with weights dx * (trapezoid v-weight); p = inf gives max |f|.
double lp_norm(DistFn const& f, double p);
double lp_norm(VelocityFn const& g, double p);

/// Orthonormal Hermite function psi_m(v / v_th) / sqrt(v_th).
double hermite_function(int m, double v, double v_th = 1.0);

/// Tabulated velocity test functions, one vector of nv values each.
struct TestSet {
    std::vector<std::vector<double>> psi;
    std::vector<std::string> labels;
};

/// psi_0 .. psi_m_max scaled to v_th (default test set: m_max = 8).
TestSet hermite_test_set(VelocityGrid const& g, int m_max = 8, double v_th = 1.0);

/// max_psi |trapezoid integral of (g - h) psi|. Throws on grid mismatch.
double weak_distance(VelocityFn const& g, VelocityFn const& h, TestSet const& tests);
/// Per-test-function integrals of (g - h) psi, in test-set order.
std::vector<double> weak_components(VelocityFn const& g, VelocityFn const& h, TestSet const& tests);

/// Phase-space weak distance: max over psi_m(v) * {cos jx, sin jx}, 1 <= j <= j_max,
/// of |(1/2pi) * integral f * test|. Vanishes exactly on x-independent f.
double phase_weak_distance(DistFn const& f, TestSet const& tests, int j_max = 4);

void write_csv(DistFn const& f, std::string const& path);
void write_csv(VelocityFn const& g, std::string const& path, std::string const& value_name = "f");

}  // namespace vlq
