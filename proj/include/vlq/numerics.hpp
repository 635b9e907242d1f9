#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vlq::num {

/// Composite Simpson weights for n uniformly spaced nodes (n odd, n >= 3).
std::vector<double> simpson_weights(std::size_t n, double h);

/// Composite trapezoid weights for n uniformly spaced nodes.
std::vector<double> trapezoid_weights(std::size_t n, double h);

double dot(std::span<double const> a, std::span<double const> b);

/// Pairwise (cascade) summation; order-independent of thread scheduling.
double pairwise_sum(std::span<double const> values);

/// Solves a tridiagonal system in place (Thomas algorithm).
/// lower[0] and upper[n-1] are ignored. Returns false on a zero pivot.
bool solve_tridiagonal(std::span<double const> lower, std::span<double const> diag,
                       std::span<double const> upper, std::span<double> rhs);

/// Natural cubic spline on a uniform grid x_j = x0 + j*h.
class UniformSpline {
public:
    UniformSpline() = default;
    UniformSpline(double x0, double h, std::span<double const> values);

    /// Rebuilds in place; reuses storage.
    void fit(double x0, double h, std::span<double const> values);

    /// Value at x; outside [x0, x_last] returns `outside`.
    double operator()(double x, double outside = 0.0) const;
    double derivative(double x) const;
    /// out[j] = s(x_j - shift * h) for every node j (uniform shift in cells);
    /// feet outside the nodes read `outside`.
    void shifted(double shift, std::span<double> out, double outside = 0.0) const;

    double x0() const { return x0_; }
    double h() const { return h_; }
    std::size_t size() const { return y_.size(); }

private:
    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives
    std::vector<double> scratch_;
};

/// Least-squares slope and intercept of y against x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LinearFit fit_line(std::span<double const> x, std::span<double const> y);

}  // namespace vlq::num
