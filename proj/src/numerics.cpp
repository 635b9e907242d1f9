#include "vlq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "vlq/error.hpp"

namespace vlq::num {

std::vector<double> simpson_weights(std::size_t n, double h)
{
    if (n < 3 || n % 2 == 0)
        throw InvalidArgument("simpson_weights: need an odd node count >= 3");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (auto& x : w) x *= h / 3.0;
    return w;
}

std::vector<double> trapezoid_weights(std::size_t n, double h)
{
    std::vector<double> w(n, h);
    if (n > 0) {
        w.front() *= 0.5;
        w.back() *= 0.5;
    }
    return w;
}

double dot(std::span<double const> a, std::span<double const> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double pairwise_sum(std::span<double const> v)
{
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t const half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

bool solve_tridiagonal(std::span<double const> lower, std::span<double const> diag,
                       std::span<double const> upper, std::span<double> rhs)
{
    std::size_t const n = diag.size();
    if (n == 0) return true;
    std::vector<double> c(n);
    double beta = diag[0];
    if (beta == 0.0) return false;
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        if (beta == 0.0 || !std::isfinite(beta)) return false;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
    return true;
}

UniformSpline::UniformSpline(double x0, double h, std::span<double const> values) { fit(x0, h, values); }

void UniformSpline::fit(double x0, double h, std::span<double const> values)
{
    if (values.size() < 2) throw InvalidArgument("UniformSpline: need at least 2 nodes");
    x0_ = x0;
    h_ = h;
    y_.assign(values.begin(), values.end());
    std::size_t const n = y_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Interior system: m[i-1] + 4 m[i] + m[i+1] = 6 (y[i-1] - 2y[i] + y[i+1]) / h^2,
    // natural ends m[0] = m[n-1] = 0. Constant-coefficient Thomas sweep.
    std::size_t const k = n - 2;
    scratch_.resize(k);
    double const s = 6.0 / (h * h);
    double beta = 4.0;
    m_[1] = s * (y_[0] - 2.0 * y_[1] + y_[2]) / beta;
    for (std::size_t i = 1; i < k; ++i) {
        scratch_[i] = 1.0 / beta;
        beta = 4.0 - scratch_[i];
        double const r = s * (y_[i] - 2.0 * y_[i + 1] + y_[i + 2]);
        m_[i + 1] = (r - m_[i]) / beta;
    }
    for (std::size_t i = k - 1; i-- > 0;) m_[i + 1] -= scratch_[i + 1] * m_[i + 2];
}

double UniformSpline::operator()(double x, double outside) const
{
    double const u = (x - x0_) / h_;
    auto const last = static_cast<double>(y_.size() - 1);
    if (!(u >= 0.0 && u <= last)) return outside;
    auto j = static_cast<std::size_t>(u);
    if (j >= y_.size() - 1) j = y_.size() - 2;
    double const b = u - static_cast<double>(j);
    double const a = 1.0 - b;
    double const h2 = h_ * h_ / 6.0;
    return a * y_[j] + b * y_[j + 1] + ((a * a * a - a) * m_[j] + (b * b * b - b) * m_[j + 1]) * h2;
}

double UniformSpline::derivative(double x) const
{
    double u = (x - x0_) / h_;
    auto const last = static_cast<double>(y_.size() - 1);
    u = std::clamp(u, 0.0, last);
    auto j = static_cast<std::size_t>(u);
    if (j >= y_.size() - 1) j = y_.size() - 2;
    double const b = u - static_cast<double>(j);
    double const a = 1.0 - b;
    return (y_[j + 1] - y_[j]) / h_ +
           h_ / 6.0 * (-(3.0 * a * a - 1.0) * m_[j] + (3.0 * b * b - 1.0) * m_[j + 1]);
}

void UniformSpline::shifted(double shift, std::span<double> out, double outside) const
{
    auto const n = static_cast<std::int64_t>(y_.size());
    if (!(std::abs(shift) < static_cast<double>(n))) {
        std::fill(out.begin(), out.end(), shift == shift ? outside : shift);
        return;
    }
    double const fl = std::floor(-shift);
    auto const k0 = static_cast<std::int64_t>(fl);
    double const b = -shift - fl;
    double const a = 1.0 - b;
    double const h2 = h_ * h_ / 6.0;
    double const ca = (a * a * a - a) * h2, cb = (b * b * b - b) * h2;
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(out.size()); ++j) {
        std::int64_t const jj = j + k0;
        if (jj < 0 || jj >= n || (jj == n - 1 && b > 0.0)) {
            out[static_cast<std::size_t>(j)] = outside;
            continue;
        }
        if (jj == n - 1) {
            out[static_cast<std::size_t>(j)] = y_[static_cast<std::size_t>(jj)];
            continue;
        }
        auto const u = static_cast<std::size_t>(jj);
        out[static_cast<std::size_t>(j)] = a * y_[u] + b * y_[u + 1] + ca * m_[u] + cb * m_[u + 1];
    }
}

LinearFit fit_line(std::span<double const> x, std::span<double const> y)
{
    std::size_t const n = x.size();
    if (n < 2 || y.size() != n) throw InvalidArgument("fit_line: need >= 2 matched points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("fit_line: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace vlq::num
