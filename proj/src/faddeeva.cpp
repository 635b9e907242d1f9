#include "vlq/faddeeva.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace vlq {

namespace {

using cplx = std::complex<double>;
constexpr double sqrt_pi = 1.7724538509055160273;

// Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1994) with N = 40 terms,
// accurate to a few ulps-times-1e2 for |z| < 6 in the closed upper half plane.
constexpr int kTerms = 40;

struct Weideman {
    std::array<double, kTerms> a{};  // a_1 .. a_N
    double L = 0.0;

    Weideman()
    {
        int const M = 2 * kTerms, M2 = 2 * M;
        L = std::sqrt(kTerms / std::sqrt(2.0));
        std::array<double, 4 * kTerms> f{};
        // f[0] = 0, f[1 + (k + M - 1)] = g(k) for k = -M+1 .. M-1
        for (int k = -M + 1; k <= M - 1; ++k) {
            double const theta = k * std::numbers::pi / M;
            double const t = L * std::tan(theta / 2.0);
            f[static_cast<std::size_t>(k + M)] = std::exp(-t * t) * (L * L + t * t);
        }
        std::array<double, 4 * kTerms> shifted{};
        for (int i = 0; i < M2; ++i) shifted[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>((i + M) % M2)];
        for (int n = 1; n <= kTerms; ++n) {
            double re = 0.0;
            for (int j = 0; j < M2; ++j) re += shifted[static_cast<std::size_t>(j)] * std::cos(2.0 * std::numbers::pi * j * n / M2);
            a[static_cast<std::size_t>(n - 1)] = re / M2;
        }
    }

    cplx operator()(cplx z) const
    {
        cplx const iz(-z.imag(), z.real());
        cplx const Z = (L + iz) / (L - iz);
        cplx p = 0.0;
        for (int n = kTerms; n >= 1; --n) p = p * Z + a[static_cast<std::size_t>(n - 1)];
        return 2.0 * p / ((L - iz) * (L - iz)) + (1.0 / sqrt_pi) / (L - iz);
    }
};

Weideman const& weideman()
{
    static Weideman const w;
    return w;
}

// Large-argument expansion Z ~ i s sqrt(pi) e^{-z^2} - (1/z) sum (2n-1)!! / (2 z^2)^n,
// truncated at the smallest term.
cplx z_asymptotic(cplx zeta)
{
    cplx const inv2z2 = 1.0 / (2.0 * zeta * zeta);
    cplx term = 1.0, sum = 1.0;
    double prev = 1.0;
    for (int n = 1; n < 200; ++n) {
        term *= static_cast<double>(2 * n - 1) * inv2z2;
        double const mag = std::abs(term);
        if (mag > prev) break;
        sum += term;
        prev = mag;
        if (mag < 1e-18 * std::abs(sum)) break;
    }
    double const x = zeta.real(), y = zeta.imag();
    double const edge = x != 0.0 ? 1.0 / std::abs(x) : 0.0;
    double sigma = 0.0;
    if (std::abs(y) < edge) sigma = 1.0;
    else if (y < 0.0) sigma = 2.0;
    cplx out = -sum / zeta;
    if (sigma != 0.0) out += cplx(0.0, sigma * sqrt_pi) * std::exp(-zeta * zeta);
    return out;
}

cplx w_upper(cplx z) { return weideman()(z); }

}  // namespace

std::complex<double> plasma_z(std::complex<double> zeta)
{
    if (std::abs(zeta) >= 6.0) return z_asymptotic(zeta);
    cplx w;
    if (zeta.imag() >= 0.0) w = w_upper(zeta);
    else w = 2.0 * std::exp(-zeta * zeta) - w_upper(-zeta);
    return cplx(0.0, sqrt_pi) * w;
}

std::complex<double> faddeeva_w(std::complex<double> z) { return plasma_z(z) / cplx(0.0, sqrt_pi); }

}  // namespace vlq
