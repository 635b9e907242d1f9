#pragma once

#include <complex>

namespace vlq {

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz), all of C.
std::complex<double> faddeeva_w(std::complex<double> z);

/// Plasma dispersion function Z(zeta) = i sqrt(pi) w(zeta) (Landau contour).
std::complex<double> plasma_z(std::complex<double> zeta);

}  // namespace vlq
