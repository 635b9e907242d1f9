#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace vlq {

/// Batched real <-> half-complex transforms of `howmany` contiguous rows of length n
/// (FFTW, unnormalized forward, backward scaled by 1/n). Plans are built once under a
/// global lock; execution is thread-safe per instance only.
class PeriodicFft {
public:
    PeriodicFft(std::size_t n, std::size_t howmany = 1);
    ~PeriodicFft();
    PeriodicFft(PeriodicFft const&) = delete;
    PeriodicFft& operator=(PeriodicFft const&) = delete;

    std::size_t n() const { return n_; }
    std::size_t modes() const { return n_ / 2 + 1; }
    std::size_t howmany() const { return howmany_; }

    /// Real workspace (howmany * n) and spectrum workspace (howmany * modes()).
    std::span<double> real() { return {real_, n_ * howmany_}; }
    std::span<std::complex<double>> spectrum() { return {spec_, modes() * howmany_}; }

    void forward();   // real() -> spectrum()
    void backward();  // spectrum() -> real(), including the 1/n factor

private:
    std::size_t n_, howmany_;
    double* real_ = nullptr;
    std::complex<double>* spec_ = nullptr;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

}  // namespace vlq
