#include "vlq/fft.hpp"

#include <mutex>

#include <fftw3.h>

#include "vlq/error.hpp"

namespace vlq {

namespace {
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}
}  // namespace

PeriodicFft::PeriodicFft(std::size_t n, std::size_t howmany) : n_(n), howmany_(howmany)
{
    if (n < 2 || howmany < 1) throw InvalidArgument("PeriodicFft: bad size");
    std::lock_guard lock(planner_mutex());
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n * howmany));
    spec_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * modes() * howmany));
    if (!real_ || !spec_) throw NumericalError("PeriodicFft: allocation failed");
    int const len = static_cast<int>(n);
    int const rdist = static_cast<int>(n), cdist = static_cast<int>(modes());
    auto* c = reinterpret_cast<fftw_complex*>(spec_);
    fwd_ = fftw_plan_many_dft_r2c(1, &len, static_cast<int>(howmany), real_, nullptr, 1, rdist, c, nullptr, 1, cdist,
                                  FFTW_ESTIMATE);
    bwd_ = fftw_plan_many_dft_c2r(1, &len, static_cast<int>(howmany), c, nullptr, 1, cdist, real_, nullptr, 1, rdist,
                                  FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw NumericalError("PeriodicFft: plan creation failed");
}

PeriodicFft::~PeriodicFft()
{
    std::lock_guard lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(real_);
    fftw_free(spec_);
}

void PeriodicFft::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }

void PeriodicFft::backward()
{
    fftw_execute(static_cast<fftw_plan>(bwd_));
    double const s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_ * howmany_; ++i) real_[i] *= s;
}

}  // namespace vlq
