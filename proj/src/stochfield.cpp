#include "vlq/stochfield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vlq/config.hpp"
#include "vlq/error.hpp"
#include "vlq/parallel.hpp"
#include "vlq/rng.hpp"

namespace vlq {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool is_integer(double k) { return std::isfinite(k) && std::floor(k) == k; }

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

double wrap_pm_pi(double d)
{
    d = std::fmod(d + std::numbers::pi, two_pi);
    if (d < 0) d += two_pi;
    return d - std::numbers::pi;
}

}  // namespace

std::string to_string(AutocorrKind k)
{
    switch (k) {
    case AutocorrKind::triangular: return "triangular";
    case AutocorrKind::indicator: return "indicator";
    case AutocorrKind::gaussian_rbt: return "gaussian_rbt";
    }
    return "?";
}

AutocorrKind autocorr_kind_from_string(std::string const& s)
{
    if (s == "triangular") return AutocorrKind::triangular;
    if (s == "indicator") return AutocorrKind::indicator;
    if (s == "gaussian_rbt") return AutocorrKind::gaussian_rbt;
    throw InvalidArgument("unknown autocorrelation kind '" + s + "'");
}

double envelope_autocorr(AutocorrKind kind, double sigma, double tau, double k, double d_rb)
{
    double const a = std::abs(sigma);
    switch (kind) {
    case AutocorrKind::triangular: return a < tau ? 1.0 - a / tau : 0.0;
    case AutocorrKind::indicator: return a < tau ? 1.0 : 0.0;
    case AutocorrKind::gaussian_rbt: return std::exp(-k * k * d_rb * a * a * a / 3.0);
    }
    return 0.0;
}

double SpectralMode::energy_at(double t) const { return growth == 0.0 ? energy : energy * std::exp(growth * t); }

std::vector<SpectralMode> SpectralFieldSpec::positive_modes() const
{
    std::vector<SpectralMode> out;
    for (auto const& m : modes)
        if (m.k > 0) out.push_back(m);
    return out;
}

void validate(SpectralFieldSpec const& spec)
{
    if (!(spec.tau > 0.0) || !std::isfinite(spec.tau)) throw InvalidArgument("spectral field: tau must be positive");
    if (spec.autocorr == AutocorrKind::gaussian_rbt && !(spec.d_rb >= 0.0))
        throw InvalidArgument("spectral field: d_rb must be nonnegative");
    std::map<double, SpectralMode> seen;
    for (auto const& m : spec.modes) {
        if (!is_integer(m.k) || m.k == 0.0)
            throw InvalidArgument("spectral field: wavenumbers must be nonzero integers, got " + format_double(m.k));
        if (!(m.energy >= 0.0) || !std::isfinite(m.energy))
            throw InvalidArgument("spectral field: negative or non-finite energy at k = " + format_double(m.k));
        if (!std::isfinite(m.omega) || !std::isfinite(m.growth))
            throw InvalidArgument("spectral field: non-finite omega/growth at k = " + format_double(m.k));
        if (!seen.emplace(m.k, m).second)
            throw InvalidArgument("spectral field: duplicate mode k = " + format_double(m.k));
    }
    for (auto const& [k, m] : seen) {
        auto it = seen.find(-k);
        if (it == seen.end()) throw InvalidArgument("spectral field: unpaired mode k = " + format_double(k));
        auto const& p = it->second;
        if (!close(p.energy, m.energy) || !close(p.growth, m.growth))
            throw InvalidArgument("spectral field: energy(k) != energy(-k) at k = " + format_double(k));
        if (!close(p.omega, -m.omega))
            throw InvalidArgument("spectral field: omega(-k) != -omega(k) at k = " + format_double(k));
    }
}

double spectral_autocorr(SpectralFieldSpec const& spec, double t, double sigma, double xi)
{
    double s = 0.0;
    for (auto const& m : spec.modes) {
        double const a = envelope_autocorr(spec.autocorr, sigma, spec.tau, m.k, spec.d_rb);
        if (a == 0.0) continue;
        s += m.energy_at(t) * a * std::cos(m.k * xi - m.omega * sigma);
    }
    return s;
}

std::string to_string(AmpDist d)
{
    switch (d) {
    case AmpDist::rademacher: return "rademacher";
    case AmpDist::gaussian: return "gaussian";
    case AmpDist::zero: return "zero";
    }
    return "?";
}

AmpDist amp_dist_from_string(std::string const& s)
{
    if (s == "rademacher") return AmpDist::rademacher;
    if (s == "gaussian") return AmpDist::gaussian;
    if (s == "zero") return AmpDist::zero;
    throw InvalidArgument("unknown amplitude distribution '" + s + "'");
}

double BumpFieldSpec::cell_width() const { return two_pi / static_cast<double>(cells); }

void validate(BumpFieldSpec const& spec)
{
    if (!(spec.r >= 1.0)) throw InvalidArgument("bump field: r must be >= 1");
    if (!(spec.rho >= 1.0 / spec.r)) throw InvalidArgument("bump field: rho must be >= 1/r");
    if (!(spec.w_tau > 0.0) || spec.w_tau > spec.rho / 2.0)
        throw InvalidArgument("bump field: need 0 < w_tau <= rho/2");
    if (!(spec.w_x > 0.0) || !(spec.w_x < std::numbers::pi)) throw InvalidArgument("bump field: need 0 < w_x < pi");
    if (spec.cells < 1) throw InvalidArgument("bump field: cells must be positive");
    if (!std::isfinite(spec.amp)) throw InvalidArgument("bump field: amp must be finite");
}

BumpWindow bump_window_for(BumpFieldSpec const& spec, double tau_lo, double tau_hi)
{
    double const reach = spec.w_tau + 1.0 / spec.r;
    BumpWindow w;
    w.n_min = static_cast<std::int64_t>(std::floor(spec.r * (tau_lo - reach))) - 1;
    w.n_max = static_cast<std::int64_t>(std::ceil(spec.r * (tau_hi + reach))) + 1;
    return w;
}

double bump_profile(double u)
{
    double const q = 1.0 - u * u;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_profile_derivative(double u)
{
    double const q = 1.0 - u * u;
    return q > 0.0 ? std::exp(-1.0 / q) * (-2.0 * u / (q * q)) : 0.0;
}

namespace {

// integral of p(s/w + u) p(u) du over the overlap, for the profile or its derivative.
double profile_overlap(double shift, bool derivative)
{
    double const lo = std::max(-1.0, -1.0 - shift);
    double const hi = std::min(1.0, 1.0 - shift);
    if (!(hi > lo)) return 0.0;
    auto p = derivative ? bump_profile_derivative : bump_profile;
    auto integrand = [&](double u) { return p(shift + u) * p(u); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 15, 1e-13);
}

}  // namespace

double bump_autocorr(BumpFieldSpec const& spec, double t, double s, double sigma, double xi)
{
    if (spec.amp_dist == AmpDist::zero) return 0.0;
    double ft = 1.0;
    if (spec.w_t > 0.0) ft = bump_profile(t / spec.w_t) * bump_profile(s / spec.w_t);
    double const c_tau = spec.w_tau * profile_overlap(sigma / spec.w_tau, false);
    double c_x = 0.0;
    for (int m = -1; m <= 1; ++m) {
        double const shift = (wrap_pm_pi(xi) + m * two_pi) / spec.w_x;
        if (spec.gradient)
            c_x += profile_overlap(shift, true) / spec.w_x;
        else
            c_x += spec.w_x * profile_overlap(shift, false);
    }
    return spec.amp * spec.amp * spec.r / spec.cell_width() * ft * c_tau * c_x;
}

void FieldRealization::eval_grid(double t, double tau, double x0, double dx, std::span<double> out) const
{
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(t, tau, x0 + static_cast<double>(i) * dx);
}

namespace {

class ZeroField final : public FieldRealization {
public:
    double eval(double, double, double) const override { return 0.0; }
    void eval_grid(double, double, double, double, std::span<double> out) const override
    {
        std::fill(out.begin(), out.end(), 0.0);
    }
    std::string kind() const override { return "zero"; }
};

// Each pair (k, -k) contributes 2 sqrt(E) cos(k x - omega tau + phi_b), where the
// phase phi_b is redrawn on fast-time blocks of length tau_c whose boundaries sit at
// (b - U) tau_c with a per-pair uniform offset U. Two fast times share a block with
// probability max(0, 1 - |lag|/tau_c), which makes the envelope autocorrelation
// exactly triangular and independent beyond tau_c.
class SpectralField final : public FieldRealization {
public:
    SpectralField(SpectralFieldSpec const& spec, std::uint64_t seed) : tau_c_(spec.tau)
    {
        auto pos = spec.positive_modes();
        std::sort(pos.begin(), pos.end(), [](auto const& a, auto const& b) { return a.k < b.k; });
        for (auto const& m : pos) {
            Pair p;
            p.mode = m;
            p.key = rng::derive(seed, 0x5EC7u, static_cast<std::uint64_t>(m.k));
            p.offset = rng::to_unit(rng::mix(p.key, ~0ULL));
            pairs_.push_back(p);
        }
    }

    double eval(double t, double tau, double x) const override
    {
        double s = 0.0;
        for (auto const& p : pairs_) s += p.amplitude(t) * std::cos(p.mode.k * x - p.mode.omega * tau + p.phase(tau, tau_c_));
        return s;
    }

    void eval_grid(double t, double tau, double x0, double dx, std::span<double> out) const override
    {
        std::fill(out.begin(), out.end(), 0.0);
        for (auto const& p : pairs_) {
            double const a = p.amplitude(t);
            if (a == 0.0) continue;
            double const theta = p.mode.k * x0 - p.mode.omega * tau + p.phase(tau, tau_c_);
            double const dk = p.mode.k * dx;
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * std::cos(theta + dk * static_cast<double>(i));
        }
    }

    std::string kind() const override { return "spectral"; }

private:
    struct Pair {
        SpectralMode mode;
        std::uint64_t key = 0;
        double offset = 0.0;

        double amplitude(double t) const { return 2.0 * std::sqrt(mode.energy_at(t)); }
        double phase(double tau, double tau_c) const
        {
            auto const b = static_cast<std::int64_t>(std::floor(tau / tau_c + offset));
            return two_pi * rng::to_unit(rng::mix(key, static_cast<std::uint64_t>(b)));
        }
    };

    double tau_c_;
    std::vector<Pair> pairs_;
};

class BumpField final : public FieldRealization {
public:
    BumpField(BumpFieldSpec const& spec, std::uint64_t seed, BumpWindow window)
        : spec_(spec), seed_(seed), window_(window), h_(spec.cell_width())
    {
    }

    double eval(double t, double tau, double x) const override
    {
        double ft = 1.0;
        if (spec_.w_t > 0.0) ft = bump_profile(t / spec_.w_t);
        if (ft == 0.0 || spec_.amp_dist == AmpDist::zero) return 0.0;
        double const reach = spec_.w_tau + 0.5 / spec_.r;
        auto const n_lo = static_cast<std::int64_t>(std::floor(spec_.r * (tau - reach)));
        auto const n_hi = static_cast<std::int64_t>(std::ceil(spec_.r * (tau + reach)));
        if (n_lo < window_.n_min || n_hi > window_.n_max)
            throw InvalidArgument("bump field: fast time " + format_double(tau) + " outside the index window [" +
                                  std::to_string(window_.n_min) + ", " + std::to_string(window_.n_max) + "]");
        double s = 0.0;
        for (std::int64_t n = n_lo; n <= n_hi; ++n) {
            for (int c = 0; c < spec_.cells; ++c) {
                rng::CounterStream st(rng::derive(seed_, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(c)));
                double const T = (static_cast<double>(n) + st.uniform() - 0.5) / spec_.r;
                double const ut = (tau - T) / spec_.w_tau;
                if (std::abs(ut) >= 1.0) continue;
                double const X = (static_cast<double>(c) + st.uniform()) * h_;
                double const ux = wrap_pm_pi(x - X) / spec_.w_x;
                if (std::abs(ux) >= 1.0) continue;
                double const alpha = spec_.amp_dist == AmpDist::rademacher ? st.rademacher() : st.normal();
                double const px = spec_.gradient ? -bump_profile_derivative(ux) / spec_.w_x : bump_profile(ux);
                s += alpha * bump_profile(ut) * px;
            }
        }
        return spec_.amp * ft * s;
    }

    std::string kind() const override { return "bump"; }

private:
    BumpFieldSpec spec_;
    std::uint64_t seed_;
    BumpWindow window_;
    double h_;
};

class WkbField final : public FieldRealization {
public:
    explicit WkbField(WkbFieldSpec spec) : spec_(std::move(spec)) {}

    double eval(double, double tau, double x) const override
    {
        double s = 0.0;
        for (auto const& m : spec_.modes) s += m.amplitude * std::cos(m.k * x - m.omega * tau);
        return s;
    }

    std::string kind() const override { return "wkb"; }

private:
    WkbFieldSpec spec_;
};

}  // namespace

FieldPtr zero_field() { return std::make_shared<ZeroField>(); }

FieldPtr sample_spectral(SpectralFieldSpec const& spec) { return sample_spectral(spec, spec.seed); }

FieldPtr sample_spectral(SpectralFieldSpec const& spec, std::uint64_t seed)
{
    validate(spec);
    if (spec.autocorr != AutocorrKind::triangular)
        throw InvalidArgument("sample_spectral: autocorrelation kind '" + to_string(spec.autocorr) +
                              "' is not positive definite and cannot be sampled");
    return std::make_shared<SpectralField>(spec, seed);
}

FieldPtr sample_bump(BumpFieldSpec const& spec, BumpWindow window) { return sample_bump(spec, spec.seed, window); }

FieldPtr sample_bump(BumpFieldSpec const& spec, std::uint64_t seed, BumpWindow window)
{
    validate(spec);
    return std::make_shared<BumpField>(spec, seed, window);
}

void validate(WkbFieldSpec const& spec)
{
    if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0)) throw InvalidArgument("wkb field: epsilon must be in (0, 1]");
    for (auto const& m : spec.modes) {
        if (m.k == 0.0 || !std::isfinite(m.k)) throw InvalidArgument("wkb field: k must be nonzero");
        bool paired = false;
        for (auto const& p : spec.modes)
            if (p.k == -m.k) paired = close(p.amplitude, m.amplitude) && close(p.omega, -m.omega);
        if (!paired) throw InvalidArgument("wkb field: mode k = " + format_double(m.k) + " lacks a Hermitian partner");
    }
}

double eval_wkb(WkbFieldSpec const& spec, double t, double x)
{
    double const tau = t / (spec.epsilon * spec.epsilon);
    double s = 0.0;
    for (auto const& m : spec.modes) s += m.amplitude * std::cos(m.k * x - m.omega * tau);
    return s;
}

FieldPtr make_wkb(WkbFieldSpec const& spec)
{
    validate(spec);
    return std::make_shared<WkbField>(spec);
}

AutocorrEstimate estimate_autocorr(std::function<FieldPtr(std::size_t)> const& sampler, std::size_t n_samples,
                                   double t, std::vector<AutocorrLag> const& lags,
                                   std::vector<AutocorrBase> const& bases, int workers)
{
    if (n_samples < 2) throw InvalidArgument("estimate_autocorr: need at least 2 samples");
    if (bases.empty()) throw InvalidArgument("estimate_autocorr: need at least one base point");
    std::size_t const nl = lags.size(), nb = bases.size();
    // per realization: nb*nl products, then nb field values
    std::vector<std::vector<double>> rows(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        auto const field = sampler(i);
        std::vector<double> r(nb * nl + nb);
        for (std::size_t b = 0; b < nb; ++b) {
            double const e0 = field->eval(t, bases[b].tau, bases[b].x);
            r[nb * nl + b] = e0;
            for (std::size_t l = 0; l < nl; ++l)
                r[b * nl + l] = e0 * field->eval(t, bases[b].tau - lags[l].sigma, bases[b].x - lags[l].xi);
        }
        rows[i] = std::move(r);
    });

    auto const n = static_cast<double>(n_samples);
    auto mean_se = [&](auto const& get) {
        double m = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) m += get(i);
        m /= n;
        double v = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) v += (get(i) - m) * (get(i) - m);
        v /= (n - 1.0);
        return std::pair{m, std::sqrt(v / n)};
    };

    AutocorrEstimate est;
    est.lags = lags;
    est.n_samples = n_samples;
    est.per_base.assign(nb, std::vector<double>(nl));
    est.per_base_std_error.assign(nb, std::vector<double>(nl));
    for (std::size_t l = 0; l < nl; ++l) {
        auto [m, se] = mean_se([&](std::size_t i) {
            double s = 0.0;
            for (std::size_t b = 0; b < nb; ++b) s += rows[i][b * nl + l];
            return s / static_cast<double>(nb);
        });
        est.value.push_back(m);
        est.std_error.push_back(se);
        for (std::size_t b = 0; b < nb; ++b) {
            auto [mb, seb] = mean_se([&](std::size_t i) { return rows[i][b * nl + l]; });
            est.per_base[b][l] = mb;
            est.per_base_std_error[b][l] = seb;
        }
        for (std::size_t b = 1; b < nb; ++b) {
            double const d = std::abs(est.per_base[b][l] - est.per_base[0][l]);
            double const s = std::hypot(est.per_base_std_error[b][l], est.per_base_std_error[0][l]);
            if (d > 0.0) est.stationarity_z = std::max(est.stationarity_z, s > 0.0 ? d / s : INFINITY);
        }
    }
    auto [mf, sef] = mean_se([&](std::size_t i) {
        double s = 0.0;
        for (std::size_t b = 0; b < nb; ++b) s += rows[i][nb * nl + b];
        return s / static_cast<double>(nb);
    });
    est.mean_field = mf;
    est.mean_stderr = sef;
    return est;
}

void AutocorrEstimate::write_csv(std::string const& path) const
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "sigma,xi,value,stderr\n";
    for (std::size_t l = 0; l < lags.size(); ++l)
        os << format_double(lags[l].sigma) << ',' << format_double(lags[l].xi) << ',' << format_double(value[l]) << ','
           << format_double(std_error[l]) << '\n';
}

}  // namespace vlq
