#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vlq {

/// Target fast-time autocorrelation of the spectral envelopes.
enum class AutocorrKind { triangular, indicator, gaussian_rbt };

std::string to_string(AutocorrKind k);
AutocorrKind autocorr_kind_from_string(std::string const& s);

/// Normalized fast-time autocorrelation A(sigma, k).
/// triangular: max(0, 1 - |sigma|/tau); indicator: 1 on |sigma| < tau;
/// gaussian_rbt: exp(-k^2 d_rb |sigma|^3 / 3).
double envelope_autocorr(AutocorrKind kind, double sigma, double tau, double k = 1.0, double d_rb = 0.0);

/// One entry of a wave spectrum; energy(t) = energy * exp(growth * t).
struct SpectralMode {
    double k = 0.0;
    double energy = 0.0;
    double omega = 0.0;
    double growth = 0.0;

    double energy_at(double t) const;
};

struct SpectralFieldSpec {
    std::vector<SpectralMode> modes;
    AutocorrKind autocorr = AutocorrKind::triangular;
    double tau = 1.0;
    double d_rb = 0.0;
    bool gradient_projection = true;  // k (x) k / |k|^2, identically 1 in d = 1
    std::uint64_t seed = 0;

    /// Modes with k > 0; each stands for the pair (k, -k).
    std::vector<SpectralMode> positive_modes() const;
};

/// Throws InvalidArgument unless every mode has an integer k != 0, a partner at -k with
/// equal energy and growth and omega(-k) = -omega(k), nonnegative energy, tau > 0.
void validate(SpectralFieldSpec const& spec);

/// Two-sided analytic autocorrelation sum_k E(t,k) A(sigma,k) cos(k xi - omega sigma).
double spectral_autocorr(SpectralFieldSpec const& spec, double t, double sigma, double xi);

enum class AmpDist { rademacher, gaussian, zero };

std::string to_string(AmpDist d);
AmpDist amp_dist_from_string(std::string const& s);

/// Random bump field sum_{n,c} alpha * eta_t(t) eta_tau(tau - T) eta_x(x - X) on the torus,
/// with T uniform in n/r + [-1/(2r), 1/(2r)] and X uniform in the c-th of `cells` equal
/// x-cells. Widths are half-widths of the profile exp(-1/(1 - u^2)).
struct BumpFieldSpec {
    double r = 1.0;
    double rho = 1.0;
    double w_t = 0.0;    // <= 0 disables the slow-time factor
    double w_tau = 0.5;  // must be <= rho / 2
    double w_x = 0.5;    // must be < pi
    double amp = 1.0;
    AmpDist amp_dist = AmpDist::rademacher;
    bool gradient = false;  // field is -d/dx of the scalar bump sum
    int cells = 6;
    std::uint64_t seed = 0;

    double tau() const { return 1.0 / r + rho; }
    double cell_width() const;
    /// False for amplitude laws that break a.s. boundedness (gaussian).
    bool conforming() const { return amp_dist != AmpDist::gaussian; }
};

void validate(BumpFieldSpec const& spec);

/// Inclusive window of fast-time bump indices n that a realization may use.
struct BumpWindow {
    std::int64_t n_min = -1000000;
    std::int64_t n_max = 1000000;
};

/// Bump window covering fast times [tau_lo, tau_hi] with one support width of margin.
BumpWindow bump_window_for(BumpFieldSpec const& spec, double tau_lo, double tau_hi);

double bump_profile(double u);             // exp(-1/(1-u^2)) on |u| < 1, else 0
double bump_profile_derivative(double u);  // d/du of the above

/// Exact autocorrelation E[E(t,tau,x) E(s,tau-sigma,x-xi)] of the bump field,
/// amp^2 * (r/h) * eta_t(t) eta_t(s) * C_tau(sigma) * C_x(xi).
double bump_autocorr(BumpFieldSpec const& spec, double t, double s, double sigma, double xi);

/// A sampled field E(t, tau, x): slow time t, fast time tau, position x.
class FieldRealization {
public:
    virtual ~FieldRealization() = default;
    virtual double eval(double t, double tau, double x) const = 0;
    /// out[i] = eval(t, tau, x0 + i*dx).
    virtual void eval_grid(double t, double tau, double x0, double dx, std::span<double> out) const;
    virtual std::string kind() const = 0;
};

using FieldPtr = std::shared_ptr<FieldRealization const>;

/// Identically zero field.
FieldPtr zero_field();

/// Random-phase spectral field; the seed in `spec` selects the realization.
/// Only the triangular kind is sampleable (see README); others throw.
FieldPtr sample_spectral(SpectralFieldSpec const& spec);
FieldPtr sample_spectral(SpectralFieldSpec const& spec, std::uint64_t seed);

FieldPtr sample_bump(BumpFieldSpec const& spec, BumpWindow window = {});
FieldPtr sample_bump(BumpFieldSpec const& spec, std::uint64_t seed, BumpWindow window);

struct WkbMode {
    double k = 0.0;
    double amplitude = 0.0;  // E0(t,k), even in k
    double omega = 0.0;      // Omega(t,k) = omega * t, odd in k
};

struct WkbFieldSpec {
    std::vector<WkbMode> modes;
    double epsilon = 1.0;
};

void validate(WkbFieldSpec const& spec);

/// E(t,x) = sum_k E0(k) cos(k x - omega(k) t / eps^2).
double eval_wkb(WkbFieldSpec const& spec, double t, double x);

/// Deterministic field eval(t, tau, x) = sum_k E0 cos(k x - omega tau).
FieldPtr make_wkb(WkbFieldSpec const& spec);

// ---- Monte-Carlo autocorrelation ----

struct AutocorrLag {
    double sigma = 0.0;
    double xi = 0.0;
};

struct AutocorrBase {
    double tau = 0.0;
    double x = 0.0;
};

struct AutocorrEstimate {
    std::vector<AutocorrLag> lags;
    std::vector<double> value;   // pooled over base points
    std::vector<double> std_error;  // standard error across realizations
    // per_base[b][l]: estimate at base point b, lag l
    std::vector<std::vector<double>> per_base;
    std::vector<std::vector<double>> per_base_std_error;
    double mean_field = 0.0;  // (H1) sample mean of E at the base points
    double mean_stderr = 0.0;
    double stationarity_z = 0.0;  // worst |m_b - m_0| / sqrt(se_b^2 + se_0^2)
    std::size_t n_samples = 0;

    bool stationary(double z_max = 3.0) const { return stationarity_z <= z_max; }
    void write_csv(std::string const& path) const;
};

/// Estimates E[E(t,tau,x) E(t,tau-sigma,x-xi)] from n_samples realizations produced by
/// `sampler(i)`. Each realization contributes the base-point average of its products.
AutocorrEstimate estimate_autocorr(std::function<FieldPtr(std::size_t)> const& sampler, std::size_t n_samples,
                                   double t, std::vector<AutocorrLag> const& lags,
                                   std::vector<AutocorrBase> const& bases, int workers = 1);

}  // namespace vlq
