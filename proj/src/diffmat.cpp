#include "vlq/diffmat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vlq/config.hpp"
#include "vlq/error.hpp"
#include "vlq/numerics.hpp"

namespace vlq {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace

double AutocorrTensor::x(std::size_t i) const { return two_pi * static_cast<double>(i) / static_cast<double>(n_x); }

namespace {

// Real Fourier coefficients of one periodic row: f(x) = a0 + sum_m (a_m cos mx + b_m sin mx),
// the Nyquist cosine carrying half weight so the interpolant is real and symmetric.
struct TrigRow {
    std::vector<double> a, b;

    TrigRow(double const* row, std::size_t n)
    {
        std::size_t const half = n / 2;
        a.assign(half + 1, 0.0);
        b.assign(half + 1, 0.0);
        for (std::size_t mm = 0; mm <= half; ++mm) {
            double sa = 0.0, sb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double const ang = two_pi * static_cast<double>((mm * i) % n) / static_cast<double>(n);
                sa += row[i] * std::cos(ang);
                sb += row[i] * std::sin(ang);
            }
            double const w = (mm == 0 || mm == half) ? 1.0 : 2.0;
            a[mm] = w * sa / static_cast<double>(n);
            b[mm] = (mm == 0 || mm == half) ? 0.0 : w * sb / static_cast<double>(n);
        }
    }

    double operator()(double x) const
    {
        double const c1 = std::cos(x), s1 = std::sin(x);
        double c = 1.0, s = 0.0, out = a[0];
        for (std::size_t mm = 1; mm < a.size(); ++mm) {
            double const cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            out += a[mm] * c + b[mm] * s;
        }
        return out;
    }
};

}  // namespace

double AutocorrTensor::interp(std::size_t j, double xq) const { return TrigRow(values.data() + j * n_x, n_x)(xq); }

AutocorrTensor tabulate_autocorr(std::function<double(double, double)> const& fn, double tau, double t,
                                 std::size_t n_half, std::size_t n_x, std::size_t extent, std::string form)
{
    if (!(tau > 0.0)) throw InvalidArgument("autocorrelation tensor: tau must be positive");
    if (n_half == 0 || n_half % 4 != 0) throw InvalidArgument("autocorrelation tensor: n_half must be a multiple of 4");
    if (n_x < 2 || n_x % 2 != 0) throw InvalidArgument("autocorrelation tensor: n_x must be even");
    if (extent < 1) throw InvalidArgument("autocorrelation tensor: extent must be >= 1");
    AutocorrTensor R;
    R.tau = tau;
    R.t = t;
    R.n_half = n_half;
    R.m = n_half * extent;
    R.n_x = n_x;
    R.form = std::move(form);
    R.values.resize(R.n_sigma() * n_x);
    for (std::size_t j = 0; j < R.n_sigma(); ++j)
        for (std::size_t i = 0; i < n_x; ++i) R.at(j, i) = fn(R.sigma(j), R.x(i));
    return R;
}

AutocorrTensor tabulate_spectral_autocorr(SpectralFieldSpec const& spec, double t, std::size_t n_half,
                                          std::size_t n_x, std::size_t extent)
{
    validate(spec);
    return tabulate_autocorr([&](double s, double x) { return spectral_autocorr(spec, t, s, x); }, spec.tau, t,
                             n_half, n_x, extent, "spectral");
}

std::string to_string(DiffKind k)
{
    switch (k) {
    case DiffKind::quadrature: return "quadrature";
    case DiffKind::sinc2: return "sinc2";
    case DiffKind::quasilinear: return "quasilinear";
    case DiffKind::rbt_fixed_point: return "rbt_fixed_point";
    }
    return "?";
}

std::vector<double> DiffusionMatrix::scalar() const
{
    if (d != 1) throw InvalidArgument("DiffusionMatrix::scalar: d != 1");
    return values;
}

void DiffusionMatrix::update_metadata()
{
    symmetry_defect = 0.0;
    sup_norm = 0.0;
    min_eigenvalue = std::numeric_limits<double>::infinity();
    auto const dd = static_cast<std::size_t>(d * d);
    for (std::size_t n = 0; n < size(); ++n) {
        double const* blk = values.data() + n * dd;
        for (std::size_t q = 0; q < dd; ++q) sup_norm = std::max(sup_norm, std::abs(blk[q]));
        if (d == 1) {
            min_eigenvalue = std::min(min_eigenvalue, blk[0]);
            continue;
        }
        Eigen::MatrixXd M(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) M(a, b) = blk[a * d + b];
        symmetry_defect = std::max(symmetry_defect, (M - M.transpose()).cwiseAbs().maxCoeff());
        Eigen::MatrixXd const S = 0.5 * (M + M.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
        min_eigenvalue = std::min(min_eigenvalue, es.eigenvalues().minCoeff());
    }
    if (size() == 0) min_eigenvalue = 0.0;
}

DiffusionMatrix DiffusionMatrix::scalar_on(std::vector<double> const& v_nodes, double t, DiffKind kind)
{
    DiffusionMatrix D;
    D.d = 1;
    D.t = t;
    D.kind = kind;
    D.v.reserve(v_nodes.size());
    for (double v : v_nodes) D.v.push_back({v});
    D.values.assign(v_nodes.size(), 0.0);
    return D;
}

double sinc(double u)
{
    if (std::abs(u) < 1e-4) {
        double const u2 = u * u;
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
    }
    return std::sin(u) / u;
}

double sinc2_kernel(double delta, double tau, double eta)
{
    double const b = 0.5 * tau + eta;
    return b * sinc(0.5 * tau * delta) * sinc(b * delta);
}

double resonance_rbt(double xi, double a, double tol)
{
    if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("resonance_rbt: a must be finite and >= 0");
    xi = std::abs(xi);
    if (a == 0.0) {
        if (xi == 0.0) throw NumericalError("resonance_rbt: unbroadened exact resonance is singular");
        return 0.0;
    }
    if (xi == 0.0) return boost::math::tgamma(4.0 / 3.0) * std::cbrt(3.0 / a);
    double const s = a / (xi * xi * xi);
    if (s < 1e-4) {
        double const x4 = xi * xi * xi * xi;
        return -2.0 * a / x4 + 2240.0 * a * a * a / (x4 * x4 * xi * xi);
    }
    // exp(-a s^3 / 3) <= tol beyond s*, and the tail is bounded by tol / (a s*^2).
    double const s_star = std::cbrt(3.0 * std::log(1.0 / tol) / a);
    auto f = [&](double q) { return std::cos(xi * q) * std::exp(-a * q * q * q / 3.0); };
    // Split into pieces of about two oscillations so the adaptive rule never straddles many.
    auto const pieces = static_cast<int>(std::ceil(xi * s_star / (4.0 * pi)));
    double const piece = s_star / std::max(1, pieces);
    double sum = 0.0;
    for (int p = 0; p < std::max(1, pieces); ++p)
        sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, p * piece, (p + 1) * piece, 8, 1e-15);
    return sum;
}

DiffusionMatrix dtau_quadrature(AutocorrTensor const& R, std::vector<double> const& v_nodes, double tol)
{
    auto D = DiffusionMatrix::scalar_on(v_nodes, R.t, DiffKind::quadrature);
    D.detail = R.form;
    std::size_t const n = R.n_half;
    double const h = R.h();
    auto const wf = num::simpson_weights(n + 1, h);
    auto const wc = num::simpson_weights(n / 2 + 1, 2.0 * h);
    std::vector<TrigRow> rows;
    rows.reserve(n + 1);
    for (std::size_t j = 0; j <= n; ++j) rows.emplace_back(R.values.data() + (R.m + j) * R.n_x, R.n_x);
    std::vector<double> vals(n + 1);
    for (std::size_t q = 0; q < v_nodes.size(); ++q) {
        double const v = v_nodes[q];
        for (std::size_t j = 0; j <= n; ++j) {
            double const s = static_cast<double>(j) * h;
            double x = std::fmod(s * v, two_pi);
            if (x < 0) x += two_pi;
            vals[j] = rows[j](x);
        }
        double fine = 0.0, coarse = 0.0;
        for (std::size_t j = 0; j <= n; ++j) fine += wf[j] * vals[j];
        for (std::size_t j = 0; j <= n / 2; ++j) coarse += wc[j] * vals[2 * j];
        double const err = std::abs(fine - coarse) / 15.0;
        D.quadrature_error = std::max(D.quadrature_error, err);
        if (err > tol * std::max(1.0, std::abs(fine)))
            throw NumericalError("dtau_quadrature: sigma grid too coarse at v = " + format_double(v) +
                                 " (estimated error " + format_double(err) + ")");
        D.values[q] = fine;
    }
    D.update_metadata();
    return D;
}

DiffusionMatrix dtau_sinc2(std::vector<SpectralMode> const& modes, double tau, double eta, double t,
                           std::vector<double> const& v_nodes)
{
    if (!(tau > 0.0)) throw InvalidArgument("dtau_sinc2: tau must be positive");
    if (!(eta >= 0.0)) throw InvalidArgument("dtau_sinc2: eta must be >= 0");
    auto D = DiffusionMatrix::scalar_on(v_nodes, t, DiffKind::sinc2);
    D.detail = "tau=" + format_double(tau) + " eta=" + format_double(eta);
    for (std::size_t q = 0; q < v_nodes.size(); ++q) {
        double s = 0.0;
        for (auto const& m : modes) {
            double const e = m.energy_at(t);
            if (e == 0.0) continue;
            s += e * sinc2_kernel(m.omega - m.k * v_nodes[q], tau, eta);
        }
        D.values[q] = s;
    }
    D.update_metadata();
    return D;
}

DiffusionMatrix dtau_sinc2(std::vector<VectorMode> const& modes, double tau, double eta,
                           std::vector<std::vector<double>> const& v_points, bool projection)
{
    if (!(tau > 0.0)) throw InvalidArgument("dtau_sinc2: tau must be positive");
    if (v_points.empty()) throw InvalidArgument("dtau_sinc2: empty velocity set");
    int const d = static_cast<int>(v_points.front().size());
    for (auto const& m : modes)
        if (static_cast<int>(m.k.size()) != d || static_cast<int>(m.e0.size()) != d)
            throw InvalidArgument("dtau_sinc2: mode dimension mismatch");
    DiffusionMatrix D;
    D.d = d;
    D.kind = DiffKind::sinc2;
    D.v = v_points;
    D.values.assign(v_points.size() * static_cast<std::size_t>(d * d), 0.0);
    for (std::size_t q = 0; q < v_points.size(); ++q) {
        double* blk = D.values.data() + q * static_cast<std::size_t>(d * d);
        for (auto const& m : modes) {
            double kv = 0.0, k2 = 0.0, e2 = 0.0;
            for (int a = 0; a < d; ++a) {
                kv += m.k[a] * v_points[q][a];
                k2 += m.k[a] * m.k[a];
                e2 += m.e0[a] * m.e0[a];
            }
            double const K = sinc2_kernel(m.omega - kv, tau, eta);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    blk[a * d + b] += K * (projection ? e2 * m.k[a] * m.k[b] / k2 : m.e0[a] * m.e0[b]);
        }
    }
    D.update_metadata();
    return D;
}

double regularized_delta(Regularization::Kind kind, double width, double xi)
{
    if (kind == Regularization::Kind::lorentzian) return width / (pi * (xi * xi + width * width));
    return sinc2_kernel(xi, width, 0.0) / pi;
}

double regularized_delta_mass(Regularization::Kind kind, double width, double window)
{
    if (!(width > 0.0)) throw InvalidArgument("regularized delta: zero regularization width");
    auto f = [&](double xi) { return regularized_delta(kind, width, xi); };
    // integrate over pieces a few widths long (sinc^2 lobes have length 2pi/tau)
    double const scale = kind == Regularization::Kind::lorentzian ? width : two_pi / width;
    double const piece = std::max(window / 2000.0, 2.0 * scale);
    double inner = 0.0;
    for (double lo = 0.0; lo < window; lo += piece)
        inner += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, std::min(lo + piece, window), 10,
                                                                             1e-14);
    inner *= 2.0;
    double tail;
    if (kind == Regularization::Kind::lorentzian) {
        tail = 1.0 - 2.0 / pi * std::atan(window / width);
    } else {
        // (2/pi) int_a^inf sin^2 u / u^2 du = (2/pi) [sin^2 a / a + pi/2 - Si(2a)], a = tau W / 2
        double const a = 0.5 * width * window;
        double si = 0.0;
        auto g = [](double u) { return sinc(u); };
        double const step = 2.0 * pi;
        for (double lo = 0.0; lo < 2.0 * a; lo += step)
            si += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, lo, std::min(lo + step, 2.0 * a), 10,
                                                                               1e-15);
        tail = 2.0 / pi * (std::sin(a) * std::sin(a) / a + pi / 2.0 - si);
    }
    return inner + tail;
}

DiffusionMatrix dql_limit(std::vector<SpectralMode> const& modes, Regularization reg, double t,
                          std::vector<double> const& v_nodes)
{
    if (reg.kind == Regularization::Kind::sinc2 && !(reg.width > 0.0))
        throw InvalidArgument("dql_limit: zero regularization width");
    auto D = DiffusionMatrix::scalar_on(v_nodes, t, DiffKind::quasilinear);
    double dv = 0.0;
    if (v_nodes.size() > 1) dv = std::abs(v_nodes[1] - v_nodes[0]);
    D.detail = reg.kind == Regularization::Kind::lorentzian ? "lorentzian" : "sinc2";
    for (auto const& m : modes) {
        double const e = m.energy_at(t);
        if (e == 0.0) continue;
        double width = reg.width;
        if (reg.kind == Regularization::Kind::lorentzian && !(width > 0.0)) width = std::max(std::abs(m.k) * dv, 1e-3);
        for (std::size_t q = 0; q < v_nodes.size(); ++q)
            D.values[q] += pi * e * regularized_delta(reg.kind, width, m.omega - m.k * v_nodes[q]);
    }
    D.update_metadata();
    return D;
}

std::vector<double> drbt_map(std::vector<SpectralMode> const& modes, double t, std::vector<double> const& v_nodes,
                             std::vector<double> const& D, double quad_tol)
{
    std::vector<double> out(v_nodes.size(), 0.0);
    for (std::size_t q = 0; q < v_nodes.size(); ++q) {
        double s = 0.0;
        for (auto const& m : modes) {
            double const e = m.energy_at(t);
            if (e == 0.0) continue;
            s += e * resonance_rbt(m.omega - m.k * v_nodes[q], m.k * m.k * D[q], quad_tol);
        }
        out[q] = s;
    }
    return out;
}

namespace {

struct PicardResult {
    std::vector<double> D;
    std::vector<double> residual;
    int iterations = 0;
    bool converged = false;
    double best = INFINITY;
    std::size_t projections = 0;
};

PicardResult picard(std::vector<SpectralMode> const& modes, double t, std::vector<double> const& v,
                    std::vector<double> D, RbtOptions const& opt)
{
    PicardResult r;
    std::vector<double> best_D = D, best_res(v.size(), INFINITY);
    for (int it = 0; it <= opt.max_iter; ++it) {
        auto G = drbt_map(modes, t, v, D, opt.quad_tol);
        double res = 0.0;
        std::vector<double> nodal(v.size());
        for (std::size_t q = 0; q < v.size(); ++q) {
            if (G[q] < 0.0) {
                ++r.projections;
                G[q] = 0.0;
            }
            nodal[q] = std::abs(G[q] - D[q]);
            res = std::max(res, nodal[q]);
        }
        if (res < r.best) {
            r.best = res;
            best_D = D;
            best_res = nodal;
            r.iterations = it;
        }
        if (res < opt.tol) {
            r.converged = true;
            break;
        }
        if (it == opt.max_iter) break;
        for (std::size_t q = 0; q < v.size(); ++q) D[q] = (1.0 - opt.damping) * D[q] + opt.damping * G[q];
    }
    r.D = std::move(best_D);
    r.residual = std::move(best_res);
    return r;
}

}  // namespace

DiffusionMatrix drbt_fixed_point(std::vector<SpectralMode> const& modes, double t, std::vector<double> const& v_nodes,
                                 RbtOptions const& opt)
{
    if (!(opt.tol > 0.0)) throw InvalidArgument("drbt_fixed_point: tol must be positive");
    if (opt.max_iter < 1) throw InvalidArgument("drbt_fixed_point: max_iter must be >= 1");
    if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw InvalidArgument("drbt_fixed_point: damping in (0, 1]");
    double mean_k = 0.0;
    std::size_t active = 0;
    for (auto const& m : modes)
        if (m.energy_at(t) > 0.0) mean_k += std::abs(m.k), ++active;
    auto D = DiffusionMatrix::scalar_on(v_nodes, t, DiffKind::rbt_fixed_point);
    if (active == 0) {
        D.residual.assign(v_nodes.size(), 0.0);
        D.iterations = 1;
        D.update_metadata();
        return D;
    }
    mean_k /= static_cast<double>(active);
    double const dv = v_nodes.size() > 1 ? std::abs(v_nodes[1] - v_nodes[0]) : 1.0;
    Regularization reg;
    reg.width = std::max(mean_k * dv, 1e-3);
    auto const start = dql_limit(modes, reg, t, v_nodes).values;

    auto a = picard(modes, t, v_nodes, start, opt);
    D.values = a.D;
    D.residual = a.residual;
    D.iterations = a.iterations;
    D.converged = a.converged;
    D.final_residual = a.best;
    D.psd_projections = a.projections;
    if (opt.second_start) {
        auto start_b = start;
        for (auto& x : start_b) x *= 4.0;
        auto b = picard(modes, t, v_nodes, start_b, opt);
        double diff = 0.0, norm = 0.0;
        for (std::size_t q = 0; q < v_nodes.size(); ++q) {
            diff = std::max(diff, std::abs(a.D[q] - b.D[q]));
            norm = std::max(norm, std::abs(a.D[q]));
        }
        D.start_sensitivity = norm > 0.0 ? diff / norm : diff;
    }
    D.detail = D.converged ? "converged" : "not converged";
    D.update_metadata();
    return D;
}

bool PropCheckReport::all_pass() const
{
    return std::all_of(items.begin(), items.end(), [](auto const& i) { return i.pass; });
}

PropCheckReport check_prop_dprop(DiffusionMatrix const& D, AutocorrTensor const& R)
{
    PropCheckReport rep;
    double rmax = 0.0;
    bool finite = true;
    for (double x : R.values) {
        if (!std::isfinite(x)) finite = false;
        else rmax = std::max(rmax, std::abs(x));
    }

    PropCheckItem sym{"transpose_reflection_symmetry", true, 0.0, ""};
    for (std::size_t j = 0; j < R.n_sigma(); ++j)
        for (std::size_t i = 0; i < R.n_x; ++i) {
            double const d = std::abs(R.at(j, i) - R.at(R.n_sigma() - 1 - j, (R.n_x - i) % R.n_x));
            if (d > sym.worst) {
                sym.worst = d;
                sym.where = "sigma=" + format_double(R.sigma(j)) + " x=" + format_double(R.x(i));
            }
        }
    sym.pass = sym.worst <= 1e-12 * std::max(1.0, rmax);

    PropCheckItem sup{"sigma_support_within_tau", true, 0.0, ""};
    for (std::size_t j = 0; j < R.n_sigma(); ++j) {
        if (std::abs(R.sigma(j)) <= R.tau * (1.0 + 1e-12)) continue;
        for (std::size_t i = 0; i < R.n_x; ++i)
            if (std::abs(R.at(j, i)) > sup.worst) {
                sup.worst = std::abs(R.at(j, i));
                sup.where = "sigma=" + format_double(R.sigma(j)) + " x=" + format_double(R.x(i));
            }
    }
    sup.pass = sup.worst <= 1e-14 * std::max(1.0, rmax);

    PropCheckItem fin{"finite_sup_norms", true, 0.0, ""};
    for (double x : D.values)
        if (!std::isfinite(x)) finite = false;
    // |R(sigma, x)| <= R(0, 0) for a stationary field, so |D| <= tau R(0, 0). The sampled
    // row maxima would understate sup_x between grid points.
    double const bound = R.tau * std::abs(R.at(R.m, 0));
    fin.worst = D.sup_norm;
    fin.pass = finite && D.sup_norm <= bound * (1.0 + 1e-6) + 1e-14;
    fin.where = finite ? "bound=" + format_double(bound) : "non-finite entry";

    PropCheckItem psd{"symmetric_part_psd", true, D.min_eigenvalue, ""};
    psd.pass = D.min_eigenvalue >= -1e-10 * D.sup_norm;
    for (std::size_t q = 0; q < D.size() && D.d == 1; ++q)
        if (D.values[q] == D.min_eigenvalue) {
            psd.where = "v=" + format_double(D.v[q][0]);
            break;
        }

    rep.items = {sym, sup, fin, psd};
    return rep;
}

void write_csv(DiffusionMatrix const& D, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "t";
    for (int a = 0; a < D.d; ++a) os << (D.d == 1 ? ",v" : ",v" + std::to_string(a));
    if (D.d == 1) os << ",D";
    else
        for (int a = 0; a < D.d; ++a)
            for (int b = 0; b < D.d; ++b) os << ",D_" << a << b;
    os << ",kind,residual\n";
    for (std::size_t q = 0; q < D.size(); ++q) {
        os << format_double(D.t);
        for (double x : D.v[q]) os << ',' << format_double(x);
        for (int a = 0; a < D.d; ++a)
            for (int b = 0; b < D.d; ++b) os << ',' << format_double(D.at(q, a, b));
        os << ',' << to_string(D.kind) << ',';
        if (D.kind == DiffKind::rbt_fixed_point && q < D.residual.size()) os << format_double(D.residual[q]);
        os << '\n';
    }
}

}  // namespace vlq
