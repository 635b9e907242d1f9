// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "vlq/cli.hpp"
#include "vlq/diffmat.hpp"
#include "vlq/dispersion.hpp"
#include "vlq/ensemble.hpp"
#include "vlq/error.hpp"
#include "vlq/qldiff.hpp"
#include "vlq/rng.hpp"
#include "vlq/stochfield.hpp"
#include "vlq/vlasov.hpp"

using namespace vlq;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(char const* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string g(double a) { return fmt("%.3g", a); }

std::vector<double> nodes(std::size_t n, double vmax)
{
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = -vmax + 2.0 * vmax * static_cast<double>(j) / static_cast<double>(n - 1);
    return v;
}

double maxwell(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2 * pi); }

SpectralFieldSpec single(double energy, double omega, double tau)
{
    SpectralFieldSpec s;
    s.modes = {{1, energy, omega}, {-1, energy, -omega}};
    s.tau = tau;
    return s;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// 1 ---------------------------------------------------------------------------
Outcome closed_form()
{
    auto const s = single(0.3, 1.2, 2.0);
    auto const v = nodes(257, 6.0);
    auto const R = tabulate_spectral_autocorr(s, 0.0, 512, 8);
    auto const Dq = dtau_quadrature(R, v);
    auto const Dc = dtau_sinc2(s.modes, s.tau, 0.0, 0.0, v);
    double worst = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) worst = std::max(worst, std::abs(Dq.values[j] - Dc.values[j]));
    return {worst <= 1e-8, "max |D_quad - D_sinc2| = " + g(worst) + " over 257 nodes"};
}

// 2 ---------------------------------------------------------------------------
Outcome positivity()
{
    auto const v = nodes(129, 6.0);
    double worst = INFINITY;  // min over specs of lambda_min / ||D||
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        rng::CounterStream s(rng::derive(77, static_cast<std::uint64_t>(trial)));
        SpectralFieldSpec spec;
        spec.tau = 0.2 + 5.0 * s.uniform();
        int const pairs = 1 + static_cast<int>(8 * s.uniform()) % 8;
        for (int p = 0; p < pairs; ++p) {
            double const k = 1 + static_cast<int>(8 * s.uniform());
            if (std::any_of(spec.modes.begin(), spec.modes.end(), [&](auto const& m) { return m.k == k; })) continue;
            double const e = s.uniform(), w = 4 * s.uniform() - 2;
            spec.modes.push_back({k, e, w});
            spec.modes.push_back({-k, e, -w});
        }
        auto const Ds = dtau_sinc2(spec.modes, spec.tau, 0.0, 0.0, v);
        auto const Dq = dtau_quadrature(tabulate_spectral_autocorr(spec, 0.0, 4096, 32), v);
        for (auto const* D : {&Ds, &Dq}) {
            ok = ok && D->min_eigenvalue >= -1e-10 * D->sup_norm;
            if (D->sup_norm > 0) worst = std::min(worst, D->min_eigenvalue / D->sup_norm);
        }
    }
    double kmin = INFINITY;
    for (int i = 0; i < 10000; ++i) kmin = std::min(kmin, sinc2_kernel(-50.0 + 0.01 * i, 3.0));
    ok = ok && kmin >= 0.0;
    return {ok, "min lambda/||D|| = " + g(worst) + " over 50 specs; min R_tau on 1e4 points = " + g(kmin)};
}

// 3 ---------------------------------------------------------------------------
Outcome ql_limit()
{
    // composite Simpson over [-12, 12]; the Gaussian tail is below 1e-31 there
    auto err = [](double tau) {
        std::size_t const n = 240000;
        double const a = -12.0, h = 24.0 / static_cast<double>(n);
        double s = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            double const xi = a + h * static_cast<double>(i);
            double const w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * sinc2_kernel(xi, tau) * std::exp(-0.5 * xi * xi);
        }
        return std::abs(s * h / 3.0 - pi);
    };
    double const e10 = err(10), e20 = err(20), e40 = err(40);
    double const r1 = e20 / e10, r2 = e40 / e20;
    bool const ok = std::abs(r1 - 0.5) <= 0.125 && std::abs(r2 - 0.5) <= 0.125;
    return {ok, "errors " + g(e10) + ", " + g(e20) + ", " + g(e40) + "; ratios " + g(r1) + ", " + g(r2)};
}

// 4 ---------------------------------------------------------------------------
Outcome rbt()
{
    auto const v = nodes(65, 4.0);  // node 40 is v = 1, the resonance of (k, omega) = (1, 1)
    std::vector<SpectralMode> modes{{1, 0.5, 1.0}, {-1, 0.5, -1.0}};
    auto const D = drbt_fixed_point(modes, 0.0, v);
    // bisection on D = E Gamma(4/3) (3/D)^(1/3), E = sum of the pair energies
    double lo = 1e-8, hi = 1e8;
    auto gap = [](double d) { return d - 1.0 * std::tgamma(4.0 / 3.0) * std::cbrt(3.0 / d); };
    for (int i = 0; i < 300; ++i) {
        double const mid = std::sqrt(lo * hi);
        (gap(mid) > 0 ? hi : lo) = mid;
    }
    double const oracle = std::sqrt(lo * hi);
    double const rel = std::abs(D.values[40] / oracle - 1.0);
    bool const ok = D.converged && rel <= 1e-6 && D.final_residual < 1e-8 && D.iterations <= 60;
    return {ok, "rel error " + g(rel) + ", residual " + g(D.final_residual) + " after " + std::to_string(D.iterations) +
                    " iterations"};
}

// 5 ---------------------------------------------------------------------------
double bump(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

double overlap(double d, double w)
{
    int const n = 20000;
    double const lo = std::min(0.0, d) - w, hi = std::max(0.0, d) + w, h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double const y = lo + (i + 0.5) * h;
        s += bump(y / w) * bump((y - d) / w);
    }
    return s * h;
}

Outcome field_hypotheses()
{
    BumpFieldSpec b;
    b.w_tau = 0.5;
    b.w_x = 0.6;
    auto const win = bump_window_for(b, -2.0, 12.0);
    std::vector<AutocorrLag> lags{{1.2 * b.tau(), 0.0}};
    for (double sg : {0.0, 0.15, 0.3, 0.5, 0.75})
        for (double xi : {0.0, 0.25, 0.5, 0.9}) lags.push_back({sg, xi});
    std::vector<AutocorrBase> bases{{1.0, 0.5}, {5.5, 3.0}};
    auto const est = estimate_autocorr([&](std::size_t i) { return sample_bump(b, rng::derive(5, i), win); }, 10000, 0.0,
                                       lags, bases, workers());
    bool const h1 = std::abs(est.mean_field) <= 4.0 * est.mean_stderr;
    bool const h2 = std::abs(est.value[0]) <= 4.0 * est.std_error[0];
    double const h = 2 * pi / b.cells;
    double worst = 0.0;
    for (std::size_t l = 1; l < lags.size(); ++l) {
        double cx = 0.0;
        for (int m = -1; m <= 1; ++m) cx += overlap(lags[l].xi + 2 * pi * m, b.w_x);
        double const oracle = b.amp * b.amp * b.r / h * overlap(lags[l].sigma, b.w_tau) * cx;
        worst = std::max(worst, std::abs(est.value[l] - oracle) / est.std_error[l]);
    }
    bool const h3 = worst <= 3.0;
    return {h1 && h2 && h3, "H1 |mean|/SE = " + g(std::abs(est.mean_field) / est.mean_stderr) + ", H2 |C(1.2 tau)|/SE = " +
                                g(std::abs(est.value[0]) / est.std_error[0]) + ", H3 worst z over 20 lags = " + g(worst)};
}

// 6 ---------------------------------------------------------------------------
Outcome dispersion()
{
    VelocityGrid const vg(1601, 12.0);
    auto const mw = VelocityProfile::maxwellian(vg);
    auto const r = solve_root(mw, 0.1);
    double const bg = std::abs(r.omega / bohm_gross(0.1, 1.0) - 1.0);
    bool ok = bg <= 0.01 && r.gamma < 0.0;
    std::string d = "Maxwellian k=0.1: |omega/omega_BG - 1| = " + g(bg) + ", gamma = " + g(r.gamma);

    double const nb = 0.1, vb = 4.0, vtb = 0.5;
    auto const bot = VelocityProfile::bump_on_tail(vg, nb, vb, vtb);
    auto fprime = [&](double v) {
        return -(1 - nb) * v * maxwell(v) - nb * (v - vb) / (vtb * vtb) * std::exp(-0.5 * (v - vb) * (v - vb) / (vtb * vtb)) /
                                                (vtb * std::sqrt(2 * pi));
    };
    int growing = 0, checked = 0;
    for (double k = 0.24; k <= 0.36 + 1e-9; k += 0.02) {
        auto const root = solve_root(bot, k);
        if (!(fprime(root.omega / k) > 0)) continue;
        ++checked;
        if (root.gamma > 0 && ql_growth_rate(bot, k, root.omega) > 0) ++growing;
    }
    ok = ok && checked > 0 && growing == checked;
    d += "; bump-on-tail: " + std::to_string(growing) + "/" + std::to_string(checked) + " positive-slope modes grow";
    return {ok, d};
}

// 7 ---------------------------------------------------------------------------
Outcome conservation()
{
    VlasovConfig c;
    c.epsilon = 1.0;
    c.grid = PhaseGrid(64, 257, 8.0);
    WkbFieldSpec w;
    w.modes = {{1, 0.3, 1.1}, {-1, 0.3, -1.1}, {2, 0.2, 1.4}, {-2, 0.2, -1.4}};
    c.field = make_wkb(w);
    c.dt = 1e-3;
    c.t_end = 1.0;
    VlasovSolver s(c);
    auto const f = DistFn::from_function(c.grid, [](double x, double v) { return (1 + 0.2 * std::cos(x)) * maxwell(v); });
    auto const tr = s.run(f, {{}, 10});
    double dm = 0.0, dl2 = 0.0, loss = tr.diag.back().boundary_loss;
    for (auto const& d : tr.diag) {
        dm = std::max(dm, std::abs(d.mass - tr.diag.front().mass));
        dl2 = std::max(dl2, std::abs(d.l2 - tr.diag.front().l2) / tr.diag.front().l2);
    }
    auto const one = free_flow(f, 0.37, 1.0);
    auto const two = free_flow(free_flow(f, 0.21, 1.0), 0.16, 1.0);
    double group = 0.0;
    for (std::size_t i = 0; i < one.values.size(); ++i) group = std::max(group, std::abs(one.values[i] - two.values[i]));
    bool const ok = !tr.aborted && tr.steps == 1000 && dm <= 1e-11 && dl2 <= 1e-6 && group <= 1e-12;
    return {ok, std::to_string(tr.steps) + " steps: mass drift " + g(dm) + " (boundary loss " + g(loss) + "), L2 drift " +
                    g(dl2) + ", group-law defect " + g(group)};
}

// 8 ---------------------------------------------------------------------------
Outcome homogenization()
{
    PhaseGrid const grid(64, 513, 10.0);
    double const eps = 0.3;
    auto const f0 = DistFn::from_function(grid, [](double x, double v) { return (1 + 0.5 * std::cos(x)) * maxwell(v); });
    auto const tests = hermite_test_set(grid.vgrid);
    auto const g0 = space_average(f0);
    double avg_drift = 0.0;
    for (int q = 1; q <= 50; ++q) {
        auto const a = space_average(free_flow(f0, 0.1 * q, eps));
        for (std::size_t j = 0; j < a.values.size(); ++j) avg_drift = std::max(avg_drift, std::abs(a.values[j] - g0.values[j]));
    }
    double const d0 = phase_weak_distance(f0, tests), d5 = phase_weak_distance(free_flow(f0, 5.0, eps), tests);
    bool const ok = avg_drift <= 1e-12 && d5 <= 0.1 * d0;
    return {ok, "x-average drift " + g(avg_drift) + "; weak distance to x-average " + g(d0) + " -> " + g(d5) + " at t = 5"};
}

// 9 ---------------------------------------------------------------------------
Outcome diffusion_limit()
{
    EnsembleConfig c;
    c.field = single(0.25, 1.0, 2.0);
    c.vlasov.grid = PhaseGrid(32, 129, 6.0);
    c.vlasov.t_end = 1.0;
    c.n_realizations = 128;
    c.epsilons = {0.4, 0.28, 0.2};
    c.compare_times = {1.0};
    c.master_seed = 42;
    c.workers = workers();
    auto const rep = run_ensemble(c);
    std::string d = "weak distance";
    bool decreasing = true;
    for (std::size_t ie = 0; ie < 3; ++ie) {
        auto const& p = rep.at(ie, 0);
        d += (ie ? ", " : " ") + g(p.weak) + " (SE " + g(p.weak_se) + ")";
        if (ie > 0) decreasing = decreasing && p.weak < rep.at(ie - 1, 0).weak;
    }
    auto const& last = rep.at(2, 0);
    bool const floor_ok = last.weak > 2.0 * last.weak_se || last.noise_limited;
    d += std::string(last.noise_limited ? "; smallest eps flagged noise-limited" : "; smallest eps above 2 SE floor") +
         "; dropped " + std::to_string(rep.dropped[0] + rep.dropped[1] + rep.dropped[2]);
    return {decreasing && floor_ok && !rep.drop_flag, d};
}

// 10 --------------------------------------------------------------------------
Outcome ql_plateau()
{
    VelocityGrid const vg(401, 8.0);
    auto const prof = VelocityProfile::bump_on_tail(vg, 0.1, 4.0, 0.5);
    std::vector<double> ks;
    for (int i = 0; i < 64; ++i) ks.push_back(0.2 + 0.2 * i / 63.0);
    QlOptions opt;
    opt.dt = 0.1;
    opt.t_end = 200.0;
    opt.window_lo = 3.0;
    opt.window_hi = 5.0;
    auto const tr = ql_system_run(prof.f(), bohm_gross_spectrum(ks, 1e-6), opt);
    double const s0 = tr.diag.front().max_slope, s1 = tr.diag.back().max_slope;
    double const dm = std::abs(tr.diag.back().mass - tr.diag.front().mass);
    double emax = 0.0;
    for (auto const& r : tr.diag) emax = std::max(emax, r.wave_energy);
    bool const ok = s0 > 0 && s1 <= 0.1 * s0 && dm <= 1e-12 && std::isfinite(emax);
    return {ok, "max slope " + g(s0) + " -> " + g(s1) + " (" + g(s1 / s0) + " of initial), mass drift " + g(dm) +
                    ", peak wave energy " + g(emax)};
}

// 11 --------------------------------------------------------------------------
Outcome landau()
{
    HomogenizationConfig c;
    // t_end = 1 keeps the second half in the damping phase (fast time <= 8.2); longer runs
    // sit at round-off where free-streaming recurrence echoes of the harmonics dominate
    c.vlasov.grid = PhaseGrid(32, 257, 8.0);
    c.vlasov.t_end = 1.0;
    c.epsilons = {0.5, 0.35};
    c.samples = 40;
    c.workers = workers();
    c.f0 = DistFn::from_function(c.vlasov.grid, [](double x, double v) { return (1 + 0.05 * std::cos(x)) * maxwell(v); });
    auto const rows = homogenization_experiment(c);
    bool const ok = !rows[0].aborted && !rows[1].aborted && rows[1].field_l2_avg < rows[0].field_l2_avg &&
                    rows[1].average_drift < rows[0].average_drift;
    return {ok, "second-half <||E||> " + g(rows[0].field_l2_avg) + " -> " + g(rows[1].field_l2_avg) + ", average drift " +
                    g(rows[0].average_drift) + " -> " + g(rows[1].average_drift) + " (eps 0.5 -> 0.35)"};
}

// 12 --------------------------------------------------------------------------
int quiet_cli(std::vector<std::string> const& args)
{
    std::ostringstream o, e;
    auto* so = std::cout.rdbuf(o.rdbuf());
    auto* se = std::cerr.rdbuf(e.rdbuf());
    int const code = cli::main(args);
    std::cout.rdbuf(so);
    std::cerr.rdbuf(se);
    return code;
}

Outcome reproducibility()
{
    std::string const ex = std::string(VLQ_SOURCE_DIR) + "/docs/examples/";
    std::size_t files = 0;
    bool ok = true;
    for (auto const& [cmd, cfg] : std::vector<std::pair<std::string, std::string>>{
             {"ensemble", "ensemble-small.cfg"}, {"field-sample", "field-sample.cfg"}, {"vlasov-run", "vlasov-landau.cfg"}}) {
        auto const dir = fs::temp_directory_path() / ("vlq-acceptance-" + cmd);
        fs::remove_all(dir);
        ok = ok && quiet_cli({cmd, "--config", ex + cfg, "--out-dir", dir.string(), "--workers", "2"}) == 0;
        ok = ok && quiet_cli({"rerun", "--manifest", (dir / "manifest.txt").string()}) == 0;
        for (auto const& e : fs::directory_iterator(dir)) {
            if (!e.is_regular_file() || e.path().filename() == "manifest.txt") continue;
            std::ifstream a(e.path(), std::ios::binary), b(dir / "rerun" / e.path().filename(), std::ios::binary);
            std::string const sa{std::istreambuf_iterator<char>(a), {}}, sb{std::istreambuf_iterator<char>(b), {}};
            ok = ok && !sa.empty() && sa == sb;
            ++files;
        }
        ok = ok && quiet_cli({"compare", dir.string(), (dir / "rerun").string()}) == 0;
    }
    return {ok && files > 0, std::to_string(files) + " output files byte-identical after manifest re-run (3 commands)"};
}

}  // namespace

int main(int argc, char** argv)
{
    std::vector<std::pair<char const*, std::function<Outcome()>>> const criteria{
        {"closed-form equivalence", closed_form},
        {"positivity suite", positivity},
        {"quasilinear limit rate", ql_limit},
        {"resonance-broadening fixed point", rbt},
        {"field hypotheses", field_hypotheses},
        {"dispersion roots", dispersion},
        {"solver conservation", conservation},
        {"free-flow homogenization", homogenization},
        {"diffusion-limit convergence", diffusion_limit},
        {"quasilinear plateau", ql_plateau},
        {"Landau damping trend", landau},
        {"reproducibility", reproducibility},
    };
    int failed = 0;
    std::vector<bool> run(criteria.size(), argc == 1);  // optional subset: acceptance 2 11
    for (int a = 1; a < argc; ++a) {
        auto const i = static_cast<std::size_t>(std::atoi(argv[a]));
        if (i >= 1 && i <= criteria.size()) run[i - 1] = true;
    }
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!run[i]) continue;
        auto const t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (std::exception const& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail << " ("
                  << fmt("%.1f", secs) << " s)" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
