#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "vlq/cli.hpp"
#include "vlq/diffmat.hpp"
#include "vlq/error.hpp"
#include "vlq/gridio.hpp"
#include "vlq/parallel.hpp"
#include "vlq/rng.hpp"
#include "vlq/qldiff.hpp"
#include "vlq/vlasov.hpp"

namespace fs = std::filesystem;

namespace vlq::cli {

namespace {

struct Context {
    std::string command;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    fs::path out_dir;
    Config cfg;                       // resolved configuration
    std::string config_path;
    std::vector<std::string> outputs;  // relative names, in write order

    std::string output(std::string const& name)
    {
        outputs.push_back(name);
        return (out_dir / name).string();
    }
};

std::string timestamp()
{
    auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(std::string const& path, std::string const& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << text;
}

void write_manifest(Context& ctx, int status)
{
    Config m;
    auto& s = m.append("manifest");
    s.set("command", ctx.command);
    s.set("version", std::string(version));
    s.set("timestamp", timestamp());
    s.set("status", static_cast<std::int64_t>(status));
    s.set("workers", static_cast<std::int64_t>(ctx.workers));
    if (ctx.seed) s.set_u64("seed", *ctx.seed);
    s.set("config", std::string("config.resolved"));
    if (!ctx.config_path.empty()) {
        auto& in = m.append("input");
        in.set("path", fs::absolute(ctx.config_path).string());
        in.set("digest", hex64(fnv1a_file(ctx.config_path)));
    }
    for (auto const& name : ctx.outputs) {
        auto const p = ctx.out_dir / name;
        if (!fs::exists(p)) continue;
        auto& o = m.append("output");
        o.set("name", name);
        o.set("digest", hex64(fnv1a_file(p.string())));
    }
    write_text((ctx.out_dir / "manifest.txt").string(), m.serialize());
}

// Applies the global seed to every seed-bearing key and returns the effective seed.
void apply_seed(Context& ctx)
{
    if (!ctx.seed) {
        if (auto const* e = ctx.cfg.find("ensemble"); e && e->has("master_seed")) ctx.seed = e->get_u64("master_seed", 0);
        else if (auto const* f = ctx.cfg.find("field"); f && f->has("seed")) ctx.seed = f->get_u64("seed", 0);
        else ctx.seed = 0;
    }
    if (auto* f = ctx.cfg.find("field"); f && (f->get_string("kind", "spectral") == "spectral" || f->get_string("kind", "") == "bump"))
        f->set_u64("seed", *ctx.seed);
    if (auto* e = ctx.cfg.find("ensemble")) e->set_u64("master_seed", *ctx.seed);
}

FieldPtr realize(AnyFieldSpec const& f, std::uint64_t seed, double tau_lo, double tau_hi)
{
    if (f.kind == "spectral") return sample_spectral(f.spectral, seed);
    if (f.kind == "bump") return sample_bump(f.bump, seed, bump_window_for(f.bump, tau_lo, tau_hi));
    if (f.kind == "wkb") return make_wkb(f.wkb);
    return zero_field();
}

double analytic_autocorr(AnyFieldSpec const& f, double t, double sigma, double xi)
{
    if (f.kind == "spectral") return spectral_autocorr(f.spectral, t, sigma, xi);
    if (f.kind == "bump") return bump_autocorr(f.bump, t, t, sigma, xi);
    if (f.kind == "zero") return 0.0;
    return NAN;
}

// ---- subcommands ----

int cmd_scaling(Context& ctx, std::ostream& out)
{
    auto const& s = ctx.cfg.require("scaling");
    s.require_known({"ratio", "wp_tauL", "tauac_over_tauL", "tauD_over_tauL", "omega_p", "v_th"});
    ScalingInput in;
    in.omega_p = s.get_double("omega_p", 1.0);
    in.v_th = s.get_double("v_th", 1.0);
    in.energy_ratio = s.get_double("ratio");
    in.tau_L = s.get_double("wp_tauL") / in.omega_p;
    in.tau_ac = s.get_double("tauac_over_tauL") * in.tau_L;
    in.tau_D = s.get_double("tauD_over_tauL") * in.tau_L;
    auto const r = derive_scaling(in);
    std::ostringstream os;
    os << "epsilon=" << format_double(r.epsilon) << "\n";
    os << "tau=" << (r.tau_infinite ? std::string("inf") : format_double(r.uptau)) << "\n";
    if (r.tau_infinite) os << "route=quasilinear_limit\n";
    os << "lambda_D=" << format_double(r.lambda_D) << "\n";
    os << "inv_wp_tauL=" << format_double(r.inv_wp_tauL) << "\n";
    os << "tauac_over_tauL=" << format_double(r.tauac_over_tauL) << "\n";
    for (auto const& w : r.warnings) std::cerr << "warning: " << w << "\n";
    out << os.str();
    if (!ctx.out_dir.empty()) write_text(ctx.output("scaling.txt"), os.str());
    return 0;
}

int cmd_field_sample(Context& ctx, std::ostream& out)
{
    auto const field = parse_field(ctx.cfg);
    ConfigSection const empty;
    auto const* sp = ctx.cfg.find("sample");
    auto const& s = sp ? *sp : empty;
    s.require_known({"n_samples", "t", "sigmas", "xis", "n_bases", "tau_span", "grid_ntau", "grid_nx", "grid_tau"});
    auto const n = static_cast<std::size_t>(s.get_int("n_samples", 200));
    double const t = s.get_double("t", 0.0);
    auto const sigmas = s.get_doubles("sigmas", {0.0});
    auto const xis = s.get_doubles("xis", {0.0});
    auto const nb = static_cast<std::size_t>(s.get_int("n_bases", 4));
    double const span = s.get_double("tau_span", 10.0);
    if (n == 0 || nb == 0) throw InvalidArgument(s.where() + ": n_samples and n_bases must be positive");
    std::vector<AutocorrLag> lags;
    for (double sg : sigmas)
        for (double xi : xis) lags.push_back({sg, xi});
    std::vector<AutocorrBase> bases;
    for (std::size_t b = 0; b < nb; ++b)
        bases.push_back({span * static_cast<double>(b) / static_cast<double>(nb), 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(nb)});
    double smax = 0.0, smin = 0.0;
    for (double sg : sigmas) {
        smax = std::max(smax, sg);
        smin = std::min(smin, sg);
    }
    double const tau_lo = -smax, tau_hi = span - smin;
    std::uint64_t const seed = *ctx.seed;
    auto const est = estimate_autocorr([&](std::size_t i) { return realize(field, rng::derive(seed, i), tau_lo, tau_hi); }, n, t,
                                       lags, bases, ctx.workers);
    {
        std::ofstream os(ctx.output("autocorr.csv"));
        os << "sigma,xi,value,stderr,analytic\n";
        for (std::size_t l = 0; l < lags.size(); ++l)
            os << format_double(lags[l].sigma) << ',' << format_double(lags[l].xi) << ',' << format_double(est.value[l]) << ','
               << format_double(est.std_error[l]) << ',' << format_double(analytic_autocorr(field, t, lags[l].sigma, lags[l].xi))
               << '\n';
    }
    {
        std::ofstream os(ctx.output("summary.csv"));
        os << "metric,value\n";
        os << "mean_field," << format_double(est.mean_field) << "\n";
        os << "mean_stderr," << format_double(est.mean_stderr) << "\n";
        os << "stationarity_z," << format_double(est.stationarity_z) << "\n";
        os << "n_samples," << est.n_samples << "\n";
    }
    {
        auto const ntau = static_cast<std::size_t>(s.get_int("grid_ntau", 64));
        auto const nx = static_cast<std::size_t>(s.get_int("grid_nx", 64));
        double const gt = s.get_double("grid_tau", span);
        auto const f = realize(field, rng::derive(seed, 0), 0.0, gt);
        std::ofstream os(ctx.output("realization.csv"));
        os << "tau,x,E\n";
        std::vector<double> row(nx);
        double const dx = 2.0 * std::numbers::pi / static_cast<double>(nx);
        for (std::size_t q = 0; q < ntau; ++q) {
            double const tau = gt * static_cast<double>(q) / static_cast<double>(std::max<std::size_t>(1, ntau - 1));
            f->eval_grid(t, tau, 0.0, dx, row);
            for (std::size_t i = 0; i < nx; ++i)
                os << format_double(tau) << ',' << format_double(static_cast<double>(i) * dx) << ',' << format_double(row[i]) << '\n';
        }
    }
    out << "mean_field=" << format_double(est.mean_field) << " stderr=" << format_double(est.mean_stderr) << "\n";
    return 0;
}

int cmd_diffmat(Context& ctx, std::ostream& out)
{
    auto const field = parse_field(ctx.cfg);
    auto const& s = ctx.cfg.require("diffmat");
    s.require_known({"method", "nv", "vmax", "t", "eta", "n_half", "n_x", "tol", "reg", "reg_width", "rbt_tol", "max_iter",
                     "damping", "quad_tol"});
    std::string const method = s.get_string("method", "sinc2");
    VelocityGrid const g(static_cast<std::size_t>(s.get_int("nv", 257)), s.get_double("vmax", 8.0));
    auto const nodes = g.nodes();
    double const t = s.get_double("t", 0.0);
    if (field.kind != "spectral" && method != "quadrature")
        throw InvalidArgument(s.where(s.find("method")) + ": method '" + method + "' needs a spectral field");
    DiffusionMatrix D;
    int status = 0;
    if (method == "sinc2") {
        if (field.spectral.autocorr != AutocorrKind::triangular)
            throw InvalidArgument(s.where(s.find("method")) + ": sinc2 closed form needs the triangular autocorrelation");
        D = dtau_sinc2(field.spectral.modes, field.spectral.tau, s.get_double("eta", 0.0), t, nodes);
    } else if (method == "quadrature") {
        auto const n_half = static_cast<std::size_t>(s.get_int("n_half", 256));
        auto const n_x = static_cast<std::size_t>(s.get_int("n_x", 64));
        AutocorrTensor R;
        if (field.kind == "spectral") R = tabulate_spectral_autocorr(field.spectral, t, n_half, n_x);
        else if (field.kind == "bump")
            R = tabulate_autocorr([&](double sg, double xi) { return bump_autocorr(field.bump, t, t, sg, xi); }, field.bump.tau(), t,
                                  n_half, n_x, 1, "bump");
        else
            throw InvalidArgument("diffmat: quadrature needs a spectral or bump field");
        D = dtau_quadrature(R, nodes, s.get_double("tol", 1e-9));
        auto const rep = check_prop_dprop(D, R);
        std::ofstream os(ctx.output("propcheck.csv"));
        os << "check,pass,worst,where\n";
        for (auto const& it : rep.items)
            os << it.name << ',' << (it.pass ? 1 : 0) << ',' << format_double(it.worst) << ',' << it.where << '\n';
    } else if (method == "ql") {
        Regularization reg;
        std::string const rk = s.get_string("reg", "lorentzian");
        if (rk == "lorentzian") reg.kind = Regularization::Kind::lorentzian;
        else if (rk == "sinc2") reg.kind = Regularization::Kind::sinc2;
        else throw InvalidArgument(s.where(s.find("reg")) + ": unknown regularization '" + rk + "'");
        reg.width = s.get_double("reg_width", 0.0);
        D = dql_limit(field.spectral.modes, reg, t, nodes);
    } else if (method == "rbt") {
        RbtOptions o;
        o.tol = s.get_double("rbt_tol", o.tol);
        o.max_iter = static_cast<int>(s.get_int("max_iter", o.max_iter));
        o.damping = s.get_double("damping", o.damping);
        o.quad_tol = s.get_double("quad_tol", o.quad_tol);
        D = drbt_fixed_point(field.spectral.modes, t, nodes, o);
        std::ofstream os(ctx.output("residual.csv"));
        os << "v,residual\n";
        for (std::size_t j = 0; j < nodes.size(); ++j)
            os << format_double(nodes[j]) << ',' << format_double(j < D.residual.size() ? D.residual[j] : NAN) << '\n';
        os << "# iterations=" << D.iterations << " final_residual=" << format_double(D.final_residual)
           << " converged=" << (D.converged ? 1 : 0) << " psd_projections=" << D.psd_projections
           << " start_sensitivity=" << format_double(D.start_sensitivity) << '\n';
        if (!D.converged) {
            std::cerr << "error: resonance-broadening iteration did not converge (residual "
                      << format_double(D.final_residual) << " after " << D.iterations << " iterations)\n";
            status = 2;
        }
    } else {
        throw InvalidArgument(s.where(s.find("method")) + ": unknown method '" + method + "'");
    }
    write_csv(D, ctx.output("diffmat.csv"));
    out << "method=" << method << " sup=" << format_double(D.sup_norm) << " min_eig=" << format_double(D.min_eigenvalue) << "\n";
    return status;
}

int cmd_dispersion(Context& ctx, std::ostream& out)
{
    auto const& s = ctx.cfg.require("dispersion");
    s.require_known({"k", "nv", "vmax", "omega_p", "tol", "max_iter"});
    VelocityGrid const g(static_cast<std::size_t>(s.get_int("nv", 801)), s.get_double("vmax", 12.0));
    auto const* ps = ctx.cfg.find("profile");
    if (ps) ps->require_known({"profile", "v_th", "drift", "n_b", "v_b", "v_tb"});
    auto const prof = parse_profile(ps, g);
    RootOptions o;
    o.omega_p = s.get_double("omega_p", 1.0);
    o.tol = s.get_double("tol", o.tol);
    o.max_iter = static_cast<int>(s.get_int("max_iter", o.max_iter));
    auto const ks = s.get_doubles("k");
    std::ofstream os(ctx.output("roots.csv"));
    os << "k,omega,gamma,residual,iterations,unphysical,bohm_gross,ql_gamma\n";
    for (double k : ks) {
        auto const r = solve_root(prof, k, o);
        double qlg = NAN;
        try {
            qlg = ql_growth_rate(prof, k, r.omega, o.omega_p);
        } catch (InvalidArgument const&) {
        }
        os << format_double(k) << ',' << format_double(r.omega) << ',' << format_double(r.gamma) << ','
           << format_double(r.residual) << ',' << r.iterations << ',' << (r.unphysical ? 1 : 0) << ','
           << format_double((k > 0 ? 1.0 : -1.0) * bohm_gross(k, prof.bulk_v_th(), o.omega_p)) << ',' << format_double(qlg) << '\n';
        out << "k=" << format_double(k) << " omega=" << format_double(r.omega) << " gamma=" << format_double(r.gamma) << "\n";
    }
    auto const pen = penrose_check(prof);
    std::ofstream ps2(ctx.output("penrose.csv"));
    ps2 << "v,P,unstable\n";
    for (auto const& m : pen.minima) ps2 << format_double(m.v) << ',' << format_double(m.value) << ',' << (pen.unstable ? 1 : 0) << '\n';
    return 0;
}

RunSchedule parse_schedule(ConfigSection const& s, double t_end)
{
    RunSchedule r;
    r.snapshot_times = s.get_doubles("snapshot_times", {0.0, t_end});
    r.diag_every = static_cast<int>(s.get_int("diag_every", 0));
    return r;
}

int cmd_vlasov_run(Context& ctx, std::ostream& out)
{
    auto const grid = parse_grid(ctx.cfg.require("grid"));
    auto const f0 = parse_initial(ctx.cfg, grid);
    auto const field = parse_field(ctx.cfg);
    auto const& s = ctx.cfg.require("vlasov");
    s.require_known({"epsilon", "dt", "t_end", "splitting", "self_consistent", "snapshot_times", "diag_every", "c_cfl",
                     "cfl_report", "tol_energy", "neutrality_tol", "field_bound"});
    VlasovConfig c;
    c.grid = grid;
    c.epsilon = s.get_double("epsilon", 1.0);
    c.dt = s.get_double("dt", 0.0);
    c.t_end = s.get_double("t_end");
    std::string const split = s.get_string("splitting", "strang");
    if (split != "strang" && split != "lie") throw InvalidArgument(s.where(s.find("splitting")) + ": unknown splitting '" + split + "'");
    c.splitting = split == "strang" ? Splitting::strang : Splitting::lie;
    c.self_consistent = s.get_bool("self_consistent", false);
    c.c_cfl = s.get_double("c_cfl", c.c_cfl);
    c.cfl_report = s.get_bool("cfl_report", false);
    c.tol_energy = s.get_double("tol_energy", c.tol_energy);
    c.neutrality_tol = s.get_double("neutrality_tol", c.neutrality_tol);
    c.field_bound = s.get_double("field_bound", 0.0);
    if (!c.self_consistent) c.field = realize(field, *ctx.seed, 0.0, c.t_end / (c.epsilon * c.epsilon));
    VlasovSolver solver(c);
    auto const tr = solver.run(f0, parse_schedule(s, c.t_end));
    write_diag_csv(tr.diag, ctx.output("diag.csv"));
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        write_f64grid(ctx.output("f_t" + std::to_string(i) + ".f64grid"), tr.snapshots[i]);
        if (i < tr.fields.size()) write_field_csv(tr.fields[i], grid, ctx.output("field_t" + std::to_string(i) + ".csv"));
        if (i < tr.averages.size()) write_csv(tr.averages[i], ctx.output("average_t" + std::to_string(i) + ".csv"));
    }
    if (c.cfl_report || !tr.cfl_ok)
        std::cerr << (tr.cfl_ok ? "cfl: " : "warning: cfl bound exceeded: ") << "dt=" << format_double(tr.dt) << "\n";
    out << "steps=" << tr.steps << " dt=" << format_double(tr.dt) << " mass=" << format_double(tr.diag.back().mass) << "\n";
    if (tr.aborted) {
        std::cerr << "error: " << tr.abort_reason << "\n";
        return 2;
    }
    if (tr.energy_violation) {
        std::cerr << "error: total energy rose by " << format_double(tr.max_energy_excess) << " (relative)\n";
        return 2;
    }
    return 0;
}

int cmd_ql_run(Context& ctx, std::ostream& out)
{
    auto const& s = ctx.cfg.require("ql");
    s.require_known({"nv", "vmax", "k_min", "k_max", "n_modes", "energy", "mode", "dt", "t_end", "reg", "reg_width", "window_lo",
                     "window_hi", "snapshot_every", "scheme", "v_th", "omega_p", "energy_cap"});
    VelocityGrid const g(static_cast<std::size_t>(s.get_int("nv", 401)), s.get_double("vmax", 8.0));
    auto const* ps = ctx.cfg.find("initial");
    if (ps) ps->require_known({"profile", "v_th", "drift", "n_b", "v_b", "v_tb"});
    auto const prof = parse_profile(ps, g);
    auto const nm = s.get_int("n_modes", 64);
    if (nm < 1) throw InvalidArgument(s.where() + ": n_modes must be >= 1");
    double const k0 = s.get_double("k_min", 0.2), k1 = s.get_double("k_max", 0.4);
    std::vector<double> ks;
    for (std::int64_t i = 0; i < nm; ++i) ks.push_back(nm == 1 ? k0 : k0 + (k1 - k0) * static_cast<double>(i) / static_cast<double>(nm - 1));
    QlOptions o;
    o.v_th = s.get_double("v_th", 1.0);
    o.omega_p = s.get_double("omega_p", 1.0);
    auto const spec = bohm_gross_spectrum(ks, s.get_double("energy", 1e-6), o.v_th, o.omega_p);
    std::string const mode = s.get_string("mode", "frozen");
    if (mode != "frozen" && mode != "live") throw InvalidArgument(s.where(s.find("mode")) + ": mode must be frozen or live");
    o.mode = mode == "frozen" ? DispersionMode::frozen : DispersionMode::live;
    o.dt = s.get_double("dt", o.dt);
    o.t_end = s.get_double("t_end", 200.0);
    std::string const rk = s.get_string("reg", "lorentzian");
    if (rk == "lorentzian") o.reg.kind = Regularization::Kind::lorentzian;
    else if (rk == "sinc2") o.reg.kind = Regularization::Kind::sinc2;
    else throw InvalidArgument(s.where(s.find("reg")) + ": unknown regularization '" + rk + "'");
    o.reg.width = s.get_double("reg_width", 0.0);
    o.window_lo = s.get_double("window_lo", 0.0);
    o.window_hi = s.get_double("window_hi", 0.0);
    o.snapshot_every = static_cast<int>(s.get_int("snapshot_every", 0));
    o.scheme = scheme_from_string(s.get_string("scheme", "crank_nicolson"));
    o.energy_cap = s.get_double("energy_cap", o.energy_cap);
    auto const tr = ql_system_run(prof.f(), spec, o);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) write_csv(tr.snapshots[i], ctx.output("f_" + std::to_string(i) + ".csv"));
    write_spectrum_csv(tr.spectrum, ctx.output("spectrum.csv"));
    write_ql_diag_csv(tr.diag, ctx.output("plateau.csv"));
    auto const& a = tr.diag.front();
    auto const& b = tr.diag.back();
    out << "max_slope " << format_double(a.max_slope) << " -> " << format_double(b.max_slope) << " mass drift "
        << format_double(b.mass - a.mass) << "\n";
    return 0;
}

int cmd_ensemble(Context& ctx, std::ostream& out)
{
    auto const grid = parse_grid(ctx.cfg.require("grid"));
    auto const f0 = parse_initial(ctx.cfg, grid);
    auto const& e = ctx.cfg.require("ensemble");
    e.require_known({"mode", "n_realizations", "epsilons", "master_seed", "compare_times", "reference_dt", "initial_perturbation",
                     "hermite_m_max", "cfl_fraction", "samples", "reference_scheme"});
    auto const& v = ctx.cfg.require("vlasov");
    v.require_known({"t_end", "dt", "splitting"});
    VlasovConfig vc;
    vc.grid = grid;
    vc.t_end = v.get_double("t_end");
    vc.dt = v.get_double("dt", 0.0);
    std::string const split = v.get_string("splitting", "strang");
    if (split != "strang" && split != "lie") throw InvalidArgument(v.where(v.find("splitting")) + ": unknown splitting '" + split + "'");
    vc.splitting = split == "strang" ? Splitting::strang : Splitting::lie;
    std::string const mode = e.get_string("mode", "diffusion");
    if (mode == "homogenization") {
        HomogenizationConfig h;
        h.vlasov = vc;
        h.f0 = f0;
        h.epsilons = e.get_doubles("epsilons", h.epsilons);
        h.samples = static_cast<std::size_t>(e.get_int("samples", 40));
        h.cfl_fraction = e.get_double("cfl_fraction", h.cfl_fraction);
        h.workers = ctx.workers;
        auto const rows = homogenization_experiment(h);
        write_homogenization_csv(rows, ctx.output("homogenization.csv"));
        int status = 0;
        for (auto const& r : rows) {
            out << "eps=" << format_double(r.epsilon) << " phase_weak=" << format_double(r.phase_weak)
                << " field_l2_avg=" << format_double(r.field_l2_avg) << " drift=" << format_double(r.average_drift) << "\n";
            if (r.aborted) status = 2;
        }
        return status;
    }
    if (mode != "diffusion") throw InvalidArgument(e.where(e.find("mode")) + ": mode must be diffusion or homogenization");
    EnsembleConfig c;
    c.field = to_ensemble_spec(parse_field(ctx.cfg));
    c.vlasov = vc;
    c.f0 = f0;
    c.n_realizations = static_cast<std::size_t>(e.get_int("n_realizations", 16));
    c.epsilons = e.get_doubles("epsilons", c.epsilons);
    c.master_seed = *ctx.seed;
    c.compare_times = e.get_doubles("compare_times", {vc.t_end});
    c.reference_dt = e.get_double("reference_dt", c.reference_dt);
    c.reference_scheme = scheme_from_string(e.get_string("reference_scheme", "crank_nicolson"));
    c.initial_perturbation = e.get_double("initial_perturbation", 0.0);
    c.hermite_m_max = static_cast<int>(e.get_int("hermite_m_max", 8));
    c.cfl_fraction = e.get_double("cfl_fraction", c.cfl_fraction);
    c.workers = ctx.workers;
    auto const rep = run_ensemble(c);
    write_report_csv(rep, ctx.output("report.csv"));
    for (std::size_t ie = 0; ie < rep.epsilons.size(); ++ie)
        for (std::size_t it = 0; it < rep.times.size(); ++it) {
            auto const& p = rep.at(ie, it);
            std::ofstream os(ctx.output("mean_e" + std::to_string(ie) + "_t" + std::to_string(it) + ".csv"));
            os << "v,mean,stderr,reference\n";
            for (std::size_t j = 0; j < p.mean.values.size(); ++j)
                os << format_double(grid.v(j)) << ',' << format_double(p.mean.values[j]) << ',' << format_double(p.std_error[j]) << ','
                   << format_double(p.reference.values[j]) << '\n';
        }
    write_sweep_csv(epsilon_sweep_report(rep), ctx.output("sweep.csv"));
    {
        std::ofstream os(ctx.output("log.txt"));
        os << "reference_method=" << rep.reference_method << "\n";
        os << "reference_cross_check=" << format_double(rep.reference_cross_check) << "\n";
        for (std::size_t ie = 0; ie < rep.epsilons.size(); ++ie)
            os << "eps=" << format_double(rep.epsilons[ie]) << " used=" << rep.used[ie] << " dropped=" << rep.dropped[ie]
               << " dt=" << format_double(rep.dt[ie]) << " seed_rule=derive(master,eps_index,realization)\n";
        for (auto const& l : rep.log) os << l << "\n";
        if (rep.drop_flag) os << "warning: more than 5% of realizations dropped\n";
    }
    for (auto const& p : rep.points)
        out << "eps=" << format_double(p.epsilon) << " t=" << format_double(p.t) << " weak=" << format_double(p.weak)
            << " se=" << format_double(p.weak_se) << (p.noise_limited ? " noise-limited" : "") << "\n";
    if (rep.drop_flag) std::cerr << "warning: more than 5% of realizations dropped\n";
    return 0;
}

int cmd_compare(std::string const& a, std::string const& b, std::ostream& out)
{
    if (fs::is_directory(a) && fs::is_directory(b)) {
        std::vector<std::string> names;
        for (auto const& dir : {a, b})
            for (auto const& e : fs::directory_iterator(dir))
                if (e.is_regular_file() && e.path().filename() != "manifest.txt") names.push_back(e.path().filename().string());
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        int differing = 0;
        for (auto const& n : names) {
            auto const pa = fs::path(a) / n, pb = fs::path(b) / n;
            if (!fs::exists(pa) || !fs::exists(pb)) {
                out << "missing " << n << "\n";
                ++differing;
            } else if (fnv1a_file(pa.string()) != fnv1a_file(pb.string()) || fs::file_size(pa) != fs::file_size(pb)) {
                out << "differs " << n << "\n";
                ++differing;
            }
        }
        out << (differing == 0 ? "identical" : "different") << " (" << names.size() << " files)\n";
        return differing == 0 ? 0 : 2;
    }
    auto read_profile = [](std::string const& path) {
        std::ifstream is(path);
        if (!is) throw InvalidArgument("cannot read '" + path + "'");
        std::string line;
        std::getline(is, line);
        std::vector<double> v, f;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto const c1 = line.find(',');
            auto const c2 = line.find(',', c1 + 1);
            auto const x = parse_double(line.substr(0, c1));
            auto const y = parse_double(line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
            if (!x || !y) throw InvalidArgument(path + ": malformed line '" + line + "'");
            v.push_back(*x);
            f.push_back(*y);
        }
        if (v.size() < 4) throw InvalidArgument(path + ": need at least 4 rows");
        VelocityFn g(VelocityGrid(v.size(), v.back()));
        g.values = f;
        return g;
    };
    auto const ga = read_profile(a), gb = read_profile(b);
    if (!(ga.grid == gb.grid)) throw InvalidArgument("compare: velocity grids differ");
    auto const tests = hermite_test_set(ga.grid);
    VelocityFn d = ga;
    for (std::size_t j = 0; j < d.values.size(); ++j) d.values[j] -= gb.values[j];
    out << "weak=" << format_double(weak_distance(ga, gb, tests)) << " l1=" << format_double(lp_norm(d, 1.0))
        << " l2=" << format_double(lp_norm(d, 2.0)) << "\n";
    return 0;
}

int run_command(Context& ctx, std::ostream& out)
{
    if (ctx.command == "scaling") return cmd_scaling(ctx, out);
    if (ctx.command == "field-sample") return cmd_field_sample(ctx, out);
    if (ctx.command == "diffmat") return cmd_diffmat(ctx, out);
    if (ctx.command == "dispersion") return cmd_dispersion(ctx, out);
    if (ctx.command == "vlasov-run") return cmd_vlasov_run(ctx, out);
    if (ctx.command == "ql-run") return cmd_ql_run(ctx, out);
    if (ctx.command == "ensemble") return cmd_ensemble(ctx, out);
    throw InvalidArgument("unknown subcommand '" + ctx.command + "'");
}

// Runs a configured command into ctx.out_dir, writing config.resolved and the manifest.
int execute(Context& ctx, std::ostream& out)
{
    apply_seed(ctx);
    bool const writes = !ctx.out_dir.empty();
    if (writes) {
        fs::create_directories(ctx.out_dir);
        write_text(ctx.output("config.resolved"), ctx.cfg.serialize());
    }
    int status = 0;
    try {
        status = run_command(ctx, out);
    } catch (NumericalError const& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        status = 2;
    }
    if (writes) write_manifest(ctx, status);
    return status;
}

int resolve_workers(int flag)
{
    if (flag > 0) return flag;
    return default_workers();
}

}  // namespace

int main(std::vector<std::string> const& args)
{
    CLI::App app{"Weak-turbulence kinetic simulation and verification suite", "vlq"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed;
    int workers = 0;
    std::string out_dir;
    app.add_option("--seed", seed, "master seed (overrides config seeds)");
    app.add_option("--workers", workers, "worker threads (default: VLQ_WORKERS or hardware)");
    app.add_option("--out-dir", out_dir, "output directory");
    app.set_version_flag("--version", std::string(version));

    std::string config_path;
    std::vector<std::pair<std::string, CLI::App*>> configured;
    for (char const* name : {"field-sample", "diffmat", "dispersion", "vlasov-run", "ql-run", "ensemble"}) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sc->fallthrough();
        configured.emplace_back(name, sc);
    }
    auto* scaling = app.add_subcommand("scaling", "derive epsilon and tau from physical time scales");
    double ratio = NAN, wp_tauL = NAN, tauac = NAN, omega_p = 1.0, v_th = 1.0;
    std::string tauD = "";
    scaling->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    scaling->add_option("--ratio", ratio, "electric/kinetic energy ratio");
    scaling->add_option("--wp-tauL", wp_tauL, "omega_p * slow time");
    scaling->add_option("--tauac-over-tauL", tauac, "wave autocorrelation time / slow time");
    scaling->add_option("--tauD-over-tauL", tauD, "particle decorrelation time / slow time (inf allowed)");
    scaling->add_option("--wp", omega_p, "plasma frequency");
    scaling->add_option("--vth", v_th, "thermal velocity");
    scaling->fallthrough();
    auto* compare = app.add_subcommand("compare", "compare two output directories or two v,f profiles");
    std::string ca, cb;
    compare->add_option("a", ca)->required();
    compare->add_option("b", cb)->required();
    compare->fallthrough();
    auto* rerun = app.add_subcommand("rerun", "re-run from a manifest");
    std::string manifest;
    rerun->add_option("--manifest", manifest, "manifest.txt of a previous run")->required()->check(CLI::ExistingFile);
    rerun->fallthrough();

    std::vector<char const*> argv;
    argv.push_back("vlq");
    for (auto const& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForVersion const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        std::cerr << app.help();
        return 1;
    }

    try {
        Context ctx;
        ctx.seed = seed;
        ctx.out_dir = out_dir;
        if (compare->parsed()) return cmd_compare(ca, cb, std::cout);
        if (rerun->parsed()) {
            auto const m = Config::load(manifest);
            auto const& ms = m.require("manifest");
            ctx.command = ms.get_string("command");
            fs::path const dir = fs::path(manifest).parent_path();
            ctx.config_path = (dir / ms.get_string("config", "config.resolved")).string();
            ctx.cfg = Config::load(ctx.config_path);
            if (!seed && ms.has("seed")) ctx.seed = ms.get_u64("seed", 0);
            ctx.workers = workers > 0 ? workers : static_cast<int>(ms.get_int("workers", 1));
            if (out_dir.empty()) ctx.out_dir = dir / "rerun";
            return execute(ctx, std::cout);
        }
        ctx.workers = resolve_workers(workers);
        if (scaling->parsed()) {
            ctx.command = "scaling";
            if (!config_path.empty()) {
                ctx.cfg = Config::load(config_path);
                ctx.config_path = config_path;
            }
            auto& s = ctx.cfg.section("scaling");
            if (!std::isnan(ratio)) s.set("ratio", ratio);
            if (!std::isnan(wp_tauL)) s.set("wp_tauL", wp_tauL);
            if (!std::isnan(tauac)) s.set("tauac_over_tauL", tauac);
            if (!tauD.empty()) s.set("tauD_over_tauL", tauD);
            if (!s.has("omega_p") || omega_p != 1.0) s.set("omega_p", omega_p);
            if (!s.has("v_th") || v_th != 1.0) s.set("v_th", v_th);
            return execute(ctx, std::cout);
        }
        for (auto const& [name, sc] : configured)
            if (sc->parsed()) {
                ctx.command = name;
                ctx.config_path = config_path;
                ctx.cfg = Config::load(config_path);
                if (out_dir.empty()) ctx.out_dir = "vlq-out";
                return execute(ctx, std::cout);
            }
        std::cerr << app.help();
        return 1;
    } catch (InvalidArgument const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (NumericalError const& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int main(int argc, char const* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return main(args);
}

}  // namespace vlq::cli
