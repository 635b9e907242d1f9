#include "vlq/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "vlq/config.hpp"
#include "vlq/diffmat.hpp"
#include "vlq/error.hpp"
#include "vlq/parallel.hpp"
#include "vlq/rng.hpp"

namespace vlq {

namespace {

constexpr std::size_t kQuadHalf = 512;

DistFn default_initial(PhaseGrid const& g)
{
    return DistFn::from_function(g, [](double, double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi); });
}

std::size_t x_points_for(SpectralFieldSpec const& spec)
{
    double kmax = 0.0;
    for (auto const& m : spec.modes) kmax = std::max(kmax, std::abs(m.k));
    auto n = static_cast<std::size_t>(2.0 * kmax) + 4;
    return n + (n % 2);
}

double field_bound(FieldSpec const& spec, double t_end, double tau_end)
{
    if (auto const* s = std::get_if<SpectralFieldSpec>(&spec)) return spectral_field_bound(*s, t_end);
    // bump: sample one realization densely
    auto const& b = std::get<BumpFieldSpec>(spec);
    auto const f = sample_field(spec, b.seed, tau_end);
    double m = 0.0;
    std::vector<double> row(128);
    double const dx = 2.0 * std::numbers::pi / 128.0;
    std::size_t const nt = 512;
    for (std::size_t q = 0; q <= nt; ++q) {
        double const tau = tau_end * static_cast<double>(q) / static_cast<double>(nt);
        double const t = t_end * static_cast<double>(q) / static_cast<double>(nt);
        f->eval_grid(t, tau, 0.0, dx, row);
        for (double e : row) m = std::max(m, std::abs(e));
    }
    return 1.25 * m;
}

}  // namespace

void validate(EnsembleConfig const& cfg)
{
    std::visit([](auto const& s) { validate(s); }, cfg.field);
    if (auto const* s = std::get_if<SpectralFieldSpec>(&cfg.field); s && s->autocorr != AutocorrKind::triangular)
        throw InvalidArgument("ensemble: only the triangular spectral autocorrelation can be sampled");
    if (cfg.n_realizations == 0) throw InvalidArgument("ensemble: n_realizations must be positive");
    if (cfg.epsilons.empty()) throw InvalidArgument("ensemble: no epsilon values");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        double const e = cfg.epsilons[i];
        if (!(e > 0.0 && e < 1.0)) throw InvalidArgument("ensemble: epsilon " + format_double(e) + " outside (0, 1)");
        if (i > 0 && !(e < cfg.epsilons[i - 1])) throw InvalidArgument("ensemble: epsilons must be distinct and descending");
    }
    if (cfg.compare_times.empty()) throw InvalidArgument("ensemble: no compare times");
    for (double t : cfg.compare_times)
        if (t < 0.0 || t > cfg.vlasov.t_end)
            throw InvalidArgument("ensemble: compare time " + format_double(t) + " outside [0, t_end]");
    if (cfg.vlasov.self_consistent) throw InvalidArgument("ensemble: the field is prescribed, self_consistent must be off");
    if (!cfg.f0.values.empty() && !(cfg.f0.grid == cfg.vlasov.grid))
        throw InvalidArgument("ensemble: f0 grid differs from the solver grid");
    if (!(cfg.reference_dt > 0.0)) throw InvalidArgument("ensemble: reference_dt must be > 0");
    if (cfg.workers < 1) throw InvalidArgument("ensemble: workers must be >= 1");
}

std::uint64_t realization_seed(std::uint64_t master, std::size_t eps_index, std::size_t realization)
{
    return rng::derive(master, eps_index, realization);
}

FieldPtr sample_field(FieldSpec const& spec, std::uint64_t seed, double tau_end)
{
    if (auto const* s = std::get_if<SpectralFieldSpec>(&spec)) return sample_spectral(*s, seed);
    auto const& b = std::get<BumpFieldSpec>(spec);
    return sample_bump(b, seed, bump_window_for(b, 0.0, tau_end));
}

double spectral_field_bound(SpectralFieldSpec const& spec, double t_end)
{
    double s = 0.0;
    for (auto const& m : spec.positive_modes())
        s += 2.0 * std::sqrt(std::max(m.energy_at(0.0), m.energy_at(t_end)));
    return s;
}

std::vector<double> limit_diffusion(FieldSpec const& spec, double t, std::vector<double> const& v_nodes)
{
    if (auto const* s = std::get_if<SpectralFieldSpec>(&spec)) {
        if (s->autocorr == AutocorrKind::triangular) return dtau_sinc2(s->modes, s->tau, 0.0, t, v_nodes).scalar();
        auto const R = tabulate_spectral_autocorr(*s, t, kQuadHalf, x_points_for(*s));
        return dtau_quadrature(R, v_nodes, 1e-8).scalar();
    }
    auto b = std::get<BumpFieldSpec>(spec);
    double ft = 1.0;
    if (b.w_t > 0.0) {
        ft = bump_profile(t / b.w_t);
        ft *= ft;
        b.w_t = 0.0;
    }
    if (ft == 0.0 || b.amp_dist == AmpDist::zero) return std::vector<double>(v_nodes.size(), 0.0);
    auto const R = tabulate_autocorr([&](double sg, double xi) { return bump_autocorr(b, 0.0, 0.0, sg, xi); }, b.tau(),
                                     t, 256, 64, 1, "bump");
    auto D = dtau_quadrature(R, v_nodes, 1e-8).scalar();
    for (double& d : D) d *= ft;
    return D;
}

ReferenceDiffusion reference_diffusion(FieldSpec const& spec, VelocityFn const& g0, std::vector<double> const& times,
                                       double dt, Scheme scheme)
{
    ReferenceDiffusion ref;
    auto const nodes = g0.grid.nodes();
    ref.D0 = limit_diffusion(spec, 0.0, nodes);
    bool time_dependent = false;
    if (auto const* s = std::get_if<SpectralFieldSpec>(&spec)) {
        ref.method = s->autocorr == AutocorrKind::triangular ? "sinc2" : "quadrature";
        for (auto const& m : s->modes) time_dependent = time_dependent || m.growth != 0.0;
        if (s->autocorr == AutocorrKind::triangular) {
            auto const R = tabulate_spectral_autocorr(*s, 0.0, kQuadHalf, x_points_for(*s));
            auto const Dq = dtau_quadrature(R, nodes, 1e-8).scalar();
            for (std::size_t j = 0; j < nodes.size(); ++j)
                ref.cross_check = std::max(ref.cross_check, std::abs(Dq[j] - ref.D0[j]));
        }
    } else {
        ref.method = "quadrature";
        time_dependent = std::get<BumpFieldSpec>(spec).w_t > 0.0;
    }
    DiffusionRun run;
    run.f = g0;
    run.dt = dt;
    run.scheme = scheme;
    run.t_end = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    if (!time_dependent) {
        run.D = static_diffusion(ref.D0);
    } else if (auto const* s = std::get_if<SpectralFieldSpec>(&spec)) {
        run.D = [spec, nodes](double t, VelocityFn const&) { return limit_diffusion(spec, t, nodes); };
        (void)s;
    } else {
        auto const& b = std::get<BumpFieldSpec>(spec);
        auto base = b;
        base.w_t = 0.0;
        auto const D1 = limit_diffusion(base, 0.0, nodes);
        double const w_t = b.w_t;
        run.D = [D1, w_t](double t, VelocityFn const&) {
            double ft = bump_profile(t / w_t);
            ft *= ft;
            auto D = D1;
            for (double& d : D) d *= ft;
            return D;
        };
    }
    ref.trajectory = run_diffusion(run, times);
    return ref;
}

EnsembleReport run_ensemble(EnsembleConfig const& cfg)
{
    validate(cfg);
    auto const& grid = cfg.vlasov.grid;
    DistFn const f0 = cfg.f0.values.empty() ? default_initial(grid) : cfg.f0;
    EnsembleReport rep;
    rep.epsilons = cfg.epsilons;
    rep.times = cfg.compare_times;
    std::sort(rep.times.begin(), rep.times.end());
    rep.times.erase(std::unique(rep.times.begin(), rep.times.end()), rep.times.end());
    std::size_t const nt = rep.times.size(), nv = grid.nv();

    auto const g0 = space_average(f0);
    auto const ref = reference_diffusion(cfg.field, g0, rep.times, cfg.reference_dt, cfg.reference_scheme);
    rep.reference_cross_check = ref.cross_check;
    rep.reference_method = ref.method;
    auto const tests = hermite_test_set(grid.vgrid, cfg.hermite_m_max);

    struct Outcome {
        std::vector<VelocityFn> averages;
        std::vector<double> loss;  // cumulative outflow at each compare time
        bool aborted = false;
        std::string reason;
    };

    for (std::size_t ie = 0; ie < cfg.epsilons.size(); ++ie) {
        double const eps = cfg.epsilons[ie];
        VlasovConfig vc = cfg.vlasov;
        vc.epsilon = eps;
        vc.self_consistent = false;
        double const tau_end = vc.t_end / (eps * eps);
        if (!(vc.dt > 0.0)) {
            double const eb = field_bound(cfg.field, vc.t_end, tau_end);
            vc.dt = cfl_dt(vc, eb, cfg.cfl_fraction);
            vc.field_bound = eb;
        }
        rep.dt.push_back(vc.dt);

        std::vector<Outcome> out(cfg.n_realizations);
        parallel_for(cfg.n_realizations, cfg.workers, [&](std::size_t r) {
            std::uint64_t const seed = realization_seed(cfg.master_seed, ie, r);
            VlasovConfig c = vc;
            c.field = sample_field(cfg.field, seed, tau_end);
            DistFn start = f0;
            if (cfg.initial_perturbation > 0.0) {
                double const phi = 2.0 * std::numbers::pi * rng::to_unit(rng::mix(seed, 0x1A17ULL));
                for (std::size_t j = 0; j < nv; ++j)
                    for (std::size_t i = 0; i < grid.nx; ++i)
                        start.at(i, j) *= 1.0 + cfg.initial_perturbation * std::cos(grid.x(i) + phi);
            }
            VlasovSolver solver(c);
            auto tr = solver.run(std::move(start), RunSchedule{rep.times, 0});
            Outcome& o = out[r];
            if (tr.aborted) {
                o.aborted = true;
                o.reason = tr.abort_reason;
                return;
            }
            o.averages = std::move(tr.averages);
            for (double t : rep.times) {
                auto const row = std::find_if(tr.diag.begin(), tr.diag.end(), [&](DiagRow const& d) { return d.t == t; });
                o.loss.push_back(row != tr.diag.end() ? row->boundary_loss : tr.diag.back().boundary_loss);
            }
        });

        std::size_t used = 0, dropped = 0;
        for (std::size_t r = 0; r < out.size(); ++r) {
            if (out[r].aborted) {
                ++dropped;
                rep.log.push_back("epsilon " + format_double(eps) + " realization " + std::to_string(r) +
                                  " dropped: " + out[r].reason);
            } else {
                ++used;
            }
        }
        rep.used.push_back(used);
        rep.dropped.push_back(dropped);
        if (static_cast<double>(dropped) > 0.05 * static_cast<double>(cfg.n_realizations)) rep.drop_flag = true;
        if (used == 0) throw NumericalError("ensemble: every realization aborted at epsilon " + format_double(eps));

        std::vector<double> loss_mean(nt, 0.0);
        for (auto const& o : out)
            if (!o.aborted)
                for (std::size_t it = 0; it < nt; ++it) loss_mean[it] += o.loss[it];
        for (double& l : loss_mean) l /= static_cast<double>(used);

        for (std::size_t it = 0; it < nt; ++it) {
            EnsemblePoint p;
            p.epsilon = eps;
            p.t = rep.times[it];
            p.mean = VelocityFn(grid.vgrid, p.t);
            p.std_error.assign(nv, 0.0);
            // ordered two-pass mean / variance over realizations
            for (auto const& o : out)
                if (!o.aborted)
                    for (std::size_t j = 0; j < nv; ++j) p.mean.values[j] += o.averages[it].values[j];
            for (double& x : p.mean.values) x /= static_cast<double>(used);
            std::vector<double> comp_mean(tests.psi.size(), 0.0), comp_var(tests.psi.size(), 0.0);
            std::vector<std::vector<double>> comps;
            for (auto const& o : out) {
                if (o.aborted) continue;
                for (std::size_t j = 0; j < nv; ++j) {
                    double const d = o.averages[it].values[j] - p.mean.values[j];
                    p.std_error[j] += d * d;
                }
                comps.push_back(weak_components(o.averages[it], ref.trajectory.snapshots[it], tests));
            }
            for (auto const& c : comps)
                for (std::size_t m = 0; m < c.size(); ++m) comp_mean[m] += c[m];
            for (double& c : comp_mean) c /= static_cast<double>(used);
            for (auto const& c : comps)
                for (std::size_t m = 0; m < c.size(); ++m) comp_var[m] += (c[m] - comp_mean[m]) * (c[m] - comp_mean[m]);
            double const denom = used > 1 ? static_cast<double>(used) * static_cast<double>(used - 1) : 1.0;
            for (double& s : p.std_error) s = used > 1 ? std::sqrt(s / denom) : 0.0;

            p.reference = ref.trajectory.snapshots[it];
            auto const wc = weak_components(p.mean, p.reference, tests);
            std::size_t arg = 0;
            for (std::size_t m = 0; m < wc.size(); ++m)
                if (std::abs(wc[m]) > std::abs(wc[arg])) arg = m;
            p.weak = std::abs(wc[arg]);
            p.weak_se = used > 1 ? std::sqrt(comp_var[arg] / denom) : 0.0;
            VelocityFn diff = p.mean;
            for (std::size_t j = 0; j < nv; ++j) diff.values[j] -= p.reference.values[j];
            p.l1 = lp_norm(diff, 1.0);
            p.l2 = lp_norm(diff, 2.0);
            p.noise_limited = p.weak < 2.0 * p.weak_se;
            p.mass = velocity_moment(p.mean, 0);
            p.boundary_loss = loss_mean[it];
            rep.points.push_back(std::move(p));
        }
    }
    return rep;
}

std::vector<SweepRow> epsilon_sweep_report(std::vector<SweepInput> const& rows)
{
    std::vector<double> times;
    for (auto const& r : rows) times.push_back(r.t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::vector<SweepRow> out;
    for (double t : times) {
        SweepRow s;
        s.t = t;
        std::vector<double> lx, ly;
        for (auto const& r : rows) {
            if (r.t != t) continue;
            bool const noisy = !(r.distance > 0.0) || r.distance < 2.0 * r.std_error;
            s.noise_flags.push_back(noisy);
            if (!noisy) {
                lx.push_back(std::log(r.epsilon));
                ly.push_back(std::log(r.distance));
            }
        }
        if (lx.size() < 2) {
            s.indeterminate = true;
            s.slope = NAN;
        } else {
            s.slope = num::fit_line(lx, ly).slope;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SweepRow> epsilon_sweep_report(EnsembleReport const& report)
{
    std::vector<SweepInput> in;
    for (auto const& p : report.points) in.push_back({p.epsilon, p.t, p.weak, p.weak_se});
    return epsilon_sweep_report(in);
}

std::vector<HomogenizationRow> homogenization_experiment(HomogenizationConfig const& cfg)
{
    if (cfg.epsilons.empty()) throw InvalidArgument("homogenization: no epsilon values");
    if (!(cfg.f0.grid == cfg.vlasov.grid)) throw InvalidArgument("homogenization: f0 grid differs from the solver grid");
    if (cfg.samples < 2) throw InvalidArgument("homogenization: need at least two samples");
    auto const tests = hermite_test_set(cfg.vlasov.grid.vgrid);
    std::vector<HomogenizationRow> rows(cfg.epsilons.size());
    parallel_for(cfg.epsilons.size(), cfg.workers, [&](std::size_t ie) {
        VlasovConfig c = cfg.vlasov;
        c.epsilon = cfg.epsilons[ie];
        c.self_consistent = true;
        c.field = nullptr;
        if (!(c.dt > 0.0)) {
            auto const E0 = poisson_solve(charge_density(cfg.f0), c.neutrality_tol);
            double e_inf = 0.0;
            for (double e : E0.values) e_inf = std::max(e_inf, std::abs(e));
            c.dt = cfl_dt(c, 2.0 * e_inf, cfg.cfl_fraction);
        }
        std::vector<double> times;
        for (std::size_t q = 0; q <= cfg.samples; ++q)
            times.push_back(c.t_end * static_cast<double>(q) / static_cast<double>(cfg.samples));
        VlasovSolver solver(c);
        auto const tr = solver.run(cfg.f0, RunSchedule{times, 0});
        HomogenizationRow& r = rows[ie];
        r.epsilon = c.epsilon;
        r.dt = c.dt;
        r.steps = tr.steps;
        r.aborted = tr.aborted;
        r.energy_excess = tr.max_energy_excess;
        if (tr.aborted) return;
        r.phase_weak0 = phase_weak_distance(tr.snapshots.front(), tests);
        r.phase_weak = phase_weak_distance(tr.snapshots.back(), tests);
        for (auto const& a : tr.averages) r.average_drift = std::max(r.average_drift, weak_distance(a, tr.averages.front(), tests));
        // trapezoid time average of ||E|| over the second half
        double acc = 0.0, span = 0.0;
        for (std::size_t q = 1; q < tr.diag.size(); ++q) {
            double const ta = tr.diag[q - 1].t, tb = tr.diag[q].t;
            if (ta < 0.5 * c.t_end - 1e-12) continue;
            acc += 0.5 * (tb - ta) * (tr.diag[q - 1].field_l2 + tr.diag[q].field_l2);
            span += tb - ta;
        }
        r.field_l2_avg = span > 0.0 ? acc / span : tr.diag.back().field_l2;
    });
    return rows;
}

void write_report_csv(EnsembleReport const& r, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "eps,t,metric,value,stderr\n";
    for (auto const& p : r.points) {
        auto row = [&](char const* metric, double value, double se) {
            os << format_double(p.epsilon) << ',' << format_double(p.t) << ',' << metric << ',' << format_double(value)
               << ',' << format_double(se) << '\n';
        };
        row("weak", p.weak, p.weak_se);
        row("l1", p.l1, NAN);
        row("l2", p.l2, NAN);
        row("mass", p.mass, NAN);
        row("boundary_loss", p.boundary_loss, NAN);
    }
}

void write_sweep_csv(std::vector<SweepRow> const& rows, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "t,fitted_slope,noise_flags\n";
    for (auto const& r : rows) {
        os << format_double(r.t) << ',' << (r.indeterminate ? std::string("indeterminate") : format_double(r.slope)) << ',';
        for (std::size_t i = 0; i < r.noise_flags.size(); ++i) os << (i ? ";" : "") << (r.noise_flags[i] ? "noise-limited" : "ok");
        os << '\n';
    }
}

void write_homogenization_csv(std::vector<HomogenizationRow> const& rows, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "eps,phase_weak0,phase_weak,field_l2_avg,average_drift,energy_excess,steps,dt,aborted\n";
    for (auto const& r : rows)
        os << format_double(r.epsilon) << ',' << format_double(r.phase_weak0) << ',' << format_double(r.phase_weak)
           << ',' << format_double(r.field_l2_avg) << ',' << format_double(r.average_drift) << ','
           << format_double(r.energy_excess) << ',' << r.steps << ',' << format_double(r.dt) << ','
           << (r.aborted ? 1 : 0) << '\n';
}

}  // namespace vlq
