#include "vlq/vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "vlq/config.hpp"
#include "vlq/error.hpp"
#include "vlq/fft.hpp"

namespace vlq {

namespace {
using cplx = std::complex<double>;
}

std::vector<double> charge_density(DistFn const& f)
{
    auto const w = f.grid.vgrid.weights();
    std::vector<double> rho(f.grid.nx, 0.0);
    for (std::size_t j = 0; j < f.grid.nv(); ++j) {
        auto const row = f.row(j);
        for (std::size_t i = 0; i < f.grid.nx; ++i) rho[i] += w[j] * row[i];
    }
    return rho;
}

FieldOnGrid poisson_solve(std::span<double const> rho, double neutrality_tol)
{
    std::size_t const n = rho.size();
    if (n < 2 || n % 2 != 0) throw InvalidArgument("poisson_solve: grid size must be even");
    double mean = 0.0;
    for (double r : rho) mean += r;
    mean /= static_cast<double>(n);
    if (std::abs(mean - 1.0) > neutrality_tol)
        throw InvalidArgument("poisson_solve: global neutrality violated, mean density " + format_double(mean));
    PeriodicFft fft(n);
    auto re = fft.real();
    for (std::size_t i = 0; i < n; ++i) re[i] = rho[i] - mean;
    fft.forward();
    auto sp = fft.spectrum();
    sp[0] = 0.0;
    for (std::size_t m = 1; m < fft.modes(); ++m) sp[m] = (m == n / 2) ? cplx(0.0) : cplx(0.0, -1.0) * sp[m] / static_cast<double>(m);
    fft.backward();
    FieldOnGrid E;
    E.values.assign(re.begin(), re.end());
    return E;
}

DistFn free_flow(DistFn const& f, double t, double epsilon)
{
    VlasovConfig cfg;
    cfg.epsilon = epsilon;
    cfg.grid = f.grid;
    cfg.dt = 1.0;
    VlasovSolver solver(cfg);
    DistFn g = f;
    solver.free_flow(g, t);
    return g;
}

double cfl_dt(VlasovConfig const& cfg, double e_inf, double c)
{
    double const e2 = cfg.epsilon * cfg.epsilon;
    double bound = cfg.grid.dx() / cfg.grid.vmax();
    if (e_inf > 0.0) bound = std::min(bound, cfg.grid.dv() * cfg.epsilon / e_inf);
    return c * e2 * bound;
}

double estimate_field_bound(VlasovConfig const& cfg, std::size_t samples)
{
    if (cfg.self_consistent || !cfg.field) return 0.0;
    std::vector<double> E(cfg.grid.nx);
    double m = 0.0;
    double const t_end = cfg.t_end > 0.0 ? cfg.t_end : 1.0;
    for (std::size_t s = 0; s < samples; ++s) {
        double const t = t_end * static_cast<double>(s) / static_cast<double>(std::max<std::size_t>(1, samples - 1));
        cfg.field->eval_grid(t, t / (cfg.epsilon * cfg.epsilon), 0.0, cfg.grid.dx(), E);
        for (double e : E) m = std::max(m, std::abs(e));
    }
    return m;
}

VlasovSolver::VlasovSolver(VlasovConfig cfg) : cfg_(std::move(cfg))
{
    if (!(cfg_.epsilon > 0.0 && cfg_.epsilon <= 1.0)) throw InvalidArgument("vlasov: epsilon must be in (0, 1]");
    if (cfg_.grid.nx < 2 || cfg_.grid.nv() < 4) throw InvalidArgument("vlasov: grid too small");
    if (cfg_.self_consistent) cfg_.field = nullptr;
    dt_ = cfg_.dt;
    if (!(dt_ > 0.0)) {
        double e_inf = cfg_.field_bound > 0.0 ? cfg_.field_bound : estimate_field_bound(cfg_);
        dt_ = cfl_dt(cfg_, e_inf, 0.1);
    }
    rows_ = std::make_unique<PeriodicFft>(cfg_.grid.nx, cfg_.grid.nv());
    column_.resize(cfg_.grid.nv());
    w_ = cfg_.grid.vgrid.weights();
}

VlasovSolver::~VlasovSolver() = default;

void VlasovSolver::free_flow(DistFn& f, double t)
{
    if (t == 0.0) return;
    auto const& g = cfg_.grid;
    std::size_t const nx = g.nx, nv = g.nv(), nm = rows_->modes();
    if (phase_cache_t_ != t && phase_alt_t_ == t) {
        std::swap(phase_cache_, phase_alt_);
        std::swap(phase_cache_t_, phase_alt_t_);
    } else if (phase_cache_t_ != t) {
        std::swap(phase_cache_, phase_alt_);
        std::swap(phase_cache_t_, phase_alt_t_);
        phase_cache_.resize(nv * nm);
        double const s = t / (cfg_.epsilon * cfg_.epsilon);
        for (std::size_t j = 0; j < nv; ++j) {
            double const v = g.v(j);
            for (std::size_t m = 0; m < nm; ++m) {
                double const arg = static_cast<double>(m) * v * s;
                phase_cache_[j * nm + m] = (m == nx / 2) ? cplx(std::cos(arg), 0.0) : std::polar(1.0, -arg);
            }
        }
        phase_cache_t_ = t;
    }
    auto re = rows_->real();
    std::copy(f.values.begin(), f.values.end(), re.begin());
    rows_->forward();
    auto sp = rows_->spectrum();
    for (std::size_t q = 1; q < nv * nm; ++q)
        if (q % nm != 0) sp[q] *= phase_cache_[q];
    rows_->backward();
    std::copy(re.begin(), re.end(), f.values.begin());
}

double VlasovSolver::advect_v(DistFn& f, std::span<double const> E, double dt)
{
    auto const& g = cfg_.grid;
    std::size_t const nx = g.nx, nv = g.nv();
    double const dv = g.dv(), vmax = g.vmax();
    double loss = 0.0;
    std::vector<double> out(nv);
    for (std::size_t i = 0; i < nx; ++i) {
        double const shift = dt * E[i] / cfg_.epsilon;  // f_new(v) = f_old(v - shift)
        if (shift == 0.0) continue;
        if (!std::isfinite(shift)) {
            // poison the column so the run's finiteness check aborts
            for (std::size_t j = 0; j < nv; ++j) f.values[j * nx + i] = shift;
            continue;
        }
        for (std::size_t j = 0; j < nv; ++j) column_[j] = f.values[j * nx + i];
        spline_.fit(-vmax, dv, column_);
        spline_.shifted(shift / dv, out, 0.0);
        // feet outside the grid read zero; the interior shift conserves the discrete mass,
        // so the column's mass change is exactly what crossed the boundary
        for (std::size_t j = 0; j < nv; ++j) {
            loss += w_[j] * (column_[j] - out[j]);
            f.values[j * nx + i] = out[j];
        }
    }
    return loss / static_cast<double>(nx);  // (1/2pi) sum_i dx = mean over columns
}

void VlasovSolver::field_at(DistFn const& f, double t, std::span<double> E) const
{
    auto const& g = cfg_.grid;
    if (cfg_.self_consistent) {
        auto const rho = charge_density(f);
        auto const sol = poisson_solve(rho, cfg_.neutrality_tol);
        std::copy(sol.values.begin(), sol.values.end(), E.begin());
    } else if (cfg_.field) {
        cfg_.field->eval_grid(t, t / (cfg_.epsilon * cfg_.epsilon), 0.0, g.dx(), E);
    } else {
        std::fill(E.begin(), E.end(), 0.0);
    }
}

double VlasovSolver::step(DistFn& f, double dt)
{
    std::vector<double> E(cfg_.grid.nx);
    double loss = 0.0;
    if (cfg_.splitting == Splitting::strang) {
        free_flow(f, 0.5 * dt);
        field_at(f, f.time + 0.5 * dt, E);
        loss = advect_v(f, E, dt);
        free_flow(f, 0.5 * dt);
    } else {
        field_at(f, f.time, E);
        loss = advect_v(f, E, dt);
        free_flow(f, dt);
    }
    f.time += dt;
    return loss;
}

DiagRow VlasovSolver::diagnostics(DistFn const& f, double boundary_loss) const
{
    auto const& g = cfg_.grid;
    DiagRow d;
    d.t = f.time;
    d.mass = moments(f, {0})[0];
    d.l1 = lp_norm(f, 1.0);
    d.l2 = lp_norm(f, 2.0);
    d.linf = lp_norm(f, INFINITY);
    auto const avg = space_average(f);
    d.e_kin = 0.5 * 2.0 * std::numbers::pi * velocity_moment(avg, 2);
    std::vector<double> E(g.nx);
    field_at(f, f.time, E);
    double s = 0.0;
    for (double e : E) s += e * e;
    s *= g.dx();
    d.field_l2 = std::sqrt(s);
    d.e_el = 0.5 * cfg_.epsilon * s;
    d.e_total = d.e_kin + d.e_el;
    d.boundary_loss = boundary_loss;
    return d;
}

Trajectory VlasovSolver::run(DistFn f, RunSchedule const& schedule)
{
    auto const& g = cfg_.grid;
    if (!(f.grid == g)) throw InvalidArgument("vlasov run: initial data on a different grid");
    if (!(cfg_.t_end >= 0.0)) throw InvalidArgument("vlasov run: t_end must be >= 0");
    Trajectory tr;
    tr.dt = dt_;
    double const e_inf = cfg_.self_consistent ? 0.0 : (cfg_.field_bound > 0.0 ? cfg_.field_bound : estimate_field_bound(cfg_));
    tr.cfl_ok = dt_ <= cfl_dt(cfg_, e_inf, cfg_.c_cfl) * (1.0 + 1e-12);

    std::vector<double> events;
    for (double t : schedule.snapshot_times) {
        if (t < 0.0 || t > cfg_.t_end * (1.0 + 1e-12)) throw InvalidArgument("vlasov run: snapshot time outside [0, t_end]");
        events.push_back(std::min(t, cfg_.t_end));
    }
    events.push_back(cfg_.t_end);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    auto wants_snapshot = [&](double t) {
        return std::any_of(schedule.snapshot_times.begin(), schedule.snapshot_times.end(),
                           [&](double s) { return std::min(s, cfg_.t_end) == t; });
    };

    double loss_total = 0.0;
    std::vector<double> E(g.nx);
    auto record = [&](bool snap) {
        auto d = diagnostics(f, loss_total);
        tr.diag.push_back(d);
        for (double x : f.values) tr.min_value = std::min(tr.min_value, x);
        if (cfg_.self_consistent && !tr.diag.empty()) {
            double const e0 = tr.diag.front().e_total;
            double const excess = e0 != 0.0 ? (d.e_total - e0) / std::abs(e0) : 0.0;
            tr.max_energy_excess = std::max(tr.max_energy_excess, excess);
            if (excess > cfg_.tol_energy) tr.energy_violation = true;
        }
        if (snap) {
            tr.snapshots.push_back(f);
            FieldOnGrid fg;
            fg.time = f.time;
            fg.values.resize(g.nx);
            field_at(f, f.time, fg.values);
            tr.fields.push_back(std::move(fg));
            tr.averages.push_back(space_average(f));
        }
    };
    record(wants_snapshot(0.0));

    DistFn last_good = f;
    double t0 = 0.0;
    std::size_t step_count = 0;
    for (double t1 : events) {
        if (t1 <= t0) continue;
        auto const n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt_ - 1e-9));
        double const h = (t1 - t0) / static_cast<double>(n);
        if (cfg_.splitting == Splitting::strang) free_flow(f, 0.5 * h);
        for (std::size_t s = 0; s < n; ++s) {
            double const tn = t0 + static_cast<double>(s) * h;
            if (cfg_.splitting == Splitting::strang) {
                field_at(f, tn + 0.5 * h, E);
                loss_total += advect_v(f, E, h);
                free_flow(f, s + 1 == n ? 0.5 * h : h);
            } else {
                field_at(f, tn, E);
                loss_total += advect_v(f, E, h);
                free_flow(f, h);
            }
            f.time = s + 1 == n ? t1 : t0 + static_cast<double>(s + 1) * h;
            ++step_count;
            double sum = 0.0;
            for (double x : f.values) sum += x;
            if (!std::isfinite(sum)) {
                tr.aborted = true;
                tr.abort_reason = "non-finite values at t = " + format_double(f.time);
                tr.snapshots.push_back(last_good);
                tr.steps = step_count;
                return tr;
            }
            bool const boundary = s + 1 == n;
            if (!boundary && schedule.diag_every > 0 && step_count % static_cast<std::size_t>(schedule.diag_every) == 0)
                record(false);
            if (schedule.diag_every > 0 && step_count % static_cast<std::size_t>(schedule.diag_every) == 0) last_good = f;
        }
        record(wants_snapshot(t1));
        last_good = f;
        t0 = t1;
    }
    tr.steps = step_count;
    return tr;
}

void write_diag_csv(std::vector<DiagRow> const& diag, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "t,mass,l2,linf,e_kin,e_el,e_total,field_l2,boundary_loss\n";
    for (auto const& d : diag)
        os << format_double(d.t) << ',' << format_double(d.mass) << ',' << format_double(d.l2) << ','
           << format_double(d.linf) << ',' << format_double(d.e_kin) << ',' << format_double(d.e_el) << ','
           << format_double(d.e_total) << ',' << format_double(d.field_l2) << ',' << format_double(d.boundary_loss)
           << '\n';
}

void write_field_csv(FieldOnGrid const& E, PhaseGrid const& g, std::string const& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << "x,E\n";
    for (std::size_t i = 0; i < g.nx; ++i) os << format_double(g.x(i)) << ',' << format_double(E.values[i]) << '\n';
}

}  // namespace vlq
