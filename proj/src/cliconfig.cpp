#include <cmath>
#include <fstream>
#include <sstream>

#include "vlq/cli.hpp"
#include "vlq/error.hpp"

namespace vlq {

ScalingResult derive_scaling(ScalingInput const& in)
{
    auto positive = [](double v, char const* name) {
        if (!(v > 0.0)) throw InvalidArgument(std::string("scaling: ") + name + " must be positive");
    };
    positive(in.omega_p, "omega_p");
    positive(in.v_th, "v_th");
    positive(in.tau_L, "tau_L");
    positive(in.tau_ac, "tau_ac");
    positive(in.tau_D, "tau_D");
    positive(in.energy_ratio, "energy_ratio");
    if (!std::isfinite(in.omega_p) || !std::isfinite(in.tau_L) || !std::isfinite(in.tau_ac) || !std::isfinite(in.energy_ratio))
        throw InvalidArgument("scaling: only tau_D may be infinite");
    ScalingResult r;
    r.epsilon = in.energy_ratio;
    double const e2 = r.epsilon * r.epsilon;
    r.inv_wp_tauL = 1.0 / (in.omega_p * in.tau_L);
    r.tauac_over_tauL = in.tau_ac / in.tau_L;
    r.tau_infinite = std::isinf(in.tau_D);
    r.uptau = r.tau_infinite ? INFINITY : in.tau_D / in.tau_L;
    r.lambda_D = in.v_th / in.omega_p;
    auto sci = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return std::string(buf);
    };
    if (std::abs(r.inv_wp_tauL - e2) > 0.1 * e2)
        r.warnings.push_back("regime mismatch: 1/(omega_p t_hat)=" + sci(r.inv_wp_tauL) + " != eps^2=" + sci(e2));
    if (std::abs(r.tauac_over_tauL - e2) > 0.1 * e2)
        r.warnings.push_back("regime mismatch: tau_ac/t_hat=" + sci(r.tauac_over_tauL) + " != eps^2=" + sci(e2));
    if (r.epsilon >= 1.0) r.warnings.push_back("epsilon=" + sci(r.epsilon) + " is not small");
    return r;
}

AnyFieldSpec parse_field(Config const& cfg)
{
    AnyFieldSpec out;
    auto const* f = cfg.find("field");
    if (!f) return out;
    out.kind = f->get_string("kind", "spectral");
    auto modes = cfg.all("mode");
    if (out.kind == "zero") {
        f->require_known({"kind"});
    } else if (out.kind == "spectral") {
        f->require_known({"kind", "autocorr", "tau", "d_rb", "gradient_projection", "seed", "paired"});
        auto& s = out.spectral;
        s.autocorr = autocorr_kind_from_string(f->get_string("autocorr", "triangular"));
        s.tau = f->get_double("tau", 1.0);
        s.d_rb = f->get_double("d_rb", 0.0);
        s.gradient_projection = f->get_bool("gradient_projection", true);
        s.seed = f->get_u64("seed", 0);
        bool const paired = f->get_bool("paired", true);
        for (auto const* m : modes) {
            m->require_known({"k", "energy", "omega", "growth"});
            SpectralMode sm{m->get_double("k"), m->get_double("energy"), m->get_double("omega", 0.0),
                            m->get_double("growth", 0.0)};
            s.modes.push_back(sm);
        }
        if (paired) {
            auto const base = s.modes;
            for (auto const& m : base) {
                bool has = false;
                for (auto const& o : base) has = has || o.k == -m.k;
                if (!has) s.modes.push_back({-m.k, m.energy, -m.omega, m.growth});
            }
        }
        validate(s);
    } else if (out.kind == "bump") {
        f->require_known({"kind", "r", "rho", "w_t", "w_tau", "w_x", "amp", "amp_dist", "gradient", "cells", "seed"});
        auto& b = out.bump;
        b.r = f->get_double("r", b.r);
        b.rho = f->get_double("rho", b.rho);
        b.w_t = f->get_double("w_t", b.w_t);
        b.w_tau = f->get_double("w_tau", b.w_tau);
        b.w_x = f->get_double("w_x", b.w_x);
        b.amp = f->get_double("amp", b.amp);
        b.amp_dist = amp_dist_from_string(f->get_string("amp_dist", "rademacher"));
        b.gradient = f->get_bool("gradient", false);
        b.cells = static_cast<int>(f->get_int("cells", 6));
        b.seed = f->get_u64("seed", 0);
        if (!modes.empty()) throw InvalidArgument(modes.front()->where() + ": [mode] sections are not used by a bump field");
        validate(b);
    } else if (out.kind == "wkb") {
        f->require_known({"kind", "epsilon"});
        out.wkb.epsilon = f->get_double("epsilon", 1.0);
        for (auto const* m : modes) {
            m->require_known({"k", "amplitude", "omega"});
            out.wkb.modes.push_back({m->get_double("k"), m->get_double("amplitude"), m->get_double("omega", 0.0)});
        }
        validate(out.wkb);
    } else {
        throw InvalidArgument(f->where(f->find("kind")) + ": unknown field kind '" + out.kind + "'");
    }
    return out;
}

void write_field(Config& cfg, AnyFieldSpec const& spec)
{
    auto& secs = cfg.sections();
    std::erase_if(secs, [](ConfigSection const& s) { return s.name() == "field" || s.name() == "mode"; });
    auto& f = cfg.append("field");
    f.set("kind", spec.kind);
    if (spec.kind == "spectral") {
        auto const& s = spec.spectral;
        f.set("autocorr", to_string(s.autocorr));
        f.set("tau", s.tau);
        f.set("d_rb", s.d_rb);
        f.set("gradient_projection", s.gradient_projection);
        f.set_u64("seed", s.seed);
        f.set("paired", false);
        for (auto const& m : s.modes) {
            auto& ms = cfg.append("mode");
            ms.set("k", m.k);
            ms.set("energy", m.energy);
            ms.set("omega", m.omega);
            ms.set("growth", m.growth);
        }
    } else if (spec.kind == "bump") {
        auto const& b = spec.bump;
        f.set("r", b.r);
        f.set("rho", b.rho);
        f.set("w_t", b.w_t);
        f.set("w_tau", b.w_tau);
        f.set("w_x", b.w_x);
        f.set("amp", b.amp);
        f.set("amp_dist", to_string(b.amp_dist));
        f.set("gradient", b.gradient);
        f.set("cells", static_cast<std::int64_t>(b.cells));
        f.set_u64("seed", b.seed);
    } else if (spec.kind == "wkb") {
        f.set("epsilon", spec.wkb.epsilon);
        for (auto const& m : spec.wkb.modes) {
            auto& ms = cfg.append("mode");
            ms.set("k", m.k);
            ms.set("amplitude", m.amplitude);
            ms.set("omega", m.omega);
        }
    }
}

FieldSpec to_ensemble_spec(AnyFieldSpec const& spec)
{
    if (spec.kind == "spectral") return spec.spectral;
    if (spec.kind == "bump") return spec.bump;
    if (spec.kind == "zero") {
        BumpFieldSpec z;
        z.amp_dist = AmpDist::zero;
        return z;
    }
    throw InvalidArgument("ensemble: field kind '" + spec.kind + "' is not random (use spectral, bump or zero)");
}

PhaseGrid parse_grid(ConfigSection const& s)
{
    s.require_known({"nx", "nv", "vmax"});
    auto const nx = s.get_int("nx", 64), nv = s.get_int("nv", 257);
    if (nx < 2 || nv < 4) throw InvalidArgument(s.where() + ": need nx >= 2 and nv >= 4");
    return PhaseGrid(static_cast<std::size_t>(nx), static_cast<std::size_t>(nv), s.get_double("vmax", 8.0));
}

VelocityProfile parse_profile(ConfigSection const* s, VelocityGrid const& g)
{
    if (!s) return VelocityProfile::maxwellian(g);
    std::string const kind = s->get_string("profile", "maxwellian");
    double const v_th = s->get_double("v_th", 1.0);
    if (kind == "maxwellian") return VelocityProfile::maxwellian(g, v_th, s->get_double("drift", 0.0));
    if (kind == "bump_on_tail")
        return VelocityProfile::bump_on_tail(g, s->get_double("n_b", 0.1), s->get_double("v_b", 4.0),
                                             s->get_double("v_tb", 0.5), v_th);
    throw InvalidArgument(s->where(s->find("profile")) + ": unknown profile '" + kind + "'");
}

DistFn parse_initial(Config const& cfg, PhaseGrid const& g)
{
    auto const* s = cfg.find("initial");
    if (s) s->require_known({"profile", "v_th", "drift", "n_b", "v_b", "v_tb", "perturbation", "mode"});
    auto const p = parse_profile(s, g.vgrid);
    double const a = s ? s->get_double("perturbation", 0.0) : 0.0;
    double const j = s ? static_cast<double>(s->get_int("mode", 1)) : 1.0;
    DistFn f;
    f.grid = g;
    f.values.resize(g.size());
    for (std::size_t iv = 0; iv < g.nv(); ++iv)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            f.at(ix, iv) = (1.0 + a * std::cos(j * g.x(ix))) * p.f().values[iv];
    return f;
}

std::uint64_t fnv1a(std::string const& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return fnv1a(ss.str());
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace vlq
