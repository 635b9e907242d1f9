#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlq/config.hpp"
#include "vlq/dispersion.hpp"
#include "vlq/ensemble.hpp"
#include "vlq/stochfield.hpp"

namespace vlq {

// ---- scaling ----

struct ScalingInput {
    double omega_p = 1.0;
    double v_th = 1.0;
    double tau_L = 1.0;
    double tau_ac = 1.0;
    double tau_D = 1.0;  // inf allowed
    double energy_ratio = 0.0;
};

struct ScalingResult {
    double epsilon = 0.0;
    double uptau = 0.0;  // inf when tau_D is infinite
    bool tau_infinite = false;
    double lambda_D = 0.0;
    double inv_wp_tauL = 0.0;
    double tauac_over_tauL = 0.0;
    std::vector<std::string> warnings;  // regime mismatches (> 10%)
};

ScalingResult derive_scaling(ScalingInput const& in);

// ---- config <-> specs ----

/// [field] kind = spectral | bump | wkb | zero, modes in repeated [mode] sections.
struct AnyFieldSpec {
    std::string kind = "zero";
    SpectralFieldSpec spectral;
    BumpFieldSpec bump;
    WkbFieldSpec wkb;
};

AnyFieldSpec parse_field(Config const& cfg);
/// Writes [field] and [mode] sections (replacing existing ones).
void write_field(Config& cfg, AnyFieldSpec const& spec);
FieldSpec to_ensemble_spec(AnyFieldSpec const& spec);

/// [grid] nx, nv, vmax.
PhaseGrid parse_grid(ConfigSection const& s);
/// [initial] profile = maxwellian | bump_on_tail; optional perturbation * cos(mode x).
DistFn parse_initial(Config const& cfg, PhaseGrid const& g);
VelocityProfile parse_profile(ConfigSection const* s, VelocityGrid const& g);

// ---- manifest ----

std::uint64_t fnv1a(std::string const& bytes);
std::uint64_t fnv1a_file(std::string const& path);
std::string hex64(std::uint64_t v);

namespace cli {

inline constexpr char const* version = "vlq 1.0.0";

/// Entry point: returns 0 on success, 1 on usage/config errors, 2 on numerical failure.
int main(int argc, char const* const* argv);
int main(std::vector<std::string> const& args);

}  // namespace cli

}  // namespace vlq
