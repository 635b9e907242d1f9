#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vlq/cli.hpp"
#include "vlq/error.hpp"

using namespace vlq;
namespace fs = std::filesystem;

namespace {

std::string const examples = std::string(VLQ_SOURCE_DIR) + "/docs/examples/";

struct Run {
    int code;
    std::string out, err;
};

Run vlq_run(std::vector<std::string> const& args)
{
    std::ostringstream o, e;
    auto* so = std::cout.rdbuf(o.rdbuf());
    auto* se = std::cerr.rdbuf(e.rdbuf());
    int const code = cli::main(args);
    std::cout.rdbuf(so);
    std::cerr.rdbuf(se);
    return {code, o.str(), e.str()};
}

fs::path scratch(std::string const& name)
{
    auto p = fs::temp_directory_path() / ("vlq-cli-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(fs::path const& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("scaling: consistent regime")
{
    auto r = vlq_run({"scaling", "--ratio", "0.01", "--wp-tauL", "1e4", "--tauac-over-tauL", "1e-4", "--tauD-over-tauL", "5",
                      "--out-dir", scratch("scaling").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("epsilon=0.01") != std::string::npos);
    CHECK(r.out.find("tau=5") != std::string::npos);
    CHECK(r.err.find("warning") == std::string::npos);

    ScalingInput in;
    in.energy_ratio = 0.01;
    in.tau_L = 1e4;
    in.tau_ac = 1.0;
    in.tau_D = 5e4;
    auto s = derive_scaling(in);
    CHECK(s.epsilon == 0.01);
    CHECK(s.uptau == doctest::Approx(5.0));
    CHECK(s.warnings.empty());
    CHECK(s.lambda_D == 1.0);
}

TEST_CASE("scaling: infinite tau and regime mismatch")
{
    ScalingInput in;
    in.energy_ratio = 0.01;
    in.tau_L = 1e4;
    in.tau_ac = 1.0;
    in.tau_D = INFINITY;
    auto s = derive_scaling(in);
    CHECK(s.tau_infinite);
    CHECK(std::isinf(s.uptau));

    in.tau_D = 5.0;
    in.tau_L = 1e2;
    in.tau_ac = 1e-2;
    s = derive_scaling(in);
    REQUIRE_FALSE(s.warnings.empty());
    CHECK(s.warnings[0].find("regime mismatch") != std::string::npos);

    auto r = vlq_run({"scaling", "--ratio", "0.01", "--wp-tauL", "1e2", "--tauac-over-tauL", "1e-4", "--tauD-over-tauL", "inf",
                      "--out-dir", scratch("mismatch").string()});
    CHECK(r.code == 0);  // warnings, not errors
    CHECK(r.err.find("regime mismatch") != std::string::npos);
    CHECK(r.out.find("tau=inf") != std::string::npos);

    in.energy_ratio = -1;
    CHECK_THROWS_AS(derive_scaling(in), InvalidArgument);
}

TEST_CASE("usage errors exit 1")
{
    auto r = vlq_run({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(vlq_run({}).code == 1);
    CHECK(vlq_run({"diffmat"}).code == 1);  // --config is required
    CHECK(vlq_run({"diffmat", "--config", "/nonexistent/x.cfg"}).code == 1);

    // unknown key: diagnostic carries the line number
    auto const dir = scratch("badcfg");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.cfg") << "[field]\nkind = spectral\ntau = 1\n\n[mode]\nk = 1\nenergy = 0.1\nomega = 1\n\n[diffmat]\nnv = 33\nvmaxx = 4\n";
    r = vlq_run({"diffmat", "--config", (dir / "bad.cfg").string(), "--out-dir", (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("vmaxx") != std::string::npos);
    CHECK(r.err.find("12") != std::string::npos);
}

TEST_CASE("config round trip")
{
    for (char const* name : {"field-sample.cfg", "bump-sample.cfg", "diffmat-rbt.cfg", "ensemble-small.cfg", "vlasov-landau.cfg",
                             "ql-plateau.cfg", "dispersion.cfg"}) {
        CAPTURE(name);
        auto const a = Config::load(examples + name);
        auto const text = a.serialize();
        auto const b = Config::parse(text);
        CHECK(b.serialize() == text);
        REQUIRE(a.sections().size() == b.sections().size());
        for (std::size_t i = 0; i < a.sections().size(); ++i) {
            auto const& sa = a.sections()[i];
            auto const& sb = b.sections()[i];
            CHECK(sa.name() == sb.name());
            REQUIRE(sa.entries().size() == sb.entries().size());
            for (std::size_t j = 0; j < sa.entries().size(); ++j) {
                CHECK(sa.entries()[j].key == sb.entries()[j].key);
                CHECK(sa.entries()[j].value == sb.entries()[j].value);
            }
        }
    }

    // field spec: parse -> write -> parse is the identity on the spec
    auto cfg = Config::load(examples + "field-sample.cfg");
    auto const spec = parse_field(cfg);
    Config out;
    write_field(out, spec);
    auto const again = parse_field(Config::parse(out.serialize()));
    REQUIRE(again.kind == "spectral");
    REQUIRE(again.spectral.modes.size() == spec.spectral.modes.size());
    for (std::size_t i = 0; i < spec.spectral.modes.size(); ++i) {
        CHECK(again.spectral.modes[i].k == spec.spectral.modes[i].k);
        CHECK(again.spectral.modes[i].energy == spec.spectral.modes[i].energy);
        CHECK(again.spectral.modes[i].omega == spec.spectral.modes[i].omega);
    }
    CHECK(again.spectral.tau == spec.spectral.tau);
    CHECK(again.spectral.seed == spec.spectral.seed);
    Config twice;
    write_field(twice, again);
    CHECK(twice.serialize() == out.serialize());
}

TEST_CASE("diffmat: divergent resonance broadening exits 2 with a residual report")
{
    auto const dir = scratch("diverge");
    auto r = vlq_run({"diffmat", "--config", examples + "diffmat-diverge.cfg", "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(fs::exists(dir / "residual.csv"));
    CHECK(slurp(dir / "residual.csv").find("# iterations=2") != std::string::npos);
    REQUIRE(fs::exists(dir / "manifest.txt"));
    CHECK(slurp(dir / "manifest.txt").find("status = 2") != std::string::npos);
}

TEST_CASE("manifest rerun reproduces outputs byte for byte")
{
    auto const dir = scratch("rerun");
    auto r = vlq_run({"field-sample", "--config", examples + "field-sample.cfg", "--out-dir", dir.string(), "--workers", "2"});
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(dir / "manifest.txt"));
    std::size_t n_out = 0;
    for (auto const& e : fs::directory_iterator(dir)) n_out += e.is_regular_file();
    CHECK(n_out >= 3);

    r = vlq_run({"rerun", "--manifest", (dir / "manifest.txt").string()});
    REQUIRE(r.code == 0);
    auto const again = dir / "rerun";
    for (auto const& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.txt") continue;
        CAPTURE(e.path().filename().string());
        CHECK(slurp(e.path()) == slurp(again / e.path().filename()));
    }
    // compare on the two directories (manifest.txt excluded: timestamps)
    auto const copy = scratch("rerun-copy");
    fs::create_directories(copy);
    for (auto const& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) fs::copy_file(e.path(), copy / e.path().filename());
    r = vlq_run({"compare", dir.string(), copy.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("identical") != std::string::npos);

    std::ofstream(copy / "config.resolved", std::ios::app) << "# touched\n";
    r = vlq_run({"compare", dir.string(), copy.string()});
    CHECK(r.code == 2);
    CHECK(r.out.find("differs config.resolved") != std::string::npos);

    // a seed override changes the samples
    auto const other = scratch("reseed");
    r = vlq_run({"field-sample", "--config", examples + "field-sample.cfg", "--out-dir", other.string(), "--seed", "8"});
    REQUIRE(r.code == 0);
    r = vlq_run({"compare", dir.string(), other.string()});
    CHECK(r.code == 2);
}

TEST_CASE("version flag")
{
    auto r = vlq_run({"--version"});
    CHECK(r.code == 0);
    CHECK(r.out.find("vlq 1.0.0") != std::string::npos);
}
