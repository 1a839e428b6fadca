#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"

#include "superlambda/config.hpp"
#include "superlambda/io.hpp"
#include "superlambda/run.hpp"

using namespace superlambda;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(# comment
mode = meanfield

[params]
n_atoms = 1000
gamma1 = 1
gamma2 = 0.01
mu1 = 0.01
mu2 = 0.02
omega_bar = 0.3

[time]
t_end = 20
unit = fast
samples = 201

[solver]
rel = 1e-9
abs = 1e-14
)";

EnvLookup env_of(std::map<std::string, std::string> vars)
{
    return [vars](const std::string& k) -> std::optional<std::string> {
        const auto it = vars.find(k);
        if (it == vars.end()) {
            return std::nullopt;
        }
        return it->second;
    };
}

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("superlambda_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config parses and converts omega_bar to a Rabi frequency")
{
    const auto c = parse_config(kBase);
    CHECK(c.mode == Mode::meanfield);
    CHECK(c.params.n_atoms == 1000);
    CHECK(c.params.rabi == doctest::Approx(0.3 * 0.01 * 1 * 1000));
    CHECK(c.t_unit == TimeUnit::fast_scaled);
    CHECK(c.samples == 201);
    CHECK(c.tol.rel == 1e-9);
}

TEST_CASE("emit and parse round trip")
{
    auto c = parse_config(kBase);
    c.seed = {SeedKind::none, 0.25};
    c.spacing = GridSpacing::logarithmic;
    c.svg = false;
    c.sweep_omega_bar = {0.1, 0.2};
    c.compare_columns = {"I1", "I2"};
    c.tol.max_step = 0.5;
    const auto text = emit_config(c);
    CHECK(parse_config(text) == c);
    CHECK(emit_config(parse_config(text)) == text);

    RunConfig exact = c;
    exact.mode = Mode::exact;
    exact.params.n_atoms = 2;
    exact.params.initial_excited = 2;
    exact.coupling = CouplingKind::geometry;
    exact.geometry.positions = {{0, 0, 0}, {0.5, 0.1, -0.2}};
    exact.initial_levels = {3, 1};
    CHECK(parse_config(emit_config(exact)) == exact);
}

TEST_CASE("config errors name the line")
{
    CHECK_THROWS_WITH_AS(parse_config(std::string(kBase) + "bogus = 1\n"),
                         doctest::Contains("line 20"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(std::string(kBase) + "[nope]\n"),
                         doctest::Contains("unknown section"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(std::string(kBase) + "[time]\nt_end = 3\n"),
                         doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(std::string(kBase) + "[output]\nsvg = maybe\n"),
                         doctest::Contains("svg"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kBase) + "[params]\nrabi = 1\n"),
                    ConfigError);
}

TEST_CASE("missing keys are reported together")
{
    try {
        parse_config("mode = meanfield\n[params]\nn_atoms = 10\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("params.gamma1") != std::string::npos);
        CHECK(what.find("params.mu2") != std::string::npos);
        CHECK(what.find("time.t_end") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(""), ConfigError);
}

TEST_CASE("environment overrides the file and the command line overrides both")
{
    const auto env = env_of({{"SUPERLAMBDA_SOLVER_REL", "1e-11"},
                             {"SUPERLAMBDA_TIME_SAMPLES", "11"}});
    const auto c = parse_config(kBase, env);
    CHECK(c.tol.rel == 1e-11);
    CHECK(c.samples == 11);
    const auto d = parse_config(kBase, env, {{"solver.rel", "1e-7"}});
    CHECK(d.tol.rel == 1e-7);
    CHECK(d.samples == 11);
    CHECK_THROWS_AS(parse_config(kBase, env_of({{"SUPERLAMBDA_SOLVER_REL", "x"}})),
                    ConfigError);
}

TEST_CASE("CSV output is byte-deterministic and reads back exactly")
{
    const auto c = parse_config(kBase);
    const auto a = run_trajectory(c);
    const auto b = run_trajectory(c);
    const auto ta = trajectory_csv(a);
    CHECK(ta == trajectory_csv(b));
    CHECK(sha256_hex(ta) == sha256_hex(trajectory_csv(b)));
    CHECK(ta.substr(0, ta.find('\n')) ==
          "t_scaled_slow,t_scaled_fast,p1_over_N,p2_over_N,p3_over_N,"
          "re_c12_over_N,im_c12_over_N,I1,I2,d_mm,d_pp,re_cross,im_cross");
    const auto back = read_trajectory_csv(ta, "t_scaled_fast");
    for (const auto& name : csv_schema()) {
        CHECK(back.column(name) == a.column(name));
    }
    CHECK_THROWS_AS(read_trajectory_csv("a,b\n1\n", "a"), ConfigError);
}

TEST_CASE("sha256 of known inputs")
{
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("a run writes its artifacts and an echo of the config")
{
    const auto dir = scratch("run");
    auto c = parse_config(kBase);
    c.out_dir = dir.string();
    const auto r = run(c);
    CHECK(r.exit_code == 0);
    for (const char* f : {"trajectory.csv", "manifest.json", "metrics.json",
                          "populations.svg", "intensities.svg"}) {
        CHECK(fs::exists(dir / f));
    }
    const auto manifest = nlohmann::json::parse(read_text_file((dir / "manifest.json").string()));
    CHECK(config_from_manifest(manifest) == c);
    const auto csv = read_text_file((dir / "trajectory.csv").string());
    CHECK(manifest["artifacts"]["trajectory.csv"] == sha256_hex(csv));
    fs::remove_all(dir);
}

TEST_CASE("compare flags deviations above tolerance")
{
    const auto c = parse_config(kBase);
    const auto a = run_trajectory(c);
    auto c2 = c;
    c2.params.rabi *= 1.01;
    const auto b = run_trajectory(c2);
    CHECK(compare(a, a, {"I1", "p3_over_N"}, 0.0).pass);
    const auto rep = compare(a, b, {"I1", "p3_over_N"}, 1e-12);
    CHECK_FALSE(rep.pass);
    CHECK(rep.columns.size() == 2);
    CHECK_THROWS_AS(compare(a, b, {"nope"}, 1.0), ConfigError);
}

TEST_CASE("shipped scenarios are valid and omega_bar must be non-negative")
{
    const std::string dir = std::string(SUPERLAMBDA_SOURCE_DIR) + "/scenarios/";
    const auto undriven = parse_config(read_text_file(dir + "undriven.ini"));
    CHECK(undriven.mode == Mode::meanfield);
    CHECK(undriven.params.rabi == 0.0);
    CHECK(undriven.params.gamma2 / undriven.params.gamma1 == doctest::Approx(1e-8));
    CHECK(undriven.params.mu2 / undriven.params.mu1 == doctest::Approx(1.0 / 16));
    CHECK(undriven.params.n_atoms == 10000000);
    CHECK_NOTHROW(parse_config(read_text_file(dir + "driven.ini")));
    CHECK(parse_config(read_text_file(dir + "sweep.ini")).sweep_omega_bar.size() == 4);
    CHECK_THROWS_AS(parse_config(kBase, {}, {{"params.omega_bar", "-0.1"}}),
                    ConfigError);
}

TEST_CASE("loose and tight tolerances agree on normalised populations")
{
    auto c = parse_config(kBase);
    c.tol = {1e-6, 1e-12};
    const auto loose = run_trajectory(c);
    c.tol = {1e-9, 1e-14};
    const auto tight = run_trajectory(c);
    const auto rep = compare(loose, tight, {"p1_over_N", "p2_over_N", "p3_over_N"},
                             1e-4);
    CHECK(rep.pass);
}

TEST_CASE("sweep writes one directory per point and a summary")
{
    const auto dir = scratch("sweep");
    auto c = parse_config(kBase);
    c.mode = Mode::sweep;
    c.sweep_omega_bar = {0.0, 0.1, 0.47, 1.0};
    c.svg = false;
    c.out_dir = dir.string();
    const auto r = run(c);
    CHECK(r.exit_code == 0);
    int points = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) {
            ++points;
            CHECK(fs::exists(e.path() / "trajectory.csv"));
        }
    }
    CHECK(points == 4);
    const auto summary = read_text_file((dir / "summary.csv").string());
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
    fs::remove_all(dir);
}
