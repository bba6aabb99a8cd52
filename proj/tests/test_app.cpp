#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "entfree/config.hpp"
#include "entfree/errors.hpp"
#include "entfree/presets.hpp"
#include "entfree/report.hpp"
#include "entfree/scenario.hpp"
#include "entfree/verify.hpp"

using namespace entfree;
namespace fs = std::filesystem;

namespace {

const char* kFinite = R"(
[scenario]
id = zz
mode = finite
seed = 3
dt = 0.01
t_final = 0.5

[finite]
dim_a = 2
dim_b = 2
hamiltonian = sigma_zz
initial_state = plus_plus
)";

const char* kContinuum = R"(
[scenario]
id = bump
mode = continuum
dt = 0.004
t_final = 0.4

[continuum]
n_a = 64
dx_a = 0.3
x0_a = -3
p0_a = 1
width_a = 0.8
x0_b = 3
p0_b = -1
width_b = 0.8
potential = gaussian_bump
strength = 1
range = 1
sample_every = 20
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("entfree_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("finite config parses with defaults") {
    const ScenarioConfig c = parse_config(kFinite);
    CHECK(c.id == "zz");
    CHECK(c.mode == Mode::finite);
    CHECK(c.seed == 3);
    CHECK(c.hbar == 1.0);
    CHECK(c.dt == 0.01);
    CHECK(c.finite.hamiltonian == HamiltonianKind::sigma_zz);
    CHECK(c.output_dir == "output");
    CHECK_FALSE(c.checks.min_purity.has_value());
}

TEST_CASE("config validation rejects bad input") {
    const std::string base = kFinite;
    CHECK_THROWS_AS(parse_config(replace(base, "dt = 0.01\n", "")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "dt = 0.01", "dt = -0.01")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "dt = 0.01", "dt = fast")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "seed = 3", "seed = 3\ncolour = blue")), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "\n[extras]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "mode = finite", "mode = sideways")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "id = zz", "id = a b")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "dim_a = 2", "dim_a = 3")), ConfigError); // sigma_zz is 2x2
    CHECK_THROWS_AS(parse_config(replace(base, "dim_a = 2", "dim_a = 1")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "hamiltonian = sigma_zz", "hamiltonian = random\nsegments = 3")),
                    ConfigError); // 0.5 / 3 is not a whole number of steps
    CHECK_THROWS_AS(parse_config(base + "rate_dts = 0.02, 0.015\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "initial_state = plus_plus", "initial_state = random") +
                                 "rate_dts = 0.02, 0.01\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(base + "\n[continuum]\nn_a = 64\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("not an ini file ["), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("continuum config validation") {
    const ScenarioConfig c = parse_config(kContinuum);
    CHECK(c.continuum.n_b == 64);
    CHECK(c.continuum.dx_b == 0.3);
    CHECK(c.continuum.potential.interaction.kind == continuum::PotentialKind::gaussian_bump);
    CHECK_FALSE(c.continuum.potential.external_a.has_value());

    const std::string base = kContinuum;
    CHECK_THROWS_AS(parse_config(replace(base, "n_a = 64", "n_a = 100")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "range = 1", "range = 0")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "potential = gaussian_bump", "potential = square_well")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "width_a = 0.8\n", "")), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(base, "n_a = 64", "engine = hartree\nn_a = 64\ndx_b = 0.2\nn_b = 64")),
                    ConfigError);
}

TEST_CASE("verify mode rejects time settings") {
    CHECK_NOTHROW(parse_config("[scenario]\nid = v\nmode = verify\nfilter = theorem0\n"));
    CHECK_THROWS_AS(parse_config("[scenario]\nid = v\nmode = verify\ndt = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(replace(kFinite, "seed = 3", "seed = 3\nfilter = x")), ConfigError);
}

TEST_CASE("dense matrix files") {
    const ComplexMatrix m = parse_matrix("# sigma_y\n0 0  0 -1\n0 1  0 0\n");
    CHECK(m.rows() == 2);
    CHECK(m(0, 1) == Complex(0, -1));
    CHECK(m(1, 0) == Complex(0, 1));
    CHECK_THROWS_AS(parse_matrix("1 0 0\n"), IoError);
    CHECK_THROWS_AS(parse_matrix("1 0 0 0\n1 0\n"), IoError);

    const fs::path dir = scratch_dir("matrix");
    fs::create_directories(dir);
    const fs::path file = dir / "h.txt";
    std::ofstream(file) << "1 0 0 0 0 0 0 0\n0 0 -1 0 0 0 0 0\n0 0 0 0 -1 0 0 0\n0 0 0 0 0 0 1 0\n";
    const ScenarioConfig c = parse_config(replace(kFinite, "hamiltonian = sigma_zz",
                                                  "hamiltonian = file\nhamiltonian_file = " + file.string()));
    CHECK(c.finite.hamiltonian == HamiltonianKind::file);
    // Non-Hermitian file is refused at parse time.
    std::ofstream(file) << "1 0 1 0 0 0 0 0\n0 0 -1 0 0 0 0 0\n0 0 0 0 -1 0 0 0\n0 0 0 0 0 0 1 0\n";
    CHECK_THROWS_AS(parse_config(replace(kFinite, "hamiltonian = sigma_zz",
                                         "hamiltonian = file\nhamiltonian_file = " + file.string())),
                    ConfigError);
}

TEST_CASE("check evaluation") {
    CHECK(make_check("a", 1.0, Comparison::at_most, 1.0).pass);
    CHECK_FALSE(make_check("a", 1.0, Comparison::less_than, 1.0).pass);
    CHECK(make_check("a", 1.0, Comparison::at_least, 1.0).pass);
    CHECK_FALSE(make_check("a", 1.0, Comparison::greater_than, 1.0).pass);
    CHECK_FALSE(make_check("a", std::numeric_limits<double>::quiet_NaN(), Comparison::at_most, 1.0).pass);
    RunReport r;
    CHECK(r.passed());
    r.checks.push_back(make_check("a", 2.0, Comparison::at_most, 1.0));
    CHECK_FALSE(r.passed());
}

TEST_CASE("floats carry 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

    RunReport r;
    r.scenario = "x";
    r.mode = "finite";
    r.checks.push_back(make_check("third", 1.0 / 3.0, Comparison::at_most, 0.1));
    r.checks.push_back(make_check("nan", std::numeric_limits<double>::quiet_NaN(), Comparison::at_most, 1.0));
    const std::string text = report_json(r);
    CHECK(text.find("0.33333333333333331") != std::string::npos);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["checks"][0]["value"].get<double>() == 1.0 / 3.0);
    CHECK(j["checks"][1]["value"].is_null());
    CHECK(j["passed"] == false);
    // Stable field order.
    const auto ordered = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (auto it = ordered.begin(); it != ordered.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"scenario", "mode", "seed", "passed", "wall_time_s", "checks",
                                           "outputs", "warnings"});
}

TEST_CASE("CSV table") {
    CsvTable t({"t", "x"});
    t.add_row({0.0, 0.1});
    t.add_row({1.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK(t.rows() == 2);
    CHECK(t.str() == "t,x\n0,0.10000000000000001\n1,nan\n");
    CHECK_THROWS_AS(t.add_row({1.0}), PreconditionError);
}

TEST_CASE("atomic writes") {
    const fs::path dir = scratch_dir("atomic");
    const fs::path file = dir / "nested" / "out.txt";
    write_file_atomic(file.string(), "first");
    write_file_atomic(file.string(), "second");
    CHECK(slurp(file) == "second");
    for (const auto& e : fs::directory_iterator(file.parent_path())) CHECK(e.path().filename() == "out.txt");
    CHECK_THROWS_AS(write_file_atomic("/proc/entfree/cannot", "x"), IoError);
}

TEST_CASE("finite scenario output") {
    const ScenarioResult r = execute_scenario(parse_config(kFinite));
    CHECK(r.report.passed());
    CHECK(r.report.scenario == "zz");
    CHECK(first_line(r.csv) == "t,purity,schmidt1,schmidt2,coupling_C,fichtre_residual,fidelity_meanfield");
    CHECK(std::count(r.csv.begin(), r.csv.end(), '\n') == 52);
    // Deterministic bytes.
    CHECK(execute_scenario(parse_config(kFinite)).csv == r.csv);
}

TEST_CASE("continuum scenario output") {
    const ScenarioResult r = execute_scenario(parse_config(kContinuum));
    CHECK(r.report.passed());
    CHECK(first_line(r.csv) == "t,norm,energy,entropy,mean_xA,mean_xB,classical_xA,classical_xB");
    CHECK(std::count(r.csv.begin(), r.csv.end(), '\n') == 7);
    CHECK(execute_scenario(parse_config(kContinuum)).csv == r.csv);
}

TEST_CASE("output directory resolution and files") {
    ScenarioConfig c = parse_config(kFinite);
    const fs::path dir = scratch_dir("outputs");
    c.output_dir = (dir / "from_config").string();
    ::unsetenv(kOutputDirEnv);
    CHECK(resolve_output_dir(c) == c.output_dir);
    ::setenv(kOutputDirEnv, (dir / "from_env").c_str(), 1);
    CHECK(resolve_output_dir(c) == (dir / "from_env").string());
    CHECK(resolve_output_dir(c, (dir / "flag").string()) == (dir / "flag").string());

    const RunReport r = run_scenario(c);
    ::unsetenv(kOutputDirEnv);
    CHECK(fs::exists(dir / "from_env" / "zz.csv"));
    CHECK(fs::exists(dir / "from_env" / "zz_report.json"));
    CHECK(r.outputs.size() == 2);
    const auto j = nlohmann::json::parse(slurp(dir / "from_env" / "zz_report.json"));
    CHECK(j["scenario"] == "zz");
    CHECK(j["passed"] == true);
}

TEST_CASE("presets are bundled and valid") {
    const std::vector<std::string> names = preset_names();
    for (const char* expected : {"factorisable_invariance", "sigma_zz_rate", "verify_all"})
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    for (const auto& n : names) {
        const auto text = preset_text(n);
        REQUIRE(text.has_value());
        CHECK_NOTHROW(parse_config(*text, n));
    }
    CHECK_FALSE(preset_text("no_such_preset").has_value());
}

TEST_CASE("bundled finite presets pass") {
    const ScenarioResult f = execute_scenario(parse_config(*preset_text("factorisable_invariance")));
    CHECK(f.report.passed());
    const ScenarioResult z = execute_scenario(parse_config(*preset_text("sigma_zz_rate")));
    CHECK(z.report.passed());
    bool saw_curvature = false;
    for (const auto& c : z.report.checks)
        if (c.name == "curvature_error") {
            saw_curvature = true;
            CHECK(c.value <= 1e-3);
        }
    CHECK(saw_curvature);
}

TEST_CASE("verification suite filtering") {
    const RunReport t0 = verify_suite("theorem0");
    REQUIRE_FALSE(t0.checks.empty());
    for (const auto& c : t0.checks) CHECK(c.name.rfind("theorem0.", 0) == 0);
    CHECK(t0.passed());

    const RunReport none = verify_suite("no_check_has_this_name");
    CHECK(none.checks.empty());
    CHECK(none.passed());
    CHECK(none.warnings.size() == 1);

    for (const auto& c : verification_checks()) {
        CHECK(c.criterion >= 1);
        CHECK(c.criterion <= 11);
    }
}
