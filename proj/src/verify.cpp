#include "entfree/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <regex>

#include "entfree/bipartite.hpp"
#include "entfree/config.hpp"
#include "entfree/continuum.hpp"
#include "entfree/dynamics.hpp"
#include "entfree/errors.hpp"
#include "entfree/random.hpp"
#include "entfree/scenario.hpp"

namespace entfree {

namespace {

using namespace continuum;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

CheckResult runtime_check(const Stopwatch& watch, double limit) {
    return make_check("runtime_s", watch.seconds(), Comparison::at_most, limit);
}

Potential1D bump(double strength, double range, double center = 0.0) {
    Potential1D v;
    v.kind = PotentialKind::gaussian_bump;
    v.strength = strength;
    v.range = range;
    v.center = center;
    return v;
}

Potential1D harmonic(double strength, double center) {
    Potential1D v;
    v.kind = PotentialKind::harmonic;
    v.strength = strength;
    v.center = center;
    return v;
}

// ---------------------------------------------------------------------------
// Finite-dimensional checks

std::vector<CheckResult> rate_law() {
    const Stopwatch watch;
    const std::vector<double> dts = {0.02, 0.01, 0.005, 0.0025};
    double worst_rel = 0.0;
    double worst_slope = 0.0;
    for (int s = 0; s < 20; ++s) {
        Rng rng(kSuiteSeed + static_cast<std::uint64_t>(s));
        const ComplexMatrix h = random_hermitian(9, rng);
        const ComplexVector a = random_state(3, rng);
        const ComplexVector b = random_state(3, rng);
        const PurityRateCheck r = purity_rate_check(h, a, b, 1.0, dts);
        worst_rel = std::max(worst_rel, std::abs(r.curvature_extrapolated - r.analytic_curvature) /
                                            std::abs(r.analytic_curvature));
        const double dev = std::isnan(r.first_derivative_slope) ? INFINITY
                                                                 : std::abs(r.first_derivative_slope - 2.0);
        worst_slope = std::max(worst_slope, dev);
    }
    return {make_check("curvature_relative_error", worst_rel, Comparison::at_most, 1e-4,
                       "20 random 3x3 systems, Richardson on dt = 0.005, 0.0025"),
            make_check("first_derivative_slope_deviation", worst_slope, Comparison::at_most, 0.2,
                       "max |slope - 2| of log|dP/dt| vs log dt"),
            runtime_check(watch, 5.0)};
}

std::vector<CheckResult> sufficient_direction() {
    const Stopwatch watch;
    double min_purity = 1.0;
    double min_fidelity = 1.0;
    for (int s = 0; s < 50; ++s) {
        Rng rng(kSuiteSeed + 100 + static_cast<std::uint64_t>(s));
        const Index dA = 2 + s % 3;
        const Index dB = 2 + (s / 3) % 3;
        std::vector<ScheduleSegment> segments;
        for (int k = 0; k < 4; ++k)
            segments.push_back({2.5, random_factorisable_hamiltonian(dA, dB, rng)});
        const BipartiteState psi0 =
            BipartiteState::product(random_state(dA, rng), random_state(dB, rng));
        const EvolutionTrace trace =
            propagate_exact(HamiltonianSchedule(std::move(segments)), psi0, 0.01, 1.0);
        min_purity = std::min(min_purity, *std::min_element(trace.purity.begin(), trace.purity.end()));
        min_fidelity = std::min(min_fidelity, *std::min_element(trace.fidelity_vs_meanfield.begin(),
                                                                trace.fidelity_vs_meanfield.end()));
    }
    return {make_check("min_purity", min_purity, Comparison::at_least, 1.0 - 1e-9,
                       "50 factorisable 4-segment schedules, 1000 steps each"),
            make_check("min_meanfield_fidelity", min_fidelity, Comparison::at_least, 1.0 - 1e-8),
            runtime_check(watch, 10.0)};
}

std::vector<CheckResult> necessary_direction() {
    const Stopwatch watch;
    double min_coupling_norm = INFINITY;
    double min_best_c = INFINITY;
    int found = 0;
    for (int s = 0; s < 20; ++s) {
        Rng rng(kSuiteSeed + 200 + static_cast<std::uint64_t>(s));
        const Index dA = 2 + s % 2;
        const Index dB = 2 + (s / 2) % 2;
        const ComplexMatrix h = random_hermitian(dA * dB, rng);
        min_coupling_norm = std::min(min_coupling_norm, factorise_hamiltonian(h, dA, dB).coupling_norm);
        const CouplingSearch search = search_biorthogonal_coupling(h, dA, dB, rng, 200, 1e-6);
        found += search.found ? 1 : 0;
        min_best_c = std::min(min_best_c, search.max_coupling);
    }
    return {make_check("min_coupling_norm", min_coupling_norm, Comparison::greater_than, 0.1),
            make_check("hamiltonians_with_coupling_found", found, Comparison::at_least, 20,
                       "weakest best C = " + format_double(min_best_c)),
            runtime_check(watch, 5.0)};
}

std::vector<CheckResult> classifier() {
    const Stopwatch watch;
    Rng rng(kSuiteSeed + 300);
    int wrong = 0;
    const ComplexMatrix id2 = identity(2);
    for (int k = 0; k < 100; ++k) {
        const ComplexMatrix ha = random_hermitian(2, rng);
        const ComplexMatrix hb = random_hermitian(2, rng);
        const double s = rng.uniform(-4.0, 4.0);
        const ComplexMatrix u = hermitian_expm(kron(ha, id2) + kron(id2, hb), s);
        wrong += classify_unitary_2q(u).tag == UnitaryClass::Tag::Local ? 0 : 1;
    }
    wrong += classify_unitary_2q(gates::swap()).tag == UnitaryClass::Tag::SwapLocal ? 0 : 1;
    wrong += classify_unitary_2q(gates::cnot()).tag == UnitaryClass::Tag::Entangling ? 0 : 1;
    for (int k = 0; k < 10; ++k) {
        const ComplexMatrix u = kron(random_unitary(2, rng), random_unitary(2, rng)) * gates::swap();
        wrong += classify_unitary_2q(u).tag == UnitaryClass::Tag::SwapLocal ? 0 : 1;
    }
    return {make_check("misclassified", wrong, Comparison::at_most, 0,
                       "100 local exponentials, SWAP, CNOT, 10 local*SWAP"),
            runtime_check(watch, 1.0)};
}

std::vector<CheckResult> sigma_zz() {
    const ComplexMatrix h = kron(gates::sigma_z(), gates::sigma_z());
    const ComplexVector plus = ComplexVector::Constant(2, std::sqrt(0.5));
    const auto schedule = HamiltonianSchedule::constant(h, 1.0);
    const EvolutionTrace trace = propagate_exact(schedule, BipartiteState::product(plus, plus), 0.01, 1.0);
    double purity_err = 0.0;
    double fidelity_err = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double t = trace.times[k];
        const double s2 = std::sin(2.0 * t);
        purity_err = std::max(purity_err, std::abs(trace.purity[k] - (1.0 - 0.5 * s2 * s2)));
        fidelity_err = std::max(fidelity_err,
                                std::abs(trace.fidelity_vs_meanfield[k] - std::cos(t) * std::cos(t)));
    }
    const auto mf = propagate_mean_field(schedule, {plus, plus, 0.0}, 0.01, 1.0);
    double drift = 0.0;
    for (const auto& m : mf)
        drift = std::max({drift, (m.psi_a - plus).norm(), (m.psi_b - plus).norm()});
    return {make_check("purity_error", purity_err, Comparison::at_most, 1e-8,
                       std::to_string(trace.size()) + " samples on [0, 1]"),
            make_check("meanfield_drift", drift, Comparison::at_most, 1e-8),
            make_check("fidelity_error", fidelity_err, Comparison::at_most, 1e-8, "against cos^2 t")};
}

std::vector<CheckResult> density_residual() {
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        Rng rng(kSuiteSeed + 400 + static_cast<std::uint64_t>(s));
        const ComplexMatrix h = random_factorisable_hamiltonian(2, 3, rng);
        worst = std::max(worst, fichtre_residual(h, random_density(2, rng), random_density(3, rng)));
    }
    return {make_check("factorisable_residual", worst, Comparison::at_most, 1e-11,
                       "20 random product density pairs")};
}

std::vector<CheckResult> counterexample() {
    Rng rng(kSuiteSeed + 500);
    const ComplexMatrix rho_a = random_density(2, rng);
    const ComplexMatrix rho_b = random_density(3, rng);
    const ComplexMatrix h = kron(rho_a, rho_b);
    const DensityTrace trace = propagate_density(HamiltonianSchedule::constant(h, 1.0), h, 0.01, 1.0);
    double drift = 0.0;
    for (const auto& rho : trace.states) drift = std::max(drift, hs_norm(rho - h));
    return {make_check("stationary_drift", drift, Comparison::at_most, 1e-10, "H = rho_A (x) rho_B"),
            make_check("residual", fichtre_residual(h, rho_a, rho_b), Comparison::greater_than, 1e-3)};
}

// ---------------------------------------------------------------------------
// Continuum checks

std::vector<CheckResult> cm_separability() {
    const Stopwatch watch;
    const Index n = 256;
    const double dx = 0.3;
    const double width = 1.0;
    // A at -6 moving right, B at +6 moving left, equal masses.
    ComSetup setup{Grid1D::centered(n, dx), Grid1D::centered(n, dx),
                   Grid1D::centered(2 * n, 0.5 * dx), Grid1D::centered(2 * n, dx), 1.0, 1.0};
    const ComplexVector g_cm = init_gaussian(setup.grid_cm, 0.0, 0.0, width / std::sqrt(2.0));
    const ComplexVector g_rel = init_gaussian(setup.grid_rel, -12.0, 2.0, width * std::sqrt(2.0));
    const auto r = com_separability_check(setup, g_cm, g_rel, bump(4.0, 0.5), 6.0, 0.004, 1.0, 250);
    return {make_check("l2_error", r.l2_error, Comparison::at_most, 5e-3, "n = 256, t = 6"),
            make_check("final_entropy_ab", r.final_entropy_ab, Comparison::at_least, 0.1),
            runtime_check(watch, 60.0)};
}

std::vector<CheckResult> test_particle() {
    const Stopwatch watch;
    TestParticleSetup setup{Grid1D::centered(256, 0.2), Grid1D::centered(128, 0.1), -8.0, 3.0, 1.5,
                            0.0, 1.0};
    PotentialSpec v;
    v.interaction = bump(1.0, 1.0);
    const auto r = test_particle_scenario(setup, 1000.0, 0.2, v, 6e-4, 5.0, 1.0, 1000);
    return {make_check("final_entropy_ratio1000", r.final_entropy, Comparison::at_most, 0.05),
            make_check("entropy_gap_vs_equal_mass", r.final_entropy_equal_mass - r.final_entropy,
                       Comparison::greater_than, 0.0,
                       "equal-mass entropy " + format_double(r.final_entropy_equal_mass)),
            runtime_check(watch, 120.0)};
}

std::vector<CheckResult> classical_limit() {
    const Grid1D grid = Grid1D::centered(256, 0.1);
    const double mass = 20.0;
    PotentialSpec v;
    v.interaction = bump(3.0, 2.0);
    const Factor a{grid, init_gaussian(grid, -5.0, mass, 0.2), mass};
    const Factor b{grid, init_gaussian(grid, 5.0, -mass, 0.2), mass};
    const double dt = 0.005;
    const double t_final = 10.0;
    const ClassicalTrace tr = classical_limit_propagate(a, b, v, dt, t_final, 1.0, 100);
    const auto psi0 = TwoParticleWavefunction::product(grid, a.psi, grid, b.psi, mass, mass);
    const ExactRun run = run_exact(psi0, v, dt, t_final, 1.0, 2000);
    return {make_check("max_mean_deviation", tr.max_deviation, Comparison::at_most, 2.0 * grid.dx(),
                       "linearised product vs velocity Verlet"),
            make_check("final_entropy", run.entropy.back(), Comparison::at_most, 0.05)};
}

std::vector<CheckResult> hartree() {
    const Grid1D grid = Grid1D::centered(128, 0.1);
    const double width = std::sqrt(0.5);
    const Factor a{grid, init_gaussian(grid, -1.5, 0.0, width), 1.0};
    const Factor b{grid, init_gaussian(grid, 1.5, 0.0, width), 1.0};
    const double dt = 5e-4;
    const double t_final = 5.0;
    std::vector<double> fidelity;
    double weak_entropy = 0.0;
    for (double scale : {0.1, 0.5, 2.0}) {
        PotentialSpec v;
        v.interaction = bump(scale, 1.0);
        v.external_a = harmonic(1.0, -1.5);
        v.external_b = harmonic(1.0, 1.5);
        const HartreeTrace mf = hartree_propagate(a, b, v, dt, t_final, 1.0, 10000);
        const ExactRun exact = run_exact(TwoParticleWavefunction::product(grid, a.psi, grid, b.psi), v,
                                         dt, t_final, 1.0, 10000);
        const Complex overlap = (mf.final_a.psi.adjoint() * exact.final_state.amplitudes *
                                 mf.final_b.psi.conjugate())(0, 0) *
                                grid.dx() * grid.dx();
        fidelity.push_back(std::norm(overlap));
        if (scale == 0.1) weak_entropy = exact.entropy.back();
    }
    RealMatrix separable(grid.n(), grid.n());
    for (Index i = 0; i < grid.n(); ++i)
        for (Index j = 0; j < grid.n(); ++j)
            separable(i, j) = std::sin(grid.x(i)) + 0.3 * grid.x(j) * grid.x(j);
    const Factor near_a{grid, init_gaussian(grid, -0.5, 0.0, 0.5), 1.0};
    const Factor near_b{grid, init_gaussian(grid, 0.5, 0.0, 0.5), 1.0};
    return {make_check("weak_coupling_fidelity", fidelity[0], Comparison::at_least, 0.99),
            make_check("weak_coupling_entropy", weak_entropy, Comparison::at_most, 0.01),
            make_check("fidelity_decrease", std::min(fidelity[0] - fidelity[1], fidelity[1] - fidelity[2]),
                       Comparison::greater_than, 0.0,
                       "fidelities " + format_double(fidelity[0]) + ", " + format_double(fidelity[1]) +
                           ", " + format_double(fidelity[2])),
            make_check("separable_residual", hartree_consistency_residual(near_a, near_b, separable),
                       Comparison::at_most, 1e-12),
            make_check("overlap_residual", hartree_consistency_residual(near_a, near_b, bump(1.0, 1.0)),
                       Comparison::greater_than, 1e-3)};
}

// ---------------------------------------------------------------------------
// Numerical hygiene

TwoParticleWavefunction scattering_pair(Index n, double dx) {
    const Grid1D g = Grid1D::centered(n, dx);
    return TwoParticleWavefunction::product(g, init_gaussian(g, -3.0, 1.0, 1.0), g,
                                            init_gaussian(g, 3.0, -1.0, 1.0));
}

std::vector<CheckResult> norm_conservation() {
    Rng rng(kSuiteSeed + 600);
    const ComplexMatrix h = random_hermitian(9, rng);
    const BipartiteState psi0 = BipartiteState::product(random_state(3, rng), random_state(3, rng));
    ExactOptions opts;
    opts.track_mean_field = false;
    const EvolutionTrace trace = propagate_exact(HamiltonianSchedule::constant(h, 10.0), psi0, 0.01, 1.0, opts);
    double finite = 0.0;
    for (double v : trace.norm) finite = std::max(finite, std::abs(v - 1.0));

    PotentialSpec v;
    v.interaction = bump(2.0, 1.0);
    const ExactRun run = run_exact(scattering_pair(128, 0.2), v, 0.002, 2.0, 1.0, 100, false);
    double grid = 0.0;
    for (double x : run.norm) grid = std::max(grid, std::abs(x - 1.0));
    return {make_check("finite_norm_drift", finite, Comparison::at_most, 1e-10, "1000 steps, 3x3"),
            make_check("grid_norm_drift", grid, Comparison::at_most, 1e-10, "1000 split steps, 128x128")};
}

std::vector<CheckResult> energy_conservation() {
    PotentialSpec v;
    v.interaction = bump(2.0, 1.0);
    v.external_a = harmonic(0.05, 0.0);
    v.external_b = harmonic(0.05, 0.0);
    const ExactRun run = run_exact(scattering_pair(128, 0.2), v, 0.002, 2.0, 1.0, 10, false);
    double drift = 0.0;
    for (double e : run.energy) drift = std::max(drift, std::abs(e - run.energy.front()) / std::abs(run.energy.front()));
    return {make_check("split_step_energy_drift", drift, Comparison::at_most, 1e-6, "1000 steps")};
}

std::vector<CheckResult> refinement() {
    PotentialSpec v;
    v.interaction = bump(2.0, 1.0);
    std::vector<ComplexMatrix> finals;
    for (int level = 0; level < 3; ++level) {
        const double scale = 1.0 / static_cast<double>(1 << level);
        const ExactRun run = run_exact(scattering_pair(64 << level, 0.4 * scale), v, 0.002 * scale, 1.0,
                                       1.0, 1 << 30, false);
        finals.push_back(run.final_state.amplitudes);
    }
    // Coarse nodes are every other fine node, so differences are taken there.
    auto change = [&](int level) {
        const ComplexMatrix& c = finals[level];
        const ComplexMatrix& f = finals[level + 1];
        double sum = 0.0;
        for (Index i = 0; i < c.rows(); ++i)
            for (Index j = 0; j < c.cols(); ++j) sum += std::norm(c(i, j) - f(2 * i, 2 * j));
        const double dx = 0.4 / static_cast<double>(1 << level);
        return std::sqrt(sum) * dx;
    };
    const double d1 = change(0);
    const double d2 = change(1);
    const double order = std::log2(d1 / d2);
    return {make_check("order_deviation", std::abs(order - 2.0), Comparison::at_most, 0.3,
                       "observed order " + format_double(order))};
}

std::vector<CheckResult> reproducibility() {
    const std::string finite_cfg = R"(
[scenario]
id = repro_finite
mode = finite
seed = 7
dt = 0.01
t_final = 2
[finite]
dim_a = 3
dim_b = 2
hamiltonian = random
segments = 2
initial_state = random_product
)";
    const std::string continuum_cfg = R"(
[scenario]
id = repro_continuum
mode = continuum
dt = 0.005
t_final = 0.5
[continuum]
n_a = 64
dx_a = 0.4
x0_a = -3
p0_a = 1
width_a = 1
x0_b = 3
p0_b = -1
width_b = 1
strength = 2
range = 1
)";
    int mismatches = 0;
    for (const std::string* text : {&finite_cfg, &continuum_cfg}) {
        const ScenarioConfig cfg = parse_config(*text, "builtin");
        const std::string first = execute_scenario(cfg).csv;
        const std::string second = execute_scenario(cfg).csv;
        mismatches += (first == second && !first.empty()) ? 0 : 1;
    }
    return {make_check("rerun_mismatches", mismatches, Comparison::at_most, 0,
                       "finite and continuum CSV compared byte for byte")};
}

}  // namespace

const std::vector<VerificationCheck>& verification_checks() {
    static const std::vector<VerificationCheck> checks = {
        {"rate_law", 1, "short-time purity curvature equals -4C/hbar^2", rate_law},
        {"main_theorem.sufficient", 2, "factorisable Hamiltonians keep products pure", sufficient_direction},
        {"main_theorem.necessary", 3, "non-factorisable Hamiltonians couple some product state",
         necessary_direction},
        {"theorem0.classifier", 4, "two-qubit unitary classification", classifier},
        {"sigma_zz.closed_form", 5, "sigma_z sigma_z from |++>", sigma_zz},
        {"theorem2.residual", 6, "product-density residual vanishes for factorisable H", density_residual},
        {"theorem2.counterexample", 6, "H = rho_A rho_B: stationary yet non-zero residual", counterexample},
        {"continuum.cm_separability", 7, "centre-of-mass separation of equal-mass scattering",
         cm_separability},
        {"continuum.test_particle", 8, "heavy target stays nearly unentangled", test_particle},
        {"continuum.classical_limit", 9, "narrow packets follow Newtonian means", classical_limit},
        {"continuum.hartree", 10, "Hartree product vs exact solution", hartree},
        {"hygiene.norm", 11, "norm conservation", norm_conservation},
        {"hygiene.energy", 11, "split-step energy conservation", energy_conservation},
        {"hygiene.refinement", 11, "second-order convergence under refinement", refinement},
        {"hygiene.reproducibility", 11, "byte-identical reruns", reproducibility},
    };
    return checks;
}

RunReport verify_suite(const std::string& filter) {
    RunReport report;
    report.scenario = "verify";
    report.mode = "verify";
    report.seed = kSuiteSeed;
    std::regex pattern;
    try {
        pattern = std::regex(filter);
    } catch (const std::regex_error& e) {
        throw ConfigError("invalid filter pattern '" + filter + "': " + e.what());
    }
    const Stopwatch watch;
    for (const auto& check : verification_checks()) {
        if (!filter.empty() && !std::regex_search(check.id, pattern)) continue;
        for (CheckResult r : check.run()) {
            r.name = check.id + "." + r.name;
            report.checks.push_back(std::move(r));
        }
    }
    if (report.checks.empty()) report.warnings.push_back("filter '" + filter + "' matched no checks");
    report.wall_time_s = watch.seconds();
    return report;
}

}  // namespace entfree
