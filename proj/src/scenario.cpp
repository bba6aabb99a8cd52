#include "entfree/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include "entfree/bipartite.hpp"
#include "entfree/continuum.hpp"
#include "entfree/dynamics.hpp"
#include "entfree/errors.hpp"
#include "entfree/random.hpp"
#include "entfree/verify.hpp"

namespace entfree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename Range>
double max_relative_drift(const Range& values) {
    double drift = 0.0;
    const double ref = values.front();
    const double scale = std::abs(ref) > 0.0 ? std::abs(ref) : 1.0;
    for (double v : values) drift = std::max(drift, std::abs(v - ref) / scale);
    return drift;
}

template <typename Range>
double max_deviation_from_one(const Range& values) {
    double d = 0.0;
    for (double v : values) d = std::max(d, std::abs(v - 1.0));
    return d;
}

ComplexMatrix build_hamiltonian(const ScenarioConfig& cfg, Rng& rng) {
    const FiniteConfig& f = cfg.finite;
    const Index d = f.dim_a * f.dim_b;
    switch (f.hamiltonian) {
        case HamiltonianKind::sigma_zz:
            return f.hamiltonian_scale * kron(gates::sigma_z(), gates::sigma_z());
        case HamiltonianKind::zero: return ComplexMatrix::Zero(d, d);
        case HamiltonianKind::random: return random_hermitian(d, rng, f.hamiltonian_scale);
        case HamiltonianKind::random_factorisable:
            return random_factorisable_hamiltonian(f.dim_a, f.dim_b, rng, f.hamiltonian_scale);
        case HamiltonianKind::file: return f.hamiltonian_scale * load_matrix(f.hamiltonian_file);
    }
    throw ConfigError("unknown hamiltonian kind");
}

std::pair<ComplexVector, ComplexVector> product_factors(const ScenarioConfig& cfg, Rng& rng) {
    const FiniteConfig& f = cfg.finite;
    switch (f.initial_state) {
        case InitialStateKind::plus_plus:
            return {ComplexVector::Constant(f.dim_a, 1.0 / std::sqrt(static_cast<double>(f.dim_a))),
                    ComplexVector::Constant(f.dim_b, 1.0 / std::sqrt(static_cast<double>(f.dim_b)))};
        case InitialStateKind::basis:
            return {ComplexVector::Unit(f.dim_a, 0), ComplexVector::Unit(f.dim_b, 0)};
        case InitialStateKind::random_product: {
            ComplexVector a = random_state(f.dim_a, rng);
            ComplexVector b = random_state(f.dim_b, rng);
            return {a, b};
        }
        case InitialStateKind::random: break;
    }
    throw PreconditionError("initial state is not a product");
}

ScenarioResult run_finite(const ScenarioConfig& cfg) {
    const FiniteConfig& f = cfg.finite;
    Rng rng(cfg.seed);
    std::vector<ScheduleSegment> segments;
    for (int s = 0; s < f.segments; ++s)
        segments.push_back({cfg.t_final / f.segments, build_hamiltonian(cfg, rng)});
    const HamiltonianSchedule schedule(std::move(segments));

    std::optional<std::pair<ComplexVector, ComplexVector>> factors;
    BipartiteState psi0 = [&] {
        if (f.initial_state == InitialStateKind::random)
            return BipartiteState(f.dim_a, f.dim_b, random_state(f.dim_a * f.dim_b, rng));
        factors = product_factors(cfg, rng);
        return BipartiteState::product(factors->first, factors->second);
    }();

    ExactOptions options;
    options.track_mean_field = f.track_mean_field;
    const EvolutionTrace trace = propagate_exact(schedule, psi0, cfg.dt, cfg.hbar, options);

    CsvTable csv(kFiniteColumns);
    for (std::size_t k = 0; k < trace.size(); ++k)
        csv.add_row({trace.times[k], trace.purity[k], trace.schmidt_top2[k].first,
                     trace.schmidt_top2[k].second, trace.coupling_c[k], trace.fichtre_residual[k],
                     trace.fidelity_vs_meanfield[k]});

    ScenarioResult out;
    RunReport& report = out.report;
    const ChecksConfig& k = cfg.checks;
    report.checks.push_back(make_check("norm_drift", max_deviation_from_one(trace.norm),
                                       Comparison::at_most, k.max_norm_drift.value_or(1e-10)));
    const double min_purity = *std::min_element(trace.purity.begin(), trace.purity.end());
    if (k.min_purity)
        report.checks.push_back(make_check("min_purity", min_purity, Comparison::at_least, *k.min_purity));

    if (!f.rate_dts.empty()) {
        const ComplexMatrix& h0 = schedule.segments().front().h;
        const PurityRateCheck rate =
            purity_rate_check(h0, factors->first, factors->second, cfg.hbar, f.rate_dts);
        const std::string detail = "analytic -4C/hbar^2 = " + format_double(rate.analytic_curvature);
        if (k.curvature_expected) {
            report.checks.push_back(make_check("curvature_error",
                                               std::abs(rate.curvature_extrapolated - *k.curvature_expected),
                                               Comparison::at_most, k.curvature_tolerance,
                                               "curvature " + format_double(rate.curvature_extrapolated)));
        }
        if (rate.analytic_curvature != 0.0) {
            report.checks.push_back(make_check(
                "curvature_relative_error",
                std::abs(rate.curvature_extrapolated - rate.analytic_curvature) /
                    std::abs(rate.analytic_curvature),
                Comparison::at_most, k.rate_relative_tolerance, detail));
        } else {
            report.checks.push_back(make_check("curvature_abs", std::abs(rate.curvature_extrapolated),
                                               Comparison::at_most, 1e-10, detail));
        }
    }
    out.csv = csv.str();
    return out;
}

continuum::PotentialSpec potential_of(const ContinuumConfig& c) { return c.potential; }

ScenarioResult run_continuum(const ScenarioConfig& cfg) {
    using namespace continuum;
    const ContinuumConfig& c = cfg.continuum;
    const ChecksConfig& k = cfg.checks;
    const Grid1D ga = Grid1D::centered(c.n_a, c.dx_a);
    const Grid1D gb = Grid1D::centered(c.n_b, c.dx_b);
    const ComplexVector a0 = init_gaussian(ga, c.packet_a.x0, c.packet_a.p0, c.packet_a.width, cfg.hbar);
    const ComplexVector b0 = init_gaussian(gb, c.packet_b.x0, c.packet_b.p0, c.packet_b.width, cfg.hbar);
    const PotentialSpec v = potential_of(c);
    const auto psi0 = TwoParticleWavefunction::product(ga, a0, gb, b0, c.mass_a, c.mass_b);

    ScenarioResult out;
    RunReport& report = out.report;
    CsvTable csv(kContinuumColumns);
    auto entropy_checks = [&](double final_entropy) {
        if (k.max_final_entropy)
            report.checks.push_back(make_check("final_entropy", final_entropy, Comparison::at_most,
                                               *k.max_final_entropy));
        if (k.min_final_entropy)
            report.checks.push_back(make_check("final_entropy", final_entropy, Comparison::at_least,
                                               *k.min_final_entropy));
    };

    if (c.engine == Engine::exact) {
        std::optional<AbsorbingMask> mask;
        if (c.mask_width > 0.0) mask = AbsorbingMask{c.mask_width, c.mask_exponent};
        const ExactRun run = run_exact(psi0, v, cfg.dt, cfg.t_final, cfg.hbar, c.sample_every, true, mask);
        for (std::size_t i = 0; i < run.times.size(); ++i)
            csv.add_row({run.times[i], run.norm[i], run.energy[i], run.entropy[i], run.mean_a[i],
                         run.mean_b[i], kNaN, kNaN});
        if (!mask || k.max_norm_drift)
            report.checks.push_back(make_check("norm_drift", max_deviation_from_one(run.norm),
                                               Comparison::at_most, k.max_norm_drift.value_or(1e-10)));
        if (!mask || k.max_energy_drift)
            report.checks.push_back(make_check("energy_drift", max_relative_drift(run.energy),
                                               Comparison::at_most, k.max_energy_drift.value_or(1e-6)));
        entropy_checks(run.entropy.back());
    } else if (c.engine == Engine::hartree) {
        const HartreeTrace tr = hartree_propagate({ga, a0, c.mass_a}, {gb, b0, c.mass_b}, v, cfg.dt,
                                                  cfg.t_final, cfg.hbar, c.sample_every);
        std::vector<double> norm_drift;
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            csv.add_row({tr.times[i], tr.norm_a[i] * tr.norm_b[i], tr.energy[i], 0.0, tr.mean_a[i],
                         tr.mean_b[i], kNaN, kNaN});
            norm_drift.push_back(tr.norm_a[i]);
            norm_drift.push_back(tr.norm_b[i]);
        }
        report.checks.push_back(make_check("norm_drift", max_deviation_from_one(norm_drift),
                                           Comparison::at_most, k.max_norm_drift.value_or(1e-8)));
        report.checks.push_back(make_check("energy_drift", max_relative_drift(tr.energy),
                                           Comparison::at_most, k.max_energy_drift.value_or(1e-5)));
    } else {
        const ClassicalTrace tr = classical_limit_propagate({ga, a0, c.mass_a}, {gb, b0, c.mass_b}, v,
                                                            cfg.dt, cfg.t_final, cfg.hbar, c.sample_every);
        // The full solver runs alongside and supplies energy and entropy.
        const ExactRun run = run_exact(psi0, v, cfg.dt, cfg.t_final, cfg.hbar, c.sample_every);
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            csv.add_row({tr.times[i], run.norm[i], run.energy[i], run.entropy[i], tr.mean_a[i],
                         tr.mean_b[i], tr.classical_a[i], tr.classical_b[i]});
        const double dx = std::min(c.dx_a, c.dx_b);
        report.checks.push_back(make_check("classical_deviation", tr.max_deviation, Comparison::at_most,
                                           k.max_classical_deviation_dx * dx));
        report.checks.push_back(make_check("norm_drift", max_deviation_from_one(run.norm),
                                           Comparison::at_most, k.max_norm_drift.value_or(1e-10)));
        if (k.max_energy_drift)
            report.checks.push_back(make_check("energy_drift", max_relative_drift(run.energy),
                                               Comparison::at_most, *k.max_energy_drift));
        entropy_checks(run.entropy.back());
    }
    out.csv = csv.str();
    return out;
}

}  // namespace

ScenarioResult execute_scenario(const ScenarioConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult out;
    switch (config.mode) {
        case Mode::finite: out = run_finite(config); break;
        case Mode::continuum: out = run_continuum(config); break;
        case Mode::verify: out.report = verify_suite(config.filter); break;
    }
    out.report.scenario = config.id;
    out.report.mode = to_string(config.mode);
    out.report.seed = config.seed;
    out.report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string resolve_output_dir(const ScenarioConfig& config,
                               const std::optional<std::string>& override_dir) {
    if (override_dir && !override_dir->empty()) return *override_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return config.output_dir;
}

RunReport run_scenario(const ScenarioConfig& config, const std::optional<std::string>& override_dir) {
    ScenarioResult result = execute_scenario(config);
    const std::filesystem::path dir(resolve_output_dir(config, override_dir));
    if (!result.csv.empty()) {
        const std::string csv_path = (dir / (config.id + ".csv")).string();
        write_file_atomic(csv_path, result.csv);
        result.report.outputs.push_back(csv_path);
    }
    const std::string json_path = (dir / (config.id + "_report.json")).string();
    result.report.outputs.push_back(json_path);
    write_file_atomic(json_path, report_json(result.report));
    return result.report;
}

}  // namespace entfree
