// Python bindings for the core library and the scenario runner.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "entfree/bipartite.hpp"
#include "entfree/config.hpp"
#include "entfree/continuum.hpp"
#include "entfree/dynamics.hpp"
#include "entfree/errors.hpp"
#include "entfree/presets.hpp"
#include "entfree/random.hpp"
#include "entfree/report.hpp"
#include "entfree/scenario.hpp"
#include "entfree/verify.hpp"

namespace py = pybind11;
using namespace entfree;

namespace {

Subsystem subsystem(const std::string& s) {
    if (s == "A" || s == "a") return Subsystem::A;
    if (s == "B" || s == "b") return Subsystem::B;
    throw PreconditionError("subsystem must be 'A' or 'B'");
}

continuum::Potential1D potential(const std::string& kind, double strength, double range, double center) {
    continuum::Potential1D v;
    if (kind == "gaussian_bump") v.kind = continuum::PotentialKind::gaussian_bump;
    else if (kind == "soft_coulomb") v.kind = continuum::PotentialKind::soft_coulomb;
    else if (kind == "harmonic") v.kind = continuum::PotentialKind::harmonic;
    else throw PreconditionError("unknown potential kind '" + kind + "'");
    v.strength = strength;
    v.range = range;
    v.center = center;
    v.validate();
    return v;
}

py::dict report_dict(const RunReport& r) {
    py::list checks;
    for (const auto& c : r.checks)
        checks.append(py::dict(py::arg("name") = c.name, py::arg("value") = c.value,
                               py::arg("threshold") = c.threshold,
                               py::arg("comparison") = comparison_symbol(c.comparison),
                               py::arg("passed") = c.pass, py::arg("detail") = c.detail));
    return py::dict(py::arg("scenario") = r.scenario, py::arg("mode") = r.mode, py::arg("seed") = r.seed,
                    py::arg("passed") = r.passed(), py::arg("wall_time_s") = r.wall_time_s,
                    py::arg("checks") = checks, py::arg("outputs") = r.outputs,
                    py::arg("warnings") = r.warnings);
}

}  // namespace

PYBIND11_MODULE(_entfree, m) {
    m.doc() = "Entanglement-free evolution laboratory";

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    // numerics
    m.def("kron", py::overload_cast<const ComplexMatrix&, const ComplexMatrix&>(&kron), py::arg("a"),
          py::arg("b"));
    m.def("partial_trace",
          [](const ComplexMatrix& mat, const std::string& traced, Index dA, Index dB) {
              return partial_trace(mat, subsystem(traced), dA, dB);
          },
          py::arg("m"), py::arg("traced"), py::arg("dim_a"), py::arg("dim_b"));
    m.def("hermitian_expm", &hermitian_expm, py::arg("h"), py::arg("s"), py::arg("tol") = kHermitianTol);
    m.def("hs_inner", &hs_inner, py::arg("a"), py::arg("b"));

    // bipartite
    m.def("schmidt_coefficients",
          [](const ComplexVector& psi, Index dA, Index dB) {
              return schmidt_decompose(BipartiteState(dA, dB, psi)).coefficients;
          },
          py::arg("psi"), py::arg("dim_a"), py::arg("dim_b"));
    m.def("purity", [](const ComplexVector& psi, Index dA, Index dB) { return purity(BipartiteState(dA, dB, psi)); },
          py::arg("psi"), py::arg("dim_a"), py::arg("dim_b"));
    m.def("is_product",
          [](const ComplexVector& psi, Index dA, Index dB, double tol) {
              return is_product(BipartiteState(dA, dB, psi), tol);
          },
          py::arg("psi"), py::arg("dim_a"), py::arg("dim_b"), py::arg("tol") = kProductTol);
    m.def("factorise_hamiltonian",
          [](const ComplexMatrix& h, Index dA, Index dB) {
              const HamiltonianDecomposition d = factorise_hamiltonian(h, dA, dB);
              return py::dict(py::arg("local_a") = d.local_a, py::arg("local_b") = d.local_b,
                              py::arg("scalar") = d.scalar, py::arg("coupling") = d.coupling,
                              py::arg("coupling_norm") = d.coupling_norm);
          },
          py::arg("h"), py::arg("dim_a"), py::arg("dim_b"));
    m.def("coupling_coefficient", &coupling_coefficient, py::arg("h"), py::arg("psi_a"), py::arg("psi_b"));
    m.def("classify_unitary_2q",
          [](const ComplexMatrix& u, double tol) {
              const UnitaryClass c = classify_unitary_2q(u, tol);
              return py::make_tuple(std::string(to_string(c.tag)), c.operator_schmidt_coefficients);
          },
          py::arg("u"), py::arg("tol") = kClassifierTol);

    // dynamics
    m.def("propagate_exact",
          [](const std::vector<std::pair<double, ComplexMatrix>>& schedule, const ComplexVector& psi0, Index dA,
             Index dB, double dt, double hbar) {
              std::vector<ScheduleSegment> segs;
              for (const auto& [d, h] : schedule) segs.push_back({d, h});
              const EvolutionTrace t =
                  propagate_exact(HamiltonianSchedule(std::move(segs)), BipartiteState(dA, dB, psi0), dt, hbar);
              std::vector<double> s1, s2;
              for (const auto& [a, b] : t.schmidt_top2) {
                  s1.push_back(a);
                  s2.push_back(b);
              }
              return py::dict(py::arg("t") = t.times, py::arg("norm") = t.norm, py::arg("purity") = t.purity,
                              py::arg("schmidt1") = s1, py::arg("schmidt2") = s2,
                              py::arg("coupling_C") = t.coupling_c,
                              py::arg("fichtre_residual") = t.fichtre_residual,
                              py::arg("fidelity_meanfield") = t.fidelity_vs_meanfield);
          },
          py::arg("schedule"), py::arg("psi0"), py::arg("dim_a"), py::arg("dim_b"), py::arg("dt"),
          py::arg("hbar") = 1.0, "schedule is a list of (duration, H) pairs");
    m.def("effective_generators",
          [](const ComplexMatrix& h, const ComplexVector& a, const ComplexVector& b) {
              const EffectiveGenerators g = effective_generators(h, a, b);
              return py::make_tuple(g.v_a, g.v_b);
          },
          py::arg("h"), py::arg("psi_a"), py::arg("psi_b"));
    m.def("fichtre_residual", &fichtre_residual, py::arg("h"), py::arg("rho_a"), py::arg("rho_b"));
    m.def("purity_rate_check",
          [](const ComplexMatrix& h, const ComplexVector& a, const ComplexVector& b, double hbar,
             const std::vector<double>& dts) {
              const PurityRateCheck r = purity_rate_check(h, a, b, hbar, dts);
              return py::dict(py::arg("dts") = r.dts, py::arg("first_derivative") = r.first_derivative,
                              py::arg("curvature") = r.curvature,
                              py::arg("curvature_extrapolated") = r.curvature_extrapolated,
                              py::arg("analytic_curvature") = r.analytic_curvature,
                              py::arg("coupling_C") = r.coupling_c,
                              py::arg("first_derivative_slope") = r.first_derivative_slope);
          },
          py::arg("h"), py::arg("psi_a"), py::arg("psi_b"), py::arg("hbar"), py::arg("dts"));

    // seeded random instances
    m.def("random_hermitian", [](Index n, std::uint64_t seed) { Rng r(seed); return random_hermitian(n, r); },
          py::arg("n"), py::arg("seed"));
    m.def("random_state", [](Index n, std::uint64_t seed) { Rng r(seed); return random_state(n, r); },
          py::arg("n"), py::arg("seed"));
    m.def("random_factorisable_hamiltonian",
          [](Index dA, Index dB, std::uint64_t seed) { Rng r(seed); return random_factorisable_hamiltonian(dA, dB, r); },
          py::arg("dim_a"), py::arg("dim_b"), py::arg("seed"));

    // continuum
    m.def("init_gaussian",
          [](Index n, double dx, double x0, double p0, double width, double hbar) {
              return continuum::init_gaussian(continuum::Grid1D::centered(n, dx), x0, p0, width, hbar);
          },
          py::arg("n"), py::arg("dx"), py::arg("x0"), py::arg("p0"), py::arg("width"), py::arg("hbar") = 1.0,
          "Gaussian packet on the centred grid of n points spaced dx");
    m.def("entanglement_entropy",
          py::overload_cast<const ComplexMatrix&, double, double>(&continuum::entanglement_entropy),
          py::arg("amplitudes"), py::arg("dx_a"), py::arg("dx_b"));
    m.def("run_exact",
          [](Index n, double dx, const ComplexVector& psi_a, const ComplexVector& psi_b, double mass_a,
             double mass_b, const std::string& kind, double strength, double range, double dt, double t_final,
             double hbar, int sample_every) {
              const continuum::Grid1D g = continuum::Grid1D::centered(n, dx);
              const auto psi0 = continuum::TwoParticleWavefunction::product(g, psi_a, g, psi_b, mass_a, mass_b);
              const continuum::PotentialSpec v{potential(kind, strength, range, 0.0), std::nullopt, std::nullopt};
              const continuum::ExactRun r = continuum::run_exact(psi0, v, dt, t_final, hbar, sample_every);
              return py::dict(py::arg("t") = r.times, py::arg("norm") = r.norm, py::arg("energy") = r.energy,
                              py::arg("entropy") = r.entropy, py::arg("mean_xA") = r.mean_a,
                              py::arg("mean_xB") = r.mean_b, py::arg("final") = r.final_state.amplitudes);
          },
          py::arg("n"), py::arg("dx"), py::arg("psi_a"), py::arg("psi_b"), py::arg("mass_a") = 1.0,
          py::arg("mass_b") = 1.0, py::arg("potential") = "gaussian_bump", py::arg("strength") = 0.0,
          py::arg("range") = 1.0, py::arg("dt") = 0.001, py::arg("t_final") = 1.0, py::arg("hbar") = 1.0,
          py::arg("sample_every") = 1, "Exact two-particle run on a common centred grid");

    // scenarios
    m.def("run_config",
          [](const std::string& text, std::optional<std::string> output_dir) {
              const ScenarioConfig cfg = parse_config(text);
              if (output_dir) return report_dict(run_scenario(cfg, output_dir));
              const ScenarioResult r = execute_scenario(cfg);
              py::dict d = report_dict(r.report);
              d["csv"] = r.csv;
              return d;
          },
          py::arg("text"), py::arg("output_dir") = py::none(),
          "Run an INI scenario. Without output_dir nothing is written and the CSV text is returned.");
    m.def("verify", [](const std::string& filter) { return report_dict(verify_suite(filter)); },
          py::arg("filter") = "");
    m.def("preset_names", &preset_names);
    m.def("preset_text", &preset_text, py::arg("name"));
}
