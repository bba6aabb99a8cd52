#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "entfree/dynamics.hpp"
#include "entfree/errors.hpp"
#include "entfree/random.hpp"

using namespace entfree;

namespace {

ComplexVector plus_x() { return ComplexVector::Constant(2, std::sqrt(0.5)); }
ComplexVector minus_x() {
    ComplexVector v = plus_x();
    v(1) = -v(1);
    return v;
}

ComplexMatrix zz() { return kron(gates::sigma_z(), gates::sigma_z()); }

// cos(t/hbar)|+x,+x> - i sin(t/hbar)|-x,-x>
ComplexVector zz_closed_form(double t, double hbar) {
    return std::cos(t / hbar) * kron(plus_x(), plus_x()) -
           Complex(0.0, std::sin(t / hbar)) * kron(minus_x(), minus_x());
}

}  // namespace

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(HamiltonianSchedule({}), PreconditionError);
    CHECK_THROWS_AS(HamiltonianSchedule::constant(zz(), 0.0), PreconditionError);
    CHECK_THROWS_AS(HamiltonianSchedule({{1.0, zz()}, {1.0, identity(2)}}), PreconditionError);
    CHECK_THROWS_AS(HamiltonianSchedule::constant(ComplexMatrix::Ones(4, 4) * Complex(0, 1), 1.0),
                    PreconditionError);
    const HamiltonianSchedule s({{1.0, zz()}, {0.5, identity(4)}});
    CHECK(s.duration() == doctest::Approx(1.5));
    CHECK(s.steps_per_segment(0.25) == std::vector<std::int64_t>{4, 2});
    CHECK_THROWS_AS(s.steps_per_segment(0.3), PreconditionError);
}

TEST_CASE("sigma_z (x) sigma_z closed form") {
    for (double hbar : {1.0, 0.5}) {
        const double dt = 0.01;
        ExactOptions opt;
        opt.keep_states = true;
        const EvolutionTrace tr = propagate_exact(HamiltonianSchedule::constant(zz(), 2.0),
                                                  BipartiteState::product(plus_x(), plus_x()), dt, hbar, opt);
        REQUIRE(tr.size() == 201);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double t = tr.times[k];
            CHECK(t == doctest::Approx(k * dt));
            const double s = std::sin(2.0 * t / hbar);
            CHECK(std::abs(tr.purity[k] - (1.0 - 0.5 * s * s)) <= 1e-10);
            CHECK(std::abs(tr.fidelity_vs_meanfield[k] - std::pow(std::cos(t / hbar), 2)) <= 1e-10);
            // Compare up to the global phase.
            const ComplexVector expected = zz_closed_form(t, hbar);
            CHECK(std::abs(std::abs(expected.dot(tr.states[k])) - 1.0) <= 1e-10);
            CHECK(std::abs(tr.norm[k] - 1.0) <= 1e-12);
        }
        CHECK(tr.coupling_c.front() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
    Rng rng(1);
    const BipartiteState psi0(3, 2, random_state(6, rng));
    ExactOptions opt;
    opt.keep_states = true;
    const EvolutionTrace tr =
        propagate_exact(HamiltonianSchedule::constant(ComplexMatrix::Zero(6, 6), 1.0), psi0, 0.1, 1.0, opt);
    for (const ComplexVector& s : tr.states) CHECK((s - psi0.amplitudes()).cwiseAbs().maxCoeff() == 0.0);
    for (double c : tr.coupling_c) CHECK(c == 0.0);
}

TEST_CASE("factorisable Hamiltonians keep product states product") {
    Rng rng(2);
    for (int t = 0; t < 5; ++t) {
        std::vector<ScheduleSegment> segs;
        for (int s = 0; s < 3; ++s) segs.push_back({1.0, random_factorisable_hamiltonian(3, 2, rng)});
        const BipartiteState psi0 = BipartiteState::product(random_state(3, rng), random_state(2, rng));
        const EvolutionTrace tr = propagate_exact(HamiltonianSchedule(std::move(segs)), psi0, 0.002);
        CHECK(tr.size() == 1501);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            CHECK(tr.purity[k] >= 1.0 - 1e-10);
            CHECK(std::abs(tr.norm[k] - 1.0) <= 1e-10);
            CHECK(tr.fidelity_vs_meanfield[k] >= 1.0 - 1e-8);
            CHECK(tr.fichtre_residual[k] <= 1e-10);
        }
    }
}

TEST_CASE("exact propagation rejects bad input") {
    const BipartiteState psi0 = BipartiteState::product(plus_x(), plus_x());
    CHECK_THROWS_AS(propagate_exact(HamiltonianSchedule::constant(identity(6), 1.0), psi0, 0.1),
                    PreconditionError);
    CHECK_THROWS_AS(propagate_exact(HamiltonianSchedule::constant(zz(), 1.0), psi0, 0.0), PreconditionError);
    CHECK_THROWS_AS(propagate_exact(HamiltonianSchedule::constant(zz(), 1.0), psi0, 0.1, -1.0),
                    PreconditionError);
}

TEST_CASE("density propagation") {
    Rng rng(3);
    const ComplexMatrix h = random_hermitian(6, rng);
    const HamiltonianSchedule sched = HamiltonianSchedule::constant(h, 1.0);
    const BipartiteState psi0 = BipartiteState::product(random_state(2, rng), random_state(3, rng));
    ExactOptions opt;
    opt.keep_states = true;
    opt.track_mean_field = false;
    const EvolutionTrace tr = propagate_exact(sched, psi0, 0.01, 1.0, opt);
    const DensityTrace dens = propagate_density(sched, psi0.projector(), 0.01);
    REQUIRE(dens.states.size() == tr.states.size());
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        const ComplexMatrix proj = tr.states[k] * tr.states[k].adjoint();
        CHECK(hs_norm(dens.states[k] - proj) <= 1e-9);
        CHECK(std::abs(dens.states[k].trace() - Complex(1.0)) <= 1e-10);
        CHECK(is_hermitian(dens.states[k], 1e-10));
    }

    // Maximally mixed states are stationary.
    const DensityTrace mixed = propagate_density(sched, identity(6) / 6.0, 0.05);
    for (const ComplexMatrix& r : mixed.states) CHECK(max_abs_diff(r, identity(6) / 6.0) <= 1e-12);

    CHECK_THROWS_AS(propagate_density(sched, identity(6), 0.1), PreconditionError);
    ComplexMatrix neg = identity(6) / 6.0;
    neg(0, 0) = -0.1;
    neg(1, 1) += 0.1 + 1.0 / 6.0;
    CHECK_THROWS_AS(validate_density(neg), PreconditionError);
}

TEST_CASE("a mixed product state is stationary under its own Hamiltonian") {
    Rng rng(4);
    const ComplexMatrix rho = kron(random_density(2, rng), random_density(2, rng));
    const DensityTrace tr = propagate_density(HamiltonianSchedule::constant(rho, 5.0), rho, 0.05);
    for (const ComplexMatrix& r : tr.states) CHECK(max_abs_diff(r, rho) <= 1e-12);
}

TEST_CASE("effective generators") {
    Rng rng(5);
    const ComplexMatrix ha = random_hermitian(3, rng);
    const ComplexMatrix hb = random_hermitian(2, rng);
    const ComplexMatrix h = kron(ha, identity(2)) + kron(identity(3), hb);
    for (int t = 0; t < 20; ++t) {
        const ComplexVector a = random_state(3, rng);
        const ComplexVector b = random_state(2, rng);
        const EffectiveGenerators g = effective_generators(h, a, b);
        const Complex hb_mean = b.dot(hb * b);
        CHECK((g.v_a - (ha * a + hb_mean * a)).norm() <= 1e-12);
        CHECK((g.v_b - (hb * b - hb_mean * b)).norm() <= 1e-12);
        CHECK((kron(g.v_a, b) + kron(a, g.v_b) - h * kron(a, b)).norm() <= 1e-12);
    }
    const EffectiveGenerators z = effective_generators(ComplexMatrix::Zero(6, 6), random_state(3, rng),
                                                       random_state(2, rng));
    CHECK(z.v_a.norm() == 0.0);
    CHECK(z.v_b.norm() == 0.0);
    CHECK_THROWS_AS(effective_generators(h, random_state(2, rng), random_state(2, rng)), PreconditionError);
}

TEST_CASE("reconstruction identity holds whenever the coupling coefficient vanishes") {
    // |0>|0> is an eigenvector of sigma_z (x) sigma_z, so C = 0 there even
    // though the Hamiltonian does not factorise.
    const ComplexVector up = ComplexVector::Unit(2, 0);
    REQUIRE(coupling_coefficient(zz(), up, up) <= 1e-14);
    const EffectiveGenerators g = effective_generators(zz(), up, up);
    CHECK((kron(g.v_a, up) + kron(up, g.v_b) - zz() * kron(up, up)).norm() <= 1e-10);
}

TEST_CASE("mean-field propagation") {
    Rng rng(6);
    const ComplexMatrix h = random_factorisable_hamiltonian(2, 3, rng);
    const HamiltonianSchedule sched = HamiltonianSchedule::constant(h, 1.0);
    const MeanFieldState mf0{random_state(2, rng), random_state(3, rng), 0.0};
    const std::vector<MeanFieldState> mf = propagate_mean_field(sched, mf0, 1e-3);
    REQUIRE(mf.size() == 1001);
    ExactOptions opt;
    opt.keep_states = true;
    opt.track_mean_field = false;
    const EvolutionTrace ex = propagate_exact(sched, BipartiteState::product(mf0.psi_a, mf0.psi_b), 1e-3, 1.0, opt);
    for (std::size_t k = 0; k < mf.size(); ++k) {
        CHECK(std::abs(mf[k].psi_a.norm() - 1.0) <= 1e-10);
        CHECK(std::abs(mf[k].psi_b.norm() - 1.0) <= 1e-10);
        CHECK(std::norm(kron(mf[k].psi_a, mf[k].psi_b).dot(ex.states[k])) >= 1.0 - 1e-8);
    }
    CHECK(mf.back().time == doctest::Approx(1.0));

    // Frozen under sigma_z (x) sigma_z at |+x,+x>.
    const MeanFieldState pp{plus_x(), plus_x(), 0.0};
    for (const MeanFieldState& s : propagate_mean_field(HamiltonianSchedule::constant(zz(), 1.0), pp, 0.01))
        CHECK(std::norm(kron(s.psi_a, s.psi_b).dot(kron(plus_x(), plus_x()))) >= 1.0 - 1e-14);

    // A step far too large for RK4 is refused.
    CHECK_THROWS_AS(propagate_mean_field(HamiltonianSchedule::constant(50.0 * h, 1.0), mf0, 0.5),
                    PreconditionError);
}

TEST_CASE("product-density residual") {
    Rng rng(7);
    const ComplexMatrix hf = random_factorisable_hamiltonian(2, 3, rng);
    for (int t = 0; t < 10; ++t)
        CHECK(fichtre_residual(hf, random_density(2, rng), random_density(3, rng)) <= 1e-11);

    const ComplexMatrix ra = random_density(2, rng);
    const ComplexMatrix rb = random_density(2, rng);
    CHECK(fichtre_residual(kron(ra, rb), ra, rb) > 1e-3);

    // Pure product with C = 0 under a coupled Hamiltonian.
    const ComplexVector up = ComplexVector::Unit(2, 0);
    CHECK(fichtre_residual(zz(), up * up.adjoint(), up * up.adjoint()) <= 1e-11);
    // and C > 0 gives a positive residual
    CHECK(fichtre_residual(zz(), plus_x() * plus_x().adjoint(), plus_x() * plus_x().adjoint()) > 0.1);

    CHECK_THROWS_AS(fichtre_residual(zz(), identity(2), identity(2) / 2.0), PreconditionError);
}

TEST_CASE("purity rate law") {
    const std::vector<double> dts = {0.02, 0.01, 0.005, 0.0025};
    const PurityRateCheck zzc = purity_rate_check(zz(), plus_x(), plus_x(), 1.0, dts);
    CHECK(zzc.analytic_curvature == doctest::Approx(-4.0).epsilon(1e-14));
    CHECK(std::abs(zzc.curvature_extrapolated + 4.0) <= 1e-6);
    for (double d : zzc.first_derivative) CHECK(std::abs(d) <= 1e-10);
    // Closed form P = 1 - sin^2(2 dt)/2 gives the finite-difference curvature directly.
    for (std::size_t k = 0; k < dts.size(); ++k) {
        const double s = std::sin(2.0 * dts[k]);
        CHECK(zzc.curvature[k] == doctest::Approx(-s * s / (dts[k] * dts[k])).epsilon(1e-8));
    }

    Rng rng(8);
    const PurityRateCheck fact = purity_rate_check(random_factorisable_hamiltonian(3, 3, rng),
                                                   random_state(3, rng), random_state(3, rng), 1.0, dts);
    CHECK(fact.analytic_curvature == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(fact.curvature_extrapolated) <= 1e-10);

    for (int t = 0; t < 5; ++t) {
        const ComplexMatrix h = random_hermitian(9, rng);
        const PurityRateCheck r = purity_rate_check(h, random_state(3, rng), random_state(3, rng), 1.0, dts);
        CHECK(std::abs(r.curvature_extrapolated - r.analytic_curvature) / std::abs(r.analytic_curvature) <= 1e-4);
        CHECK(r.first_derivative_slope == doctest::Approx(2.0).epsilon(0.1));
    }

    CHECK_THROWS_AS(purity_rate_check(zz(), plus_x(), plus_x(), 1.0, {0.02, 0.015}), PreconditionError);
    CHECK_THROWS_AS(purity_rate_check(zz(), plus_x(), plus_x(), 1.0, {0.02}), PreconditionError);
}

TEST_CASE("hbar rescales the curvature") {
    const PurityRateCheck r = purity_rate_check(zz(), plus_x(), plus_x(), 0.5, {0.01, 0.005, 0.0025});
    CHECK(r.analytic_curvature == doctest::Approx(-16.0).epsilon(1e-14));
    CHECK(std::abs(r.curvature_extrapolated + 16.0) <= 1e-4);
}

TEST_CASE("coupling search") {
    Rng rng(9);
    for (int t = 0; t < 5; ++t) {
        const ComplexMatrix h = random_hermitian(6, rng);
        REQUIRE(factorise_hamiltonian(h, 2, 3).coupling_norm > 0.1);
        const CouplingSearch s = search_biorthogonal_coupling(h, 2, 3, rng);
        CHECK(s.found);
        CHECK(s.trials <= 200);
        CHECK(s.max_coupling > 1e-6);
    }
    const CouplingSearch none =
        search_biorthogonal_coupling(random_factorisable_hamiltonian(2, 3, rng), 2, 3, rng, 50);
    CHECK_FALSE(none.found);
    CHECK(none.trials == 50);
}
