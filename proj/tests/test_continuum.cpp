#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "entfree/continuum.hpp"
#include "entfree/errors.hpp"

using namespace entfree;
using namespace entfree::continuum;

namespace {

Potential1D bump(double strength, double range) {
    Potential1D v;
    v.kind = PotentialKind::gaussian_bump;
    v.strength = strength;
    v.range = range;
    return v;
}

Potential1D harmonic(double k, double center = 0.0) {
    Potential1D v;
    v.kind = PotentialKind::harmonic;
    v.strength = k;
    v.center = center;
    v.range = 10.0;
    return v;
}

PotentialSpec interaction_only(const Potential1D& v) { return PotentialSpec{v, std::nullopt, std::nullopt}; }

// Entropy of a two-term Schmidt state with weights p, 1 - p.
double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid1D(100, 0.0, 0.1), PreconditionError);
    CHECK_THROWS_AS(Grid1D(32, 0.0, 0.1), PreconditionError);
    CHECK_THROWS_AS(Grid1D(2048, 0.0, 0.1), PreconditionError);
    CHECK_THROWS_AS(Grid1D(64, 0.0, 0.0), PreconditionError);
    const Grid1D g = Grid1D::centered(128, 0.25);
    CHECK(g.x(64) == doctest::Approx(0.0));
    CHECK(g.length() == doctest::Approx(32.0));
    const RealVector k = g.wavenumbers();
    CHECK(k(1) == doctest::Approx(2 * std::numbers::pi / 32.0));
    CHECK(k(127) == doctest::Approx(-2 * std::numbers::pi / 32.0));
}

TEST_CASE("potential profiles") {
    const Potential1D b = bump(2.0, 0.5);
    CHECK(b.value(0.0) == doctest::Approx(2.0));
    CHECK(b.value(0.5) == doctest::Approx(2.0 * std::exp(-0.5)));
    Potential1D sc;
    sc.kind = PotentialKind::soft_coulomb;
    sc.strength = 3.0;
    sc.range = 1.0;
    CHECK(sc.value(0.0) == doctest::Approx(3.0));
    const Potential1D h = harmonic(2.0, 1.0);
    CHECK(h.value(3.0) == doctest::Approx(4.0));
    const Potential1D lin = Potential1D::linearized(1.5, -0.5, 2.0);
    CHECK(lin.value(4.0) == doctest::Approx(0.5));
    for (const Potential1D& v : {b, sc, h, lin}) {
        for (double r : {-1.3, 0.2, 0.9}) {
            const double e = 1e-5;
            CHECK(v.gradient(r) == doctest::Approx((v.value(r + e) - v.value(r - e)) / (2 * e)).epsilon(1e-7));
        }
    }
    Potential1D bad = bump(1.0, 0.0);
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("Gaussian packets") {
    const Grid1D g = Grid1D::centered(256, 0.1);
    const ComplexVector psi = init_gaussian(g, 1.3, 0.0, 0.8);
    CHECK(norm(g, psi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mean_position(g, psi) - 1.3) <= g.dx());
    CHECK(position_width(g, psi) == doctest::Approx(0.8).epsilon(1e-6));
    // Real and positive up to a global phase.
    const Complex phase = psi(0) / std::abs(psi(0));
    for (Index i = 0; i < g.n(); ++i) {
        const Complex z = psi(i) / phase;
        CHECK(std::abs(z.imag()) <= 1e-14);
        CHECK(z.real() >= 0.0);
    }

    for (double hbar : {1.0, 0.7}) {
        const ComplexVector moving = init_gaussian(g, -2.0, 2.5, 1.0, hbar);
        CHECK(std::abs(mean_momentum(g, moving, hbar) - 2.5) <= hbar * 2 * std::numbers::pi / g.length());
    }

    CHECK_THROWS_AS(init_gaussian(g, 11.0, 0.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(init_gaussian(g, 0.0, 0.0, 0.15), PreconditionError);
}

TEST_CASE("free Gaussian spreads as the closed form predicts") {
    const Grid1D g = Grid1D::centered(512, 0.2);
    const double s0 = 1.0;
    const double m = 1.0;
    const double dt = 0.002;
    // sigma(t) = 2 sigma_0 at t = 2 sqrt(3) m sigma_0^2 / hbar.
    const double t_double = 2.0 * std::sqrt(3.0) * m * s0 * s0;
    const int steps = static_cast<int>(std::lround(t_double / dt));
    ComplexVector psi = init_gaussian(g, 0.0, 0.0, s0);
    SplitStep1D prop(g, m, RealVector::Zero(g.n()), dt);
    for (int k = 0; k < steps; ++k) prop.step(psi);
    const double t = steps * dt;
    const double expected = std::sqrt(s0 * s0 + std::pow(t / (2 * m * s0), 2));
    CHECK(std::abs(position_width(g, psi) - expected) / expected <= 0.01);
    CHECK(position_width(g, psi) == doctest::Approx(2.0 * s0).epsilon(0.01));
}

TEST_CASE("coherent state oscillates at the classical frequency") {
    const Grid1D g = Grid1D::centered(128, 0.2);
    const double m = 1.0;
    const double omega = 1.3;
    const double x0 = 2.0;
    const double sigma = std::sqrt(1.0 / (2 * m * omega));
    const double dt = 0.002;
    ComplexVector psi = init_gaussian(g, x0, 0.0, sigma);
    SplitStep1D prop(g, m, potential_table(g, harmonic(m * omega * omega)), dt);

    // Downward zero crossings of <x> give the period.
    std::vector<double> crossings;
    double prev = mean_position(g, psi);
    double max_err = 0.0;
    for (int k = 1; k <= 10000; ++k) {
        prop.step(psi);
        const double x = mean_position(g, psi);
        const double t = k * dt;
        max_err = std::max(max_err, std::abs(x - x0 * std::cos(omega * t)));
        if (prev > 0.0 && x <= 0.0) crossings.push_back(t - dt * x / (x - prev));
        prev = x;
    }
    REQUIRE(crossings.size() >= 2);
    const double period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    CHECK(std::abs(period - 2 * std::numbers::pi / omega) / (2 * std::numbers::pi / omega) <= 0.01);
    CHECK(max_err <= 0.01 * x0);
    // A coherent state keeps its width.
    CHECK(position_width(g, psi) == doctest::Approx(sigma).epsilon(0.01));
}

TEST_CASE("split-step stability precondition") {
    const Grid1D g = Grid1D::centered(64, 0.1);
    const double e_max = 2.0 * max_kinetic_energy(g, 1.0);
    CHECK_THROWS_AS(SplitStepPropagator(g, g, 1.0, 1.0, interaction_only(bump(1, 1)), 0.6 / e_max),
                    PreconditionError);
    CHECK_NOTHROW(SplitStepPropagator(g, g, 1.0, 1.0, interaction_only(bump(1, 1)), 0.4 / e_max));
}

TEST_CASE("separable evolution creates no entanglement") {
    const Grid1D g = Grid1D::centered(128, 0.2);
    const auto psi0 = TwoParticleWavefunction::product(g, init_gaussian(g, -3.0, 1.0, 1.0), g,
                                                       init_gaussian(g, 3.0, -1.0, 1.2), 1.0, 2.0);
    CHECK(entanglement_entropy(psi0) <= 1e-10);
    const RealVector lambda = schmidt_spectrum(psi0.amplitudes, g.dx(), g.dx());
    CHECK(lambda.array().pow(4).sum() == doctest::Approx(1.0).epsilon(1e-12));

    PotentialSpec v = interaction_only(bump(0.0, 1.0));
    v.external_a = harmonic(0.1);
    v.external_b = bump(1.0, 0.7);
    const ExactRun run = run_exact(psi0, v, 0.002, 3.0, 1.0, 50);
    for (double s : run.entropy) CHECK(s <= 1e-8);
}

TEST_CASE("norm and energy conservation") {
    const Grid1D g = Grid1D::centered(64, 0.3);
    const auto psi0 = TwoParticleWavefunction::product(g, init_gaussian(g, -3.0, 1.5, 0.8), g,
                                                       init_gaussian(g, 3.0, -1.5, 0.8));
    const ExactRun run = run_exact(psi0, interaction_only(bump(2.0, 1.0)), 0.004, 4.0, 1.0, 10, false);
    REQUIRE(run.times.size() == 101);
    CHECK(run.times.back() == doctest::Approx(4.0));
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        CHECK(std::abs(run.norm[k] - 1.0) <= 1e-10);
        CHECK(std::abs(run.energy[k] - run.energy.front()) / std::abs(run.energy.front()) <= 1e-6);
        CHECK(std::isnan(run.entropy[k]));
    }
    CHECK(run.final_state.norm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("entropy of two disjoint product packets") {
    const Grid1D g = Grid1D::centered(256, 0.1);
    const ComplexVector a1 = init_gaussian(g, -6.0, 0.0, 0.5);
    const ComplexVector a2 = init_gaussian(g, 6.0, 0.0, 0.5);
    const ComplexVector b1 = init_gaussian(g, -5.0, 1.0, 0.6);
    const ComplexVector b2 = init_gaussian(g, 5.0, -1.0, 0.6);
    for (double p : {0.5, 0.2}) {
        const ComplexMatrix amps = std::sqrt(p) * a1 * b1.transpose() + std::sqrt(1 - p) * a2 * b2.transpose();
        CHECK(entanglement_entropy(amps, g.dx(), g.dx()) == doctest::Approx(binary_entropy(p)).epsilon(1e-6));
    }
    const ComplexMatrix bell = std::sqrt(0.5) * (a1 * b1.transpose() + a2 * b2.transpose());
    CHECK(std::abs(entanglement_entropy(bell, g.dx(), g.dx()) - std::log(2.0)) <= 1e-6);
}

TEST_CASE("entropy is invariant under global phase and local evolution") {
    const Grid1D g = Grid1D::centered(128, 0.2);
    const ComplexVector a1 = init_gaussian(g, -4.0, 1.0, 0.8);
    const ComplexVector a2 = init_gaussian(g, 3.0, 0.0, 1.1);
    const ComplexVector b1 = init_gaussian(g, -2.0, -0.5, 1.0);
    const ComplexVector b2 = init_gaussian(g, 4.0, 0.5, 0.7);
    ComplexMatrix amps = 0.8 * a1 * b1.transpose() + 0.6 * a2 * b2.transpose();
    amps /= std::sqrt(amps.squaredNorm() * g.dx() * g.dx());
    const double s0 = entanglement_entropy(amps, g.dx(), g.dx());
    REQUIRE(s0 > 0.1);

    CHECK(std::abs(entanglement_entropy(std::polar(1.0, 2.1) * amps, g.dx(), g.dx()) - s0) <= 1e-8);

    // Free kinetic steps on axis B only.
    SplitStep1D free_b(g, 1.0, RealVector::Zero(g.n()), 0.003);
    for (Index i = 0; i < g.n(); ++i) {
        ComplexVector row = amps.row(i).transpose();
        for (int k = 0; k < 100; ++k) free_b.kinetic(row);
        amps.row(i) = row.transpose();
    }
    CHECK(std::abs(entanglement_entropy(amps, g.dx(), g.dx()) - s0) <= 1e-8);
}

TEST_CASE("centre-of-mass frame") {
    const Grid1D g = Grid1D::centered(128, 0.2);
    // Equal widths: the Gaussian factorises in CM coordinates too.
    // Unequal widths: it does not.
    const Grid1D g_cm = Grid1D::centered(256, 0.1);
    const Grid1D g_rel = Grid1D::centered(256, 0.2);
    auto cm_entropy = [&](double wa, double wb) {
        const auto psi = TwoParticleWavefunction::product(g, init_gaussian(g, -1.0, 0.0, wa), g,
                                                          init_gaussian(g, 1.0, 0.0, wb));
        const ComplexMatrix rotated = to_com_frame(psi, g_cm, g_rel);
        const double n = std::sqrt(rotated.squaredNorm() * g_cm.dx() * g_rel.dx());
        return entanglement_entropy(rotated / n, g_cm.dx(), g_rel.dx());
    };
    CHECK(cm_entropy(1.0, 1.0) <= 1e-3);
    CHECK(cm_entropy(0.6, 1.6) > 0.05);
}

TEST_CASE("centre-of-mass separation without interaction") {
    const Grid1D g = Grid1D::centered(128, 0.3);
    const ComSetup setup{g, g, Grid1D::centered(256, 0.15), Grid1D::centered(256, 0.3), 1.0, 1.0};
    const ComplexVector g_cm = init_gaussian(setup.grid_cm, 0.5, 0.3, 1.0);
    const ComplexVector g_rel = init_gaussian(setup.grid_rel, -3.0, 1.0, 1.5);
    const ComSeparabilityResult r =
        com_separability_check(setup, g_cm, g_rel, bump(0.0, 1.0), 2.0, 0.004);
    CHECK(r.l2_error <= 1e-3);

    ComSetup unequal = setup;
    unequal.mass_b = 2.0;
    CHECK_THROWS_AS(com_separability_check(unequal, g_cm, g_rel, bump(0.0, 1.0), 1.0, 0.004),
                    PreconditionError);
}

TEST_CASE("Hartree without interaction is independent propagation") {
    const Grid1D ga = Grid1D::centered(128, 0.1);
    const Grid1D gb = Grid1D(64, -2.0, 0.1);
    const ComplexVector a0 = init_gaussian(ga, -1.0, 1.0, 0.5);
    const ComplexVector b0 = init_gaussian(gb, 1.2, -0.5, 0.4);
    PotentialSpec v = interaction_only(bump(0.0, 1.0));
    v.external_a = harmonic(1.0, -1.0);
    v.external_b = harmonic(2.0, 1.0);
    const double dt = 5e-4;
    const HartreeTrace tr = hartree_propagate({ga, a0, 1.0}, {gb, b0, 1.5}, v, dt, 0.5);

    ComplexVector a = a0;
    ComplexVector b = b0;
    SplitStep1D sa(ga, 1.0, potential_table(ga, *v.external_a), dt);
    SplitStep1D sb(gb, 1.5, potential_table(gb, *v.external_b), dt);
    for (int k = 0; k < 1000; ++k) {
        sa.step(a);
        sb.step(b);
    }
    CHECK((tr.final_a.psi - a).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((tr.final_b.psi - b).cwiseAbs().maxCoeff() <= 1e-10);

    // and the exact solver stays on the product
    const auto psi0 = TwoParticleWavefunction::product(ga, a0, gb, b0, 1.0, 1.5);
    const ExactRun ex = run_exact(psi0, v, dt, 0.5, 1.0, 1000, false);
    const Complex ov = (a.adjoint() * ex.final_state.amplitudes * b.conjugate())(0, 0) * ga.dx() * gb.dx();
    CHECK(std::norm(ov) >= 1.0 - 1e-10);

    // Different dx on the two axes is refused.
    const Grid1D coarse = Grid1D::centered(64, 0.2);
    CHECK_THROWS_AS(hartree_propagate({ga, a0, 1.0}, {coarse, init_gaussian(coarse, 0.0, 0.0, 0.5), 1.0}, v,
                                      dt, 0.1),
                    PreconditionError);
}

TEST_CASE("Hartree conserves norm and mean-field energy") {
    const Grid1D g = Grid1D::centered(128, 0.1);
    PotentialSpec v = interaction_only(bump(1.0, 1.0));
    v.external_a = harmonic(1.0, -1.5);
    v.external_b = harmonic(1.0, 1.5);
    const HartreeTrace tr = hartree_propagate({g, init_gaussian(g, -1.5, 0.0, std::sqrt(0.5)), 1.0},
                                              {g, init_gaussian(g, 1.5, 0.0, std::sqrt(0.5)), 1.0}, v, 5e-4,
                                              2.0, 1.0, 100);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(std::abs(tr.norm_a[k] - 1.0) <= 1e-8);
        CHECK(std::abs(tr.norm_b[k] - 1.0) <= 1e-8);
        CHECK(std::abs(tr.energy[k] - tr.energy.front()) / std::abs(tr.energy.front()) <= 1e-5);
    }
}

TEST_CASE("Hartree consistency residual") {
    const Grid1D g = Grid1D::centered(128, 0.1);
    const Factor a{g, init_gaussian(g, -1.0, 0.0, 0.7), 1.0};
    const Factor b{g, init_gaussian(g, 1.0, 0.5, 0.5), 1.0};

    RealMatrix separable(g.n(), g.n());
    for (Index i = 0; i < g.n(); ++i)
        for (Index j = 0; j < g.n(); ++j) separable(i, j) = std::sin(g.x(i)) + 0.3 * g.x(j) * g.x(j);
    CHECK(hartree_consistency_residual(a, b, separable) <= 1e-12);

    CHECK(hartree_consistency_residual(a, b, bump(1.0, 1.0)) > 1e-3);

    const Grid1D wide = Grid1D::centered(512, 0.1);
    const Factor far_a{wide, init_gaussian(wide, -12.0, 0.0, 0.5), 1.0};
    const Factor far_b{wide, init_gaussian(wide, 12.0, 0.0, 0.5), 1.0};
    CHECK(hartree_consistency_residual(far_a, far_b, bump(1.0, 0.5)) <= 1e-8);
}

TEST_CASE("classical limit without interaction follows free motion") {
    const Grid1D g = Grid1D::centered(256, 0.1);
    // Heavy enough that the packets barely spread over the run.
    const Factor a{g, init_gaussian(g, -4.0, 10.0, 0.2), 10.0};
    const Factor b{g, init_gaussian(g, 3.0, -5.0, 0.2), 5.0};
    const ClassicalTrace tr = classical_limit_propagate(a, b, interaction_only(bump(0.0, 2.0)), 5e-4, 2.0, 1.0, 20);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double t = tr.times[k];
        CHECK(std::abs(tr.mean_a[k] - (-4.0 + 1.0 * t)) <= g.dx());
        CHECK(std::abs(tr.mean_b[k] - (3.0 - 1.0 * t)) <= g.dx());
        CHECK(std::abs(tr.classical_a[k] - (-4.0 + 1.0 * t)) <= 1e-10);
    }
    CHECK(tr.max_deviation <= g.dx());

    const Factor wide{g, init_gaussian(g, 3.0, 0.0, 0.5), 1.0};
    CHECK_THROWS_AS(classical_limit_propagate(a, wide, interaction_only(bump(1.0, 1.0)), 5e-4, 1.0),
                    PreconditionError);
}

TEST_CASE("classical limit with a harmonic interaction matches the normal mode") {
    // Equal masses m, V = k r^2 / 2: the relative coordinate oscillates at
    // omega = sqrt(2 k / m) and the centre of mass moves freely.
    const Grid1D g = Grid1D::centered(256, 0.1);
    // Peak momenta stay well inside the grid cutoff pi / dx.
    const double m = 5.0;
    const double k = 5.0;
    const double omega = std::sqrt(2 * k / m);
    const Factor a{g, init_gaussian(g, -1.0, 0.5 * m, 0.3), m};
    const Factor b{g, init_gaussian(g, 1.0, 0.5 * m, 0.3), m};
    const ClassicalTrace tr = classical_limit_propagate(a, b, interaction_only(harmonic(k)), 4e-4, 6.0, 1.0, 25);
    double err = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        const double cm = 0.5 * t;
        const double rel = -2.0 * std::cos(omega * t);
        err = std::max({err, std::abs(tr.mean_a[i] - (cm + rel / 2)), std::abs(tr.mean_b[i] - (cm - rel / 2)),
                        std::abs(tr.classical_a[i] - (cm + rel / 2))});
    }
    CHECK(err <= 0.01 * 1.0);
}

TEST_CASE("test particle without interaction stays unentangled") {
    const TestParticleSetup setup{Grid1D::centered(64, 0.3), Grid1D::centered(64, 0.1), -3.0, 1.0, 1.0, 0.0, 1.0};
    const TestParticleResult r =
        test_particle_scenario(setup, 1000.0, 0.2, interaction_only(bump(0.0, 1.0)), 5e-4, 0.5, 1.0, 100);
    for (double s : r.entropy) CHECK(s <= 1e-8);
    for (double s : r.entropy_equal_mass) CHECK(s <= 1e-8);
    CHECK_THROWS_AS(test_particle_scenario(setup, 0.5, 0.2, interaction_only(bump(1.0, 1.0)), 5e-4, 0.5),
                    PreconditionError);
    CHECK_THROWS_AS(test_particle_scenario(setup, 10.0, 0.5, interaction_only(bump(1.0, 1.0)), 5e-4, 0.5),
                    PreconditionError);
}

TEST_CASE("absorbing mask profile") {
    const Grid1D g = Grid1D::centered(128, 0.1);
    const RealVector m = mask_profile(g, AbsorbingMask{1.0, 0.5});
    CHECK(m(64) == 1.0);
    CHECK(m(0) < 0.2);
    CHECK(m(127) < 0.2);
    for (Index i = 0; i < g.n(); ++i) {
        CHECK(m(i) >= 0.0);
        CHECK(m(i) <= 1.0);
    }
}
