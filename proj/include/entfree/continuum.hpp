#pragma once

// Two distinguishable particles on a line. The exact solver propagates the
// full amplitude grid Psi(x_A, x_B) with Strang split-step Fourier steps on a
// periodic box; the approximate solvers keep a product psi_A(x_A) psi_B(x_B)
// and evolve each factor in an effective one-body potential (Hartree,
// linearised interaction). Entanglement is read off the SVD of the grid.

#include <optional>
#include <vector>

#include "entfree/fft.hpp"
#include "entfree/numerics.hpp"

namespace entfree::continuum {

inline constexpr Index kMinGridPoints = 64;
inline constexpr Index kMaxGridPoints = 1024;

class Grid1D {
public:
    // n must be a power of two in [64, 1024] and dx positive.
    Grid1D(Index n, double x_min, double dx);
    static Grid1D centered(Index n, double dx);

    Index n() const { return n_; }
    double x_min() const { return x_min_; }
    double dx() const { return dx_; }
    double x(Index i) const { return x_min_ + static_cast<double>(i) * dx_; }
    double x_max() const { return x(n_ - 1); }
    double length() const { return static_cast<double>(n_) * dx_; }

    RealVector points() const;
    // FFT ordering: 0, dk, ..., -dk with dk = 2 pi / length.
    RealVector wavenumbers() const;

private:
    Index n_;
    double x_min_;
    double dx_;
};

enum class PotentialKind { gaussian_bump, soft_coulomb, harmonic, linearized };

// One-dimensional profile V(r):
//   gaussian_bump  strength * exp(-(r - center)^2 / (2 range^2))
//   soft_coulomb   strength / sqrt((r - center)^2 + range^2)
//   harmonic       strength * (r - center)^2 / 2
//   linearized     offset + strength * (r - center)
struct Potential1D {
    PotentialKind kind = PotentialKind::gaussian_bump;
    double strength = 0.0;
    double range = 1.0;
    double center = 0.0;
    double offset = 0.0;

    static Potential1D linearized(double value, double slope, double reference);

    double value(double r) const;
    double gradient(double r) const;
    void validate() const;
};

// V_AB(x_A - x_B) + V_A(x_A) + V_B(x_B).
struct PotentialSpec {
    Potential1D interaction;
    std::optional<Potential1D> external_a;
    std::optional<Potential1D> external_b;
};

struct TwoParticleWavefunction {
    Grid1D grid_a;
    Grid1D grid_b;
    ComplexMatrix amplitudes; // grid_a.n() x grid_b.n()
    double mass_a = 1.0;
    double mass_b = 1.0;

    static TwoParticleWavefunction product(const Grid1D& grid_a, const ComplexVector& psi_a,
                                           const Grid1D& grid_b, const ComplexVector& psi_b,
                                           double mass_a = 1.0, double mass_b = 1.0);

    // sqrt(sum |Psi|^2 dx_A dx_B)
    double norm() const;
};

// A single factor of a product state.
struct Factor {
    Grid1D grid;
    ComplexVector psi;
    double mass = 1.0;
};

// ---------------------------------------------------------------------------
// One-body helpers

// Normalised Gaussian with position spread `width` (standard deviation of
// |psi|^2), mean x0 and mean momentum p0. The packet must sit at least five
// widths inside the grid and width >= 2 dx.
ComplexVector init_gaussian(const Grid1D& grid, double x0, double p0, double width,
                            double hbar = 1.0);

double norm(const Grid1D& grid, const ComplexVector& psi);
double mean_position(const Grid1D& grid, const ComplexVector& psi);
double position_width(const Grid1D& grid, const ComplexVector& psi);
// Spectral expectation of -i hbar d/dx.
double mean_momentum(const Grid1D& grid, const ComplexVector& psi, double hbar = 1.0);
Complex overlap(const Grid1D& grid, const ComplexVector& a, const ComplexVector& b);

// hbar^2 (pi/dx)^2 / (2 m): the largest kinetic energy the grid represents.
double max_kinetic_energy(const Grid1D& grid, double mass, double hbar = 1.0);

RealVector potential_table(const Grid1D& grid, const Potential1D& v);

// Cosine-ramp absorber: within `width` of either edge the amplitude is
// multiplied by sin(pi d / (2 width))^exponent each step, d being the
// distance to the edge.
struct AbsorbingMask {
    double width = 0.0;
    double exponent = 0.125;
};

RealVector mask_profile(const Grid1D& grid, const AbsorbingMask& mask);

// Strang split-step propagator for one particle in a (replaceable) potential.
class SplitStep1D {
public:
    SplitStep1D(const Grid1D& grid, double mass, const RealVector& potential, double dt,
                double hbar = 1.0);

    void set_potential(const RealVector& potential);
    // Half potential, full kinetic, half potential.
    void step(ComplexVector& psi) const;
    // Individual pieces, for schemes that refresh the potential mid-step.
    void half_potential(ComplexVector& psi) const;
    void kinetic(ComplexVector& psi) const;

    double kinetic_energy(const ComplexVector& psi) const;
    double potential_energy(const ComplexVector& psi) const;

    const Grid1D& grid() const { return grid_; }

private:
    Grid1D grid_;
    double mass_;
    double dt_;
    double hbar_;
    RealVector potential_;
    ComplexVector half_phase_;
    ComplexVector kinetic_phase_; // includes the 1/n of the inverse FFT
    RealVector kinetic_table_;
    FourierPlan plan_;
};

// ---------------------------------------------------------------------------
// Exact two-particle dynamics

class SplitStepPropagator {
public:
    // Throws PreconditionError unless dt * E_max / hbar < 0.5, where E_max is
    // the sum over both axes of max_kinetic_energy.
    SplitStepPropagator(const Grid1D& grid_a, const Grid1D& grid_b, double mass_a, double mass_b,
                        const PotentialSpec& potential, double dt, double hbar = 1.0,
                        std::optional<AbsorbingMask> mask = std::nullopt);

    void step(ComplexMatrix& amplitudes) const;
    double energy(const ComplexMatrix& amplitudes) const;
    double kinetic_energy(const ComplexMatrix& amplitudes) const;
    double potential_energy(const ComplexMatrix& amplitudes) const;

private:
    Grid1D grid_a_;
    Grid1D grid_b_;
    double dt_;
    double hbar_;
    RealMatrix potential_;
    ComplexMatrix half_phase_;
    ComplexMatrix kinetic_phase_;
    RealMatrix kinetic_table_;
    std::optional<RealMatrix> mask_;
    FourierPlan plan_;
};

// One Strang step of the full two-particle equation.
TwoParticleWavefunction split_step(const TwoParticleWavefunction& psi, const PotentialSpec& v,
                                   double dt, double hbar = 1.0);

// Schmidt coefficients of the grid state: singular values of
// amplitudes * sqrt(dx_A dx_B).
RealVector schmidt_spectrum(const ComplexMatrix& amplitudes, double dx_a, double dx_b);
// -sum lambda^2 ln lambda^2 in nats.
double entanglement_entropy(const ComplexMatrix& amplitudes, double dx_a, double dx_b);
double entanglement_entropy(const TwoParticleWavefunction& psi);

double mean_position_a(const TwoParticleWavefunction& psi);
double mean_position_b(const TwoParticleWavefunction& psi);
double energy(const TwoParticleWavefunction& psi, const PotentialSpec& v, double hbar = 1.0);

struct ExactRun {
    std::vector<double> times;
    std::vector<double> norm;
    std::vector<double> energy;
    std::vector<double> entropy;
    std::vector<double> mean_a;
    std::vector<double> mean_b;
    TwoParticleWavefunction final_state;
};

// Propagates to t_final (rounded to whole steps) sampling observables at
// t = 0, every `sample_every` steps and at the last step. Entropy is skipped
// (NaN) when with_entropy is false.
ExactRun run_exact(const TwoParticleWavefunction& psi0, const PotentialSpec& v, double dt,
                   double t_final, double hbar = 1.0, int sample_every = 1,
                   bool with_entropy = true, std::optional<AbsorbingMask> mask = std::nullopt);

// ---------------------------------------------------------------------------
// Centre-of-mass separation (equal masses)

// x_CM = (x_A + x_B) / 2 carries mass 2m, x_rel = x_A - x_B carries m / 2.
// The Jacobian of the map is one, so amplitudes carry over unchanged.
struct ComSetup {
    Grid1D grid_a;
    Grid1D grid_b;
    Grid1D grid_cm;
    Grid1D grid_rel;
    double mass_a = 1.0;
    double mass_b = 1.0;
};

// Psi(x_A, x_B) = g_cm(x_CM) g_rel(x_rel) sampled on the (x_A, x_B) grid by
// linear interpolation in each factor; zero outside the 1D grids.
ComplexMatrix reconstruct_from_com(const ComSetup& setup, const ComplexVector& g_cm,
                                   const ComplexVector& g_rel);

// Bilinear resampling of a grid state onto (x_CM, x_rel).
ComplexMatrix to_com_frame(const TwoParticleWavefunction& psi, const Grid1D& grid_cm,
                           const Grid1D& grid_rel);

struct ComSeparabilityResult {
    double l2_error = 0.0;
    std::vector<double> times;
    std::vector<double> entropy_ab;
    double final_entropy_ab = 0.0;
};

// Propagates g_cm freely and g_rel under V_AB on their own grids, and the
// reconstructed two-particle state with the full solver; reports the L2
// distance at t_final and the A|B entropy along the way.
ComSeparabilityResult com_separability_check(const ComSetup& setup, const ComplexVector& g_cm,
                                             const ComplexVector& g_rel,
                                             const Potential1D& interaction, double t_final,
                                             double dt, double hbar = 1.0,
                                             int sample_every = 50);

// ---------------------------------------------------------------------------
// Product-state approximations

struct HartreeTrace {
    std::vector<double> times;
    std::vector<double> norm_a;
    std::vector<double> norm_b;
    std::vector<double> energy;
    std::vector<double> mean_a;
    std::vector<double> mean_b;
    Factor final_a;
    Factor final_b;
};

// Time-dependent Hartree: each factor moves in its external potential plus
// the interaction averaged over the partner density, U_A = |psi_B|^2 * V_AB
// (convolution by FFT). Both grids must share dx.
HartreeTrace hartree_propagate(const Factor& a, const Factor& b, const PotentialSpec& v, double dt,
                               double t_final, double hbar = 1.0, int sample_every = 1);

// Density-weighted L2 norm of
//   R = V_AB - <V_AB>_A - <V_AB>_B + <V_AB>_AB
// where <.>_X averages over |psi_X|^2. Zero iff the interaction acts on the
// product like a sum of one-body potentials.
double hartree_consistency_residual(const Factor& a, const Factor& b, const RealMatrix& v_table);
double hartree_consistency_residual(const Factor& a, const Factor& b,
                                    const Potential1D& interaction);

struct ClassicalTrace {
    std::vector<double> times;
    std::vector<double> mean_a;
    std::vector<double> mean_b;
    std::vector<double> classical_a;
    std::vector<double> classical_b;
    double max_deviation = 0.0; // max |<x> - x_classical| over both particles
    Factor final_a;
    Factor final_b;
};

// Each factor moves under the interaction expanded to first order about the
// current means (refreshed every step); point masses with the same initial
// mean positions and momenta are integrated with velocity Verlet. Requires
// both packet widths <= range / 5.
ClassicalTrace classical_limit_propagate(const Factor& a, const Factor& b, const PotentialSpec& v,
                                         double dt, double t_final, double hbar = 1.0,
                                         int sample_every = 1);

// Light particle A scattering off a heavy particle B.
struct TestParticleSetup {
    Grid1D grid_light;
    Grid1D grid_heavy;
    double light_x0 = 0.0;
    double light_p0 = 0.0;
    double light_width = 1.0;
    double heavy_x0 = 0.0;
    double light_mass = 1.0;
};

struct TestParticleResult {
    std::vector<double> times;
    std::vector<double> entropy;            // heavy mass = mass_ratio * light_mass
    std::vector<double> entropy_equal_mass; // heavy mass = light_mass
    double final_entropy = 0.0;
    double final_entropy_equal_mass = 0.0;
};

// Runs the exact solver twice with identical initial packets, once with the
// target mass mass_ratio * light_mass and once with equal masses.
TestParticleResult test_particle_scenario(const TestParticleSetup& setup, double mass_ratio,
                                          double heavy_width, const PotentialSpec& v, double dt,
                                          double t_final, double hbar = 1.0,
                                          int sample_every = 100);

}  // namespace entfree::continuum
