#pragma once

// Time evolution of finite-dimensional bipartite systems and the instruments
// that test when product states stay products: exact Schroedinger and von
// Neumann propagation, the product (mean-field) evolution driven by the
// effective generators, the product-density residual and the short-time
// purity law.

#include <cstdint>
#include <utility>
#include <vector>

#include "entfree/bipartite.hpp"

namespace entfree {

class Rng;

struct ScheduleSegment {
    double duration = 0.0;
    ComplexMatrix h;
};

// Piecewise-constant H(t). Every segment has positive duration and a
// Hermitian operator of a common dimension.
class HamiltonianSchedule {
public:
    explicit HamiltonianSchedule(std::vector<ScheduleSegment> segments);
    static HamiltonianSchedule constant(ComplexMatrix h, double duration);

    const std::vector<ScheduleSegment>& segments() const { return segments_; }
    Index dim() const { return segments_.front().h.rows(); }
    double duration() const;

    // Number of dt steps in each segment. Throws PreconditionError when dt
    // does not divide a duration to within 1e-9.
    std::vector<std::int64_t> steps_per_segment(double dt) const;

private:
    std::vector<ScheduleSegment> segments_;
};

struct MeanFieldState {
    ComplexVector psi_a;
    ComplexVector psi_b;
    double time = 0.0;
};

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> norm;
    std::vector<double> purity;
    std::vector<std::pair<double, double>> schmidt_top2;
    std::vector<double> coupling_c;            // at the dominant Schmidt pair
    std::vector<double> fichtre_residual;      // at the reduced densities
    std::vector<double> fidelity_vs_meanfield; // NaN when not tracked
    std::vector<ComplexVector> states;         // only with keep_states

    std::size_t size() const { return times.size(); }
};

struct ExactOptions {
    bool track_mean_field = true;
    bool keep_states = false;
};

// Steps psi by exp(-i dt H / hbar) with the propagator cached per segment and
// records observables at t = 0 and after every step. The mean-field
// comparison run starts from the dominant Schmidt pair of psi0.
EvolutionTrace propagate_exact(const HamiltonianSchedule& schedule, const BipartiteState& psi0,
                               double dt, double hbar = 1.0, const ExactOptions& options = {});

struct DensityTrace {
    std::vector<double> times;
    std::vector<ComplexMatrix> states;
};

// Throws PreconditionError unless rho is Hermitian, has unit trace and no
// eigenvalue below -tol.
void validate_density(const ComplexMatrix& rho, double tol = 1e-10);

// rho(t + dt) = U rho U^dagger.
DensityTrace propagate_density(const HamiltonianSchedule& schedule, const ComplexMatrix& rho0,
                               double dt, double hbar = 1.0);

struct EffectiveGenerators {
    ComplexVector v_a; // (I (x) <psi_B|) H |psi_A psi_B>
    ComplexVector v_b; // (<psi_A| (x) I) H |psi_A psi_B> - <H> psi_B
};

// The drives of the reduced equations i hbar d/dt psi_X = v_X. Whenever the
// coupling coefficient vanishes, v_a (x) psi_B + psi_A (x) v_b = H (psi_A (x) psi_B).
EffectiveGenerators effective_generators(const ComplexMatrix& h, const ComplexVector& psiA,
                                         const ComplexVector& psiB);

// Classical RK4 on the reduced equations, renormalising each factor after
// every step. Throws PreconditionError when a factor's norm drifts by more
// than 1e-6 within one step.
std::vector<MeanFieldState> propagate_mean_field(const HamiltonianSchedule& schedule,
                                                 const MeanFieldState& initial, double dt,
                                                 double hbar = 1.0);

// || H rho - (H_A^eff rho_A) (x) rho_B - rho_A (x) (H_B^eff rho_B) ||_HS for
// rho = rho_A (x) rho_B, with
//   H_A^eff rho_A = Tr_B(H rho),
//   H_B^eff rho_B = Tr_A(H rho) - Tr(H rho) rho_B.
// Zero means the product form is preserved to first order.
double fichtre_residual(const ComplexMatrix& h, const ComplexMatrix& rhoA,
                        const ComplexMatrix& rhoB);

struct PurityRateCheck {
    std::vector<double> dts;
    std::vector<double> first_derivative; // (P(dt) - P(-dt)) / (2 dt)
    std::vector<double> curvature;        // (P(dt) - 2 + P(-dt)) / dt^2
    double curvature_extrapolated = 0.0;  // Richardson on the two finest dts
    double analytic_curvature = 0.0;      // -4 C / hbar^2
    double coupling_c = 0.0;
    double first_derivative_slope = 0.0;  // log-log slope, NaN if undefined
};

// `dts` must be positive and each entry half the previous one.
PurityRateCheck purity_rate_check(const ComplexMatrix& h, const ComplexVector& psiA,
                                  const ComplexVector& psiB, double hbar,
                                  const std::vector<double>& dts);

struct CouplingSearch {
    double max_coupling = 0.0;
    int trials = 0;
    bool found = false;
};

// Draws up to max_trials Haar product states and stops at the first whose
// coupling coefficient exceeds threshold.
CouplingSearch search_biorthogonal_coupling(const ComplexMatrix& h, Index dA, Index dB, Rng& rng,
                                            int max_trials = 200, double threshold = 1e-6);

}  // namespace entfree
