#include "entfree/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "entfree/errors.hpp"
#include "entfree/random.hpp"

namespace entfree {

namespace {

constexpr double kStepDivisibilityTol = 1e-9;
constexpr double kMeanFieldDriftLimit = 1e-6;
constexpr double kLocalNormTol = 1e-10;

ComplexMatrix as_matrix(const ComplexVector& v, Index rows, Index cols) {
    return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

// Unchecked generators; RK4 stages are only approximately normalised.
EffectiveGenerators generators(const ComplexMatrix& h, const ComplexVector& psiA,
                               const ComplexVector& psiB) {
    const ComplexVector image = h * kron(psiA, psiB);
    const ComplexMatrix w = as_matrix(image, psiA.size(), psiB.size());
    EffectiveGenerators g;
    g.v_a = w * psiB.conjugate();
    g.v_b = w.transpose() * psiA.conjugate();
    const Complex expectation = psiA.dot(g.v_a);  // <psi_A psi_B| H |psi_A psi_B>
    g.v_b -= expectation * psiB;
    return g;
}

void require_normalised(const ComplexVector& v, const char* what) {
    require(std::abs(v.norm() - 1.0) <= kLocalNormTol,
            std::string(what) + " must be normalised");
}

MeanFieldState rk4_step(const ComplexMatrix& h, const MeanFieldState& s, double dt, double hbar) {
    const Complex factor{0.0, -dt / hbar};
    auto drive = [&](const ComplexVector& a, const ComplexVector& b) {
        EffectiveGenerators g = generators(h, a, b);
        g.v_a *= factor;
        g.v_b *= factor;
        return g;
    };
    const EffectiveGenerators k1 = drive(s.psi_a, s.psi_b);
    const EffectiveGenerators k2 = drive(s.psi_a + 0.5 * k1.v_a, s.psi_b + 0.5 * k1.v_b);
    const EffectiveGenerators k3 = drive(s.psi_a + 0.5 * k2.v_a, s.psi_b + 0.5 * k2.v_b);
    const EffectiveGenerators k4 = drive(s.psi_a + k3.v_a, s.psi_b + k3.v_b);

    MeanFieldState next;
    next.time = s.time + dt;
    next.psi_a = s.psi_a + (k1.v_a + 2.0 * k2.v_a + 2.0 * k3.v_a + k4.v_a) / 6.0;
    next.psi_b = s.psi_b + (k1.v_b + 2.0 * k2.v_b + 2.0 * k3.v_b + k4.v_b) / 6.0;
    const double na = next.psi_a.norm();
    const double nb = next.psi_b.norm();
    if (std::abs(na - 1.0) > kMeanFieldDriftLimit || std::abs(nb - 1.0) > kMeanFieldDriftLimit)
        throw PreconditionError("propagate_mean_field: norm drift exceeds 1e-6 in one step at t = " +
                                std::to_string(next.time) + "; reduce dt");
    next.psi_a /= na;
    next.psi_b /= nb;
    return next;
}

void check_step(double dt, double hbar) {
    require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
    require(hbar > 0.0 && std::isfinite(hbar), "hbar must be positive");
}

}  // namespace

HamiltonianSchedule::HamiltonianSchedule(std::vector<ScheduleSegment> segments)
    : segments_(std::move(segments)) {
    require(!segments_.empty(), "HamiltonianSchedule: no segments");
    const Index dim = segments_.front().h.rows();
    for (const ScheduleSegment& seg : segments_) {
        require(seg.duration > 0.0, "HamiltonianSchedule: segment durations must be positive");
        require(seg.h.rows() == dim && seg.h.cols() == dim,
                "HamiltonianSchedule: segments have different dimensions");
        require(is_hermitian(seg.h), "HamiltonianSchedule: segment operator is not Hermitian");
    }
}

HamiltonianSchedule HamiltonianSchedule::constant(ComplexMatrix h, double duration) {
    return HamiltonianSchedule({ScheduleSegment{duration, std::move(h)}});
}

double HamiltonianSchedule::duration() const {
    double total = 0.0;
    for (const ScheduleSegment& seg : segments_) total += seg.duration;
    return total;
}

std::vector<std::int64_t> HamiltonianSchedule::steps_per_segment(double dt) const {
    require(dt > 0.0, "time step must be positive");
    std::vector<std::int64_t> steps;
    steps.reserve(segments_.size());
    for (const ScheduleSegment& seg : segments_) {
        const double ratio = seg.duration / dt;
        const auto n = static_cast<std::int64_t>(std::llround(ratio));
        require(n >= 1 && std::abs(static_cast<double>(n) * dt - seg.duration) <= kStepDivisibilityTol,
                "time step " + std::to_string(dt) + " does not divide segment duration " +
                    std::to_string(seg.duration));
        steps.push_back(n);
    }
    return steps;
}

EvolutionTrace propagate_exact(const HamiltonianSchedule& schedule, const BipartiteState& psi0,
                               double dt, double hbar, const ExactOptions& options) {
    check_step(dt, hbar);
    const Index dA = psi0.dim_a();
    const Index dB = psi0.dim_b();
    require(schedule.dim() == dA * dB,
            "propagate_exact: schedule dimension does not match the state");
    const std::vector<std::int64_t> steps = schedule.steps_per_segment(dt);

    EvolutionTrace trace;
    ComplexVector psi = psi0.amplitudes();
    MeanFieldState mf;
    if (options.track_mean_field) {
        const SchmidtDecomposition sd = schmidt_decompose(psi0);
        mf.psi_a = sd.left.col(0);
        mf.psi_b = sd.right.col(0);
    }

    double t = 0.0;
    auto record = [&](const ComplexMatrix& h) {
        const BipartiteState state(dA, dB, psi, 1e-9);
        const SchmidtDecomposition sd = schmidt_decompose(state);
        const RealVector& alpha = sd.coefficients;
        trace.times.push_back(t);
        trace.norm.push_back(psi.norm());
        trace.purity.push_back(alpha.array().pow(4).sum());
        trace.schmidt_top2.emplace_back(alpha(0), alpha.size() > 1 ? alpha(1) : 0.0);
        trace.coupling_c.push_back(
            coupling_coefficient(h, ComplexVector(sd.left.col(0)), ComplexVector(sd.right.col(0))));
        trace.fichtre_residual.push_back(fichtre_residual(
            h, reduced_density(state, Subsystem::B), reduced_density(state, Subsystem::A)));
        if (options.track_mean_field) {
            const Complex overlap = kron(mf.psi_a, mf.psi_b).dot(psi);
            trace.fidelity_vs_meanfield.push_back(std::norm(overlap));
        } else {
            trace.fidelity_vs_meanfield.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        if (options.keep_states) trace.states.push_back(psi);
    };

    record(schedule.segments().front().h);
    std::int64_t global_step = 0;
    for (std::size_t s = 0; s < schedule.segments().size(); ++s) {
        const ComplexMatrix& h = schedule.segments()[s].h;
        const ComplexMatrix u = hermitian_expm(h, -dt / hbar);
        for (std::int64_t k = 0; k < steps[s]; ++k) {
            psi = u * psi;
            if (options.track_mean_field) mf = rk4_step(h, mf, dt, hbar);
            ++global_step;
            t = static_cast<double>(global_step) * dt;
            record(h);
        }
    }
    return trace;
}

void validate_density(const ComplexMatrix& rho, double tol) {
    require(rho.rows() == rho.cols() && rho.rows() > 0, "density matrix must be square");
    require(is_hermitian(rho), "density matrix is not Hermitian");
    require(std::abs(rho.trace() - Complex(1.0)) <= tol, "density matrix does not have unit trace");
    require(eigh(rho).values.minCoeff() >= -tol, "density matrix is not positive semidefinite");
}

DensityTrace propagate_density(const HamiltonianSchedule& schedule, const ComplexMatrix& rho0,
                               double dt, double hbar) {
    check_step(dt, hbar);
    validate_density(rho0);
    require(schedule.dim() == rho0.rows(),
            "propagate_density: schedule dimension does not match the density matrix");
    const std::vector<std::int64_t> steps = schedule.steps_per_segment(dt);

    DensityTrace trace;
    ComplexMatrix rho = rho0;
    trace.times.push_back(0.0);
    trace.states.push_back(rho);
    std::int64_t global_step = 0;
    for (std::size_t s = 0; s < schedule.segments().size(); ++s) {
        const ComplexMatrix u = hermitian_expm(schedule.segments()[s].h, -dt / hbar);
        const ComplexMatrix u_dag = u.adjoint();
        for (std::int64_t k = 0; k < steps[s]; ++k) {
            rho = u * rho * u_dag;
            ++global_step;
            trace.times.push_back(static_cast<double>(global_step) * dt);
            trace.states.push_back(rho);
        }
    }
    return trace;
}

EffectiveGenerators effective_generators(const ComplexMatrix& h, const ComplexVector& psiA,
                                         const ComplexVector& psiB) {
    require(h.rows() == psiA.size() * psiB.size() && h.cols() == h.rows(),
            "effective_generators: operator dimension does not match the product state");
    require_normalised(psiA, "effective_generators: psi_A");
    require_normalised(psiB, "effective_generators: psi_B");
    return generators(h, psiA, psiB);
}

std::vector<MeanFieldState> propagate_mean_field(const HamiltonianSchedule& schedule,
                                                 const MeanFieldState& initial, double dt,
                                                 double hbar) {
    check_step(dt, hbar);
    require(schedule.dim() == initial.psi_a.size() * initial.psi_b.size(),
            "propagate_mean_field: schedule dimension does not match the product state");
    require_normalised(initial.psi_a, "propagate_mean_field: psi_A");
    require_normalised(initial.psi_b, "propagate_mean_field: psi_B");
    const std::vector<std::int64_t> steps = schedule.steps_per_segment(dt);

    std::vector<MeanFieldState> trace{initial};
    MeanFieldState state = initial;
    std::int64_t global_step = 0;
    for (std::size_t s = 0; s < schedule.segments().size(); ++s) {
        const ComplexMatrix& h = schedule.segments()[s].h;
        for (std::int64_t k = 0; k < steps[s]; ++k) {
            state = rk4_step(h, state, dt, hbar);
            ++global_step;
            state.time = initial.time + static_cast<double>(global_step) * dt;
            trace.push_back(state);
        }
    }
    return trace;
}

double fichtre_residual(const ComplexMatrix& h, const ComplexMatrix& rhoA,
                        const ComplexMatrix& rhoB) {
    validate_density(rhoA);
    validate_density(rhoB);
    const Index dA = rhoA.rows();
    const Index dB = rhoB.rows();
    require(h.rows() == dA * dB && h.cols() == dA * dB,
            "fichtre_residual: operator dimension does not match rho_A (x) rho_B");

    const ComplexMatrix x = h * kron(rhoA, rhoB);
    const ComplexMatrix eff_a = partial_trace(x, Subsystem::B, dA, dB);
    const ComplexMatrix eff_b = partial_trace(x, Subsystem::A, dA, dB) - x.trace() * rhoB;
    return hs_norm(x - kron(eff_a, rhoB) - kron(rhoA, eff_b));
}

PurityRateCheck purity_rate_check(const ComplexMatrix& h, const ComplexVector& psiA,
                                  const ComplexVector& psiB, double hbar,
                                  const std::vector<double>& dts) {
    require(hbar > 0.0, "hbar must be positive");
    require(dts.size() >= 2, "purity_rate_check: need at least two time steps");
    for (std::size_t k = 0; k < dts.size(); ++k) {
        require(dts[k] > 0.0, "purity_rate_check: time steps must be positive");
        if (k > 0)
            require(std::abs(dts[k - 1] - 2.0 * dts[k]) <= 1e-12 * dts[k - 1],
                    "purity_rate_check: each time step must be half the previous one");
    }
    const Index dA = psiA.size();
    const Index dB = psiB.size();
    const BipartiteState psi0 = BipartiteState::product(psiA, psiB);
    // Work with the purity deficit 1 - P = 2 sum_{k<l} w_k w_l, w = alpha^2:
    // every term is non-negative, so there is no cancellation against 1 and
    // the second difference stays accurate down to very small dt.
    auto deficit = [&](const ComplexVector& psi) {
        const RealVector w = schmidt_decompose(BipartiteState(dA, dB, psi, 1e-9)).coefficients.array().square();
        const double total = w.sum();
        double d = 0.0;
        for (Index k = 0; k < w.size(); ++k)
            for (Index l = k + 1; l < w.size(); ++l) d += w(k) * w(l);
        return 2.0 * d / (total * total);
    };
    const double d0 = deficit(psi0.amplitudes());

    PurityRateCheck out;
    out.dts = dts;
    out.coupling_c = coupling_coefficient(h, psiA, psiB);
    out.analytic_curvature = -4.0 * out.coupling_c / (hbar * hbar);
    for (double dt : dts) {
        auto deficit_at = [&](double t) { return deficit(hermitian_expm(h, -t / hbar) * psi0.amplitudes()); };
        const double forward = deficit_at(dt);
        const double backward = deficit_at(-dt);
        out.first_derivative.push_back(-(forward - backward) / (2.0 * dt));
        out.curvature.push_back(-(forward - 2.0 * d0 + backward) / (dt * dt));
    }
    const std::size_t n = dts.size();
    out.curvature_extrapolated = (4.0 * out.curvature[n - 1] - out.curvature[n - 2]) / 3.0;

    // Least-squares slope of log|dP/dt| against log dt.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool defined = true;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = std::abs(out.first_derivative[k]);
        if (!(d > 0.0)) {
            defined = false;
            break;
        }
        const double x = std::log(dts[k]);
        const double y = std::log(d);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(n);
    out.first_derivative_slope = defined ? (m * sxy - sx * sy) / (m * sxx - sx * sx)
                                         : std::numeric_limits<double>::quiet_NaN();
    return out;
}

CouplingSearch search_biorthogonal_coupling(const ComplexMatrix& h, Index dA, Index dB, Rng& rng,
                                            int max_trials, double threshold) {
    CouplingSearch out;
    for (int k = 0; k < max_trials; ++k) {
        const ComplexVector a = random_state(dA, rng);
        const ComplexVector b = random_state(dB, rng);
        const double c = coupling_coefficient(h, a, b);
        out.trials = k + 1;
        out.max_coupling = std::max(out.max_coupling, c);
        if (c > threshold) {
            out.found = true;
            break;
        }
    }
    return out;
}

}  // namespace entfree
