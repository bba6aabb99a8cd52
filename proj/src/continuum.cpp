#include "entfree/continuum.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "entfree/errors.hpp"

namespace entfree::continuum {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCflLimit = 0.5;

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

void check_cfl(double dt, double e_max, double hbar) {
    require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
    require(hbar > 0.0, "hbar must be positive");
    require(dt * e_max / hbar < kCflLimit,
            "time step too large: dt * E_max / hbar = " + std::to_string(dt * e_max / hbar) +
                " (limit 0.5, E_max = " + std::to_string(e_max) + ")");
}

Complex phase(double angle) { return std::polar(1.0, angle); }

// Linear interpolation of samples on `grid`; zero outside the sampled span.
Complex interpolate(const Grid1D& grid, const ComplexVector& f, double x) {
    const double u = (x - grid.x_min()) / grid.dx();
    const double last = static_cast<double>(grid.n() - 1);
    if (u < -1e-9 || u > last + 1e-9) return 0.0;
    const double clamped = std::clamp(u, 0.0, last);
    auto i0 = static_cast<Index>(std::floor(clamped));
    if (i0 >= grid.n() - 1) return f(grid.n() - 1);
    const double w = clamped - static_cast<double>(i0);
    return (1.0 - w) * f(i0) + w * f(i0 + 1);
}

RealVector density(const ComplexVector& psi) { return psi.cwiseAbs2(); }

std::int64_t step_count(double t_final, double dt) {
    require(t_final >= 0.0, "t_final must be non-negative");
    require(dt > 0.0, "time step must be positive");
    return static_cast<std::int64_t>(std::llround(t_final / dt));
}

bool sample_now(std::int64_t k, std::int64_t total, int every) {
    return k == 0 || k == total || (every > 0 && k % every == 0);
}

double width_limit(const Potential1D& v) { return v.range / 5.0; }

}  // namespace

// ---------------------------------------------------------------------------

Grid1D::Grid1D(Index n, double x_min, double dx) : n_(n), x_min_(x_min), dx_(dx) {
    require(is_power_of_two(n) && n >= kMinGridPoints && n <= kMaxGridPoints,
            "Grid1D: n = " + std::to_string(n) + " must be a power of two in [64, 1024]");
    require(dx > 0.0 && std::isfinite(dx), "Grid1D: dx must be positive");
    require(std::isfinite(x_min), "Grid1D: x_min must be finite");
}

Grid1D Grid1D::centered(Index n, double dx) {
    return Grid1D(n, -0.5 * static_cast<double>(n) * dx, dx);
}

RealVector Grid1D::points() const {
    RealVector x(n_);
    for (Index i = 0; i < n_; ++i) x(i) = this->x(i);
    return x;
}

RealVector Grid1D::wavenumbers() const {
    RealVector k(n_);
    const double dk = 2.0 * kPi / length();
    for (Index j = 0; j < n_; ++j)
        k(j) = dk * static_cast<double>(j < n_ / 2 ? j : j - n_);
    return k;
}

Potential1D Potential1D::linearized(double value, double slope, double reference) {
    Potential1D v;
    v.kind = PotentialKind::linearized;
    v.strength = slope;
    v.center = reference;
    v.offset = value;
    return v;
}

double Potential1D::value(double r) const {
    const double d = r - center;
    switch (kind) {
        case PotentialKind::gaussian_bump: return strength * std::exp(-d * d / (2.0 * range * range));
        case PotentialKind::soft_coulomb: return strength / std::sqrt(d * d + range * range);
        case PotentialKind::harmonic: return 0.5 * strength * d * d;
        case PotentialKind::linearized: return offset + strength * d;
    }
    return 0.0;
}

double Potential1D::gradient(double r) const {
    const double d = r - center;
    switch (kind) {
        case PotentialKind::gaussian_bump:
            return -strength * d / (range * range) * std::exp(-d * d / (2.0 * range * range));
        case PotentialKind::soft_coulomb: return -strength * d / std::pow(d * d + range * range, 1.5);
        case PotentialKind::harmonic: return strength * d;
        case PotentialKind::linearized: return strength;
    }
    return 0.0;
}

void Potential1D::validate() const {
    require(range > 0.0, "potential range must be positive");
    require(std::isfinite(strength) && std::isfinite(center) && std::isfinite(offset),
            "potential parameters must be finite");
}

TwoParticleWavefunction TwoParticleWavefunction::product(const Grid1D& grid_a,
                                                         const ComplexVector& psi_a,
                                                         const Grid1D& grid_b,
                                                         const ComplexVector& psi_b, double mass_a,
                                                         double mass_b) {
    require(psi_a.size() == grid_a.n() && psi_b.size() == grid_b.n(),
            "TwoParticleWavefunction: factor sizes do not match the grids");
    require(mass_a > 0.0 && mass_b > 0.0, "TwoParticleWavefunction: masses must be positive");
    return {grid_a, grid_b, psi_a * psi_b.transpose(), mass_a, mass_b};
}

double TwoParticleWavefunction::norm() const {
    return std::sqrt(amplitudes.cwiseAbs2().sum() * grid_a.dx() * grid_b.dx());
}

// ---------------------------------------------------------------------------

ComplexVector init_gaussian(const Grid1D& grid, double x0, double p0, double width, double hbar) {
    require(hbar > 0.0, "hbar must be positive");
    require(width >= 2.0 * grid.dx() * (1.0 - 1e-12),
            "init_gaussian: width must be at least 2 dx");
    require(x0 - 5.0 * width >= grid.x_min() && x0 + 5.0 * width <= grid.x_max(),
            "init_gaussian: packet lies within five widths of the boundary");
    ComplexVector psi(grid.n());
    for (Index i = 0; i < grid.n(); ++i) {
        const double d = grid.x(i) - x0;
        psi(i) = std::exp(-d * d / (4.0 * width * width)) * phase(p0 * d / hbar);
    }
    return psi / norm(grid, psi);
}

double norm(const Grid1D& grid, const ComplexVector& psi) {
    return std::sqrt(psi.cwiseAbs2().sum() * grid.dx());
}

double mean_position(const Grid1D& grid, const ComplexVector& psi) {
    const RealVector rho = density(psi);
    return rho.dot(grid.points()) / rho.sum();
}

double position_width(const Grid1D& grid, const ComplexVector& psi) {
    const RealVector rho = density(psi);
    const RealVector x = grid.points();
    const double mean = rho.dot(x) / rho.sum();
    const double second = rho.dot(x.cwiseAbs2()) / rho.sum();
    return std::sqrt(std::max(0.0, second - mean * mean));
}

double mean_momentum(const Grid1D& grid, const ComplexVector& psi, double hbar) {
    require(psi.size() == grid.n(), "mean_momentum: size mismatch");
    ComplexVector work = psi;
    FourierPlan plan(grid.n(), 1);
    plan.forward(work.data());
    const RealVector weights = work.cwiseAbs2();
    return hbar * weights.dot(grid.wavenumbers()) / weights.sum();
}

Complex overlap(const Grid1D& grid, const ComplexVector& a, const ComplexVector& b) {
    return a.dot(b) * grid.dx();
}

double max_kinetic_energy(const Grid1D& grid, double mass, double hbar) {
    const double k = kPi / grid.dx();
    return hbar * hbar * k * k / (2.0 * mass);
}

RealVector potential_table(const Grid1D& grid, const Potential1D& v) {
    RealVector out(grid.n());
    for (Index i = 0; i < grid.n(); ++i) out(i) = v.value(grid.x(i));
    return out;
}

RealVector mask_profile(const Grid1D& grid, const AbsorbingMask& mask) {
    RealVector out = RealVector::Ones(grid.n());
    if (mask.width <= 0.0) return out;
    for (Index i = 0; i < grid.n(); ++i) {
        const double d = std::min(grid.x(i) - grid.x_min(), grid.x_max() - grid.x(i));
        if (d < mask.width) out(i) = std::pow(std::sin(0.5 * kPi * d / mask.width), mask.exponent);
    }
    return out;
}

// ---------------------------------------------------------------------------

SplitStep1D::SplitStep1D(const Grid1D& grid, double mass, const RealVector& potential, double dt,
                         double hbar)
    : grid_(grid), mass_(mass), dt_(dt), hbar_(hbar), plan_(grid.n(), 1) {
    require(mass > 0.0, "SplitStep1D: mass must be positive");
    check_cfl(dt, max_kinetic_energy(grid, mass, hbar), hbar);
    const RealVector k = grid.wavenumbers();
    kinetic_table_ = (hbar * hbar / (2.0 * mass)) * k.cwiseAbs2();
    kinetic_phase_.resize(grid.n());
    const double inv_n = 1.0 / static_cast<double>(grid.n());
    for (Index j = 0; j < grid.n(); ++j)
        kinetic_phase_(j) = inv_n * phase(-kinetic_table_(j) * dt / hbar);
    set_potential(potential);
}

void SplitStep1D::set_potential(const RealVector& potential) {
    require(potential.size() == grid_.n(), "SplitStep1D: potential size mismatch");
    potential_ = potential;
    half_phase_.resize(grid_.n());
    for (Index i = 0; i < grid_.n(); ++i) half_phase_(i) = phase(-0.5 * potential(i) * dt_ / hbar_);
}

void SplitStep1D::half_potential(ComplexVector& psi) const { psi.array() *= half_phase_.array(); }

void SplitStep1D::kinetic(ComplexVector& psi) const {
    plan_.forward(psi.data());
    psi.array() *= kinetic_phase_.array();
    plan_.inverse(psi.data());
}

void SplitStep1D::step(ComplexVector& psi) const {
    require(psi.size() == grid_.n(), "SplitStep1D: state size mismatch");
    half_potential(psi);
    kinetic(psi);
    half_potential(psi);
}

double SplitStep1D::kinetic_energy(const ComplexVector& psi) const {
    ComplexVector work = psi;
    plan_.forward(work.data());
    return work.cwiseAbs2().dot(kinetic_table_) * grid_.dx() / static_cast<double>(grid_.n());
}

double SplitStep1D::potential_energy(const ComplexVector& psi) const {
    return psi.cwiseAbs2().dot(potential_) * grid_.dx();
}

// ---------------------------------------------------------------------------

SplitStepPropagator::SplitStepPropagator(const Grid1D& grid_a, const Grid1D& grid_b,
                                         double mass_a, double mass_b,
                                         const PotentialSpec& potential, double dt, double hbar,
                                         std::optional<AbsorbingMask> mask)
    : grid_a_(grid_a), grid_b_(grid_b), dt_(dt), hbar_(hbar), plan_(grid_a.n(), grid_b.n()) {
    require(mass_a > 0.0 && mass_b > 0.0, "SplitStepPropagator: masses must be positive");
    check_cfl(dt, max_kinetic_energy(grid_a, mass_a, hbar) + max_kinetic_energy(grid_b, mass_b, hbar),
              hbar);
    potential.interaction.validate();
    if (potential.external_a) potential.external_a->validate();
    if (potential.external_b) potential.external_b->validate();

    const Index na = grid_a.n();
    const Index nb = grid_b.n();
    const RealVector ext_a = potential.external_a ? potential_table(grid_a, *potential.external_a)
                                                  : RealVector::Zero(na);
    const RealVector ext_b = potential.external_b ? potential_table(grid_b, *potential.external_b)
                                                  : RealVector::Zero(nb);
    potential_.resize(na, nb);
    half_phase_.resize(na, nb);
    for (Index i = 0; i < na; ++i)
        for (Index j = 0; j < nb; ++j) {
            potential_(i, j) =
                potential.interaction.value(grid_a.x(i) - grid_b.x(j)) + ext_a(i) + ext_b(j);
            half_phase_(i, j) = phase(-0.5 * potential_(i, j) * dt / hbar);
        }

    const RealVector ka = grid_a.wavenumbers();
    const RealVector kb = grid_b.wavenumbers();
    const double inv_n = 1.0 / static_cast<double>(na * nb);
    kinetic_table_.resize(na, nb);
    kinetic_phase_.resize(na, nb);
    for (Index i = 0; i < na; ++i)
        for (Index j = 0; j < nb; ++j) {
            kinetic_table_(i, j) = hbar * hbar *
                                   (ka(i) * ka(i) / (2.0 * mass_a) + kb(j) * kb(j) / (2.0 * mass_b));
            kinetic_phase_(i, j) = inv_n * phase(-kinetic_table_(i, j) * dt / hbar);
        }

    if (mask && mask->width > 0.0) {
        const RealVector ma = mask_profile(grid_a, *mask);
        const RealVector mb = mask_profile(grid_b, *mask);
        mask_ = ma * mb.transpose();
    }
}

void SplitStepPropagator::step(ComplexMatrix& amplitudes) const {
    require(amplitudes.rows() == grid_a_.n() && amplitudes.cols() == grid_b_.n(),
            "SplitStepPropagator: amplitude grid size mismatch");
    amplitudes.array() *= half_phase_.array();
    plan_.forward(amplitudes.data());
    amplitudes.array() *= kinetic_phase_.array();
    plan_.inverse(amplitudes.data());
    amplitudes.array() *= half_phase_.array();
    if (mask_) amplitudes.array() *= mask_->array();
}

double SplitStepPropagator::kinetic_energy(const ComplexMatrix& amplitudes) const {
    ComplexMatrix work = amplitudes;
    plan_.forward(work.data());
    const double cell = grid_a_.dx() * grid_b_.dx();
    return (work.cwiseAbs2().cwiseProduct(kinetic_table_)).sum() * cell /
           static_cast<double>(work.size());
}

double SplitStepPropagator::potential_energy(const ComplexMatrix& amplitudes) const {
    return (amplitudes.cwiseAbs2().cwiseProduct(potential_)).sum() * grid_a_.dx() * grid_b_.dx();
}

double SplitStepPropagator::energy(const ComplexMatrix& amplitudes) const {
    return kinetic_energy(amplitudes) + potential_energy(amplitudes);
}

TwoParticleWavefunction split_step(const TwoParticleWavefunction& psi, const PotentialSpec& v,
                                   double dt, double hbar) {
    const SplitStepPropagator prop(psi.grid_a, psi.grid_b, psi.mass_a, psi.mass_b, v, dt, hbar);
    TwoParticleWavefunction out = psi;
    prop.step(out.amplitudes);
    return out;
}

RealVector schmidt_spectrum(const ComplexMatrix& amplitudes, double dx_a, double dx_b) {
    return singular_values(amplitudes * std::sqrt(dx_a * dx_b));
}

double entanglement_entropy(const ComplexMatrix& amplitudes, double dx_a, double dx_b) {
    const RealVector lambda = schmidt_spectrum(amplitudes, dx_a, dx_b);
    double s = 0.0;
    for (Index k = 0; k < lambda.size(); ++k) {
        const double p = lambda(k) * lambda(k);
        if (p > 1e-300) s -= p * std::log(p);
    }
    return std::max(0.0, s);
}

double entanglement_entropy(const TwoParticleWavefunction& psi) {
    require(std::abs(psi.norm() - 1.0) <= 1e-8, "entanglement_entropy: state is not normalised");
    return entanglement_entropy(psi.amplitudes, psi.grid_a.dx(), psi.grid_b.dx());
}

double mean_position_a(const TwoParticleWavefunction& psi) {
    const RealVector marginal = psi.amplitudes.cwiseAbs2().rowwise().sum();
    return marginal.dot(psi.grid_a.points()) / marginal.sum();
}

double mean_position_b(const TwoParticleWavefunction& psi) {
    const RealVector marginal = psi.amplitudes.cwiseAbs2().colwise().sum().transpose();
    return marginal.dot(psi.grid_b.points()) / marginal.sum();
}

double energy(const TwoParticleWavefunction& psi, const PotentialSpec& v, double hbar) {
    // dt only enters the cached phases, not the energy; pick one that
    // satisfies the step-size precondition.
    const double e_max = max_kinetic_energy(psi.grid_a, psi.mass_a, hbar) +
                         max_kinetic_energy(psi.grid_b, psi.mass_b, hbar);
    const SplitStepPropagator prop(psi.grid_a, psi.grid_b, psi.mass_a, psi.mass_b, v,
                                   0.25 * hbar / e_max, hbar);
    return prop.energy(psi.amplitudes);
}

ExactRun run_exact(const TwoParticleWavefunction& psi0, const PotentialSpec& v, double dt,
                   double t_final, double hbar, int sample_every, bool with_entropy,
                   std::optional<AbsorbingMask> mask) {
    const SplitStepPropagator prop(psi0.grid_a, psi0.grid_b, psi0.mass_a, psi0.mass_b, v, dt, hbar,
                                   mask);
    const std::int64_t steps = step_count(t_final, dt);
    ExactRun run{{}, {}, {}, {}, {}, {}, psi0};
    TwoParticleWavefunction& psi = run.final_state;
    auto record = [&](std::int64_t k) {
        run.times.push_back(static_cast<double>(k) * dt);
        run.norm.push_back(psi.norm());
        run.energy.push_back(prop.energy(psi.amplitudes));
        run.entropy.push_back(with_entropy ? entanglement_entropy(psi.amplitudes, psi.grid_a.dx(),
                                                                  psi.grid_b.dx())
                                           : std::nan(""));
        run.mean_a.push_back(mean_position_a(psi));
        run.mean_b.push_back(mean_position_b(psi));
    };
    record(0);
    for (std::int64_t k = 1; k <= steps; ++k) {
        prop.step(psi.amplitudes);
        if (sample_now(k, steps, sample_every)) record(k);
    }
    return run;
}

// ---------------------------------------------------------------------------

ComplexMatrix reconstruct_from_com(const ComSetup& setup, const ComplexVector& g_cm,
                                   const ComplexVector& g_rel) {
    require(g_cm.size() == setup.grid_cm.n() && g_rel.size() == setup.grid_rel.n(),
            "reconstruct_from_com: factor sizes do not match the grids");
    const Index na = setup.grid_a.n();
    const Index nb = setup.grid_b.n();
    ComplexMatrix out(na, nb);
    for (Index i = 0; i < na; ++i)
        for (Index j = 0; j < nb; ++j) {
            const double xa = setup.grid_a.x(i);
            const double xb = setup.grid_b.x(j);
            out(i, j) = interpolate(setup.grid_cm, g_cm, 0.5 * (xa + xb)) *
                        interpolate(setup.grid_rel, g_rel, xa - xb);
        }
    return out;
}

ComplexMatrix to_com_frame(const TwoParticleWavefunction& psi, const Grid1D& grid_cm,
                           const Grid1D& grid_rel) {
    const Grid1D& ga = psi.grid_a;
    const Grid1D& gb = psi.grid_b;
    ComplexMatrix out = ComplexMatrix::Zero(grid_cm.n(), grid_rel.n());
    for (Index p = 0; p < grid_cm.n(); ++p)
        for (Index q = 0; q < grid_rel.n(); ++q) {
            const double xa = grid_cm.x(p) + 0.5 * grid_rel.x(q);
            const double xb = grid_cm.x(p) - 0.5 * grid_rel.x(q);
            const double u = (xa - ga.x_min()) / ga.dx();
            const double w = (xb - gb.x_min()) / gb.dx();
            if (u < 0.0 || w < 0.0 || u > static_cast<double>(ga.n() - 1) ||
                w > static_cast<double>(gb.n() - 1))
                continue;
            const auto i0 = std::min(static_cast<Index>(u), ga.n() - 2);
            const auto j0 = std::min(static_cast<Index>(w), gb.n() - 2);
            const double fu = u - static_cast<double>(i0);
            const double fw = w - static_cast<double>(j0);
            out(p, q) = (1 - fu) * (1 - fw) * psi.amplitudes(i0, j0) +
                        fu * (1 - fw) * psi.amplitudes(i0 + 1, j0) +
                        (1 - fu) * fw * psi.amplitudes(i0, j0 + 1) +
                        fu * fw * psi.amplitudes(i0 + 1, j0 + 1);
        }
    return out;
}

ComSeparabilityResult com_separability_check(const ComSetup& setup, const ComplexVector& g_cm,
                                             const ComplexVector& g_rel,
                                             const Potential1D& interaction, double t_final,
                                             double dt, double hbar, int sample_every) {
    require(std::abs(setup.mass_a - setup.mass_b) <= 1e-12 * setup.mass_a,
            "com_separability_check: masses differ (" + std::to_string(setup.mass_a) + " vs " +
                std::to_string(setup.mass_b) + "); the CM map requires equal masses");
    interaction.validate();
    const double m = setup.mass_a;
    const SplitStep1D cm(setup.grid_cm, 2.0 * m, RealVector::Zero(setup.grid_cm.n()), dt, hbar);
    const SplitStep1D rel(setup.grid_rel, 0.5 * m, potential_table(setup.grid_rel, interaction), dt,
                          hbar);
    PotentialSpec full;
    full.interaction = interaction;
    const SplitStepPropagator prop(setup.grid_a, setup.grid_b, m, m, full, dt, hbar);

    ComplexVector cm_state = g_cm;
    ComplexVector rel_state = g_rel;
    TwoParticleWavefunction psi{setup.grid_a, setup.grid_b,
                                reconstruct_from_com(setup, g_cm, g_rel), m, m};
    const double n0 = psi.norm();
    require(n0 > 0.0, "com_separability_check: reconstructed state vanishes on the grid");
    psi.amplitudes /= n0;

    ComSeparabilityResult result;
    const std::int64_t steps = step_count(t_final, dt);
    auto record = [&](std::int64_t k) {
        result.times.push_back(static_cast<double>(k) * dt);
        result.entropy_ab.push_back(
            entanglement_entropy(psi.amplitudes, setup.grid_a.dx(), setup.grid_b.dx()));
    };
    record(0);
    for (std::int64_t k = 1; k <= steps; ++k) {
        cm.step(cm_state);
        rel.step(rel_state);
        prop.step(psi.amplitudes);
        if (sample_now(k, steps, sample_every)) record(k);
    }
    const ComplexMatrix separated = reconstruct_from_com(setup, cm_state, rel_state) / n0;
    result.l2_error = std::sqrt((separated - psi.amplitudes).cwiseAbs2().sum() * setup.grid_a.dx() *
                                setup.grid_b.dx());
    result.final_entropy_ab = result.entropy_ab.back();
    return result;
}

// ---------------------------------------------------------------------------

namespace {

// Mean-field potentials U_A(x_A) = dx sum_j rho_B[j] V(x_A - x_B[j]) and
// U_B(x_B) = dx sum_i rho_A[i] V(x_A[i] - x_B), evaluated as zero-padded
// linear convolutions. Requires a common dx.
class MeanFieldConvolution {
public:
    MeanFieldConvolution(const Grid1D& ga, const Grid1D& gb, const Potential1D& v)
        : na_(ga.n()), nb_(gb.n()), dx_(ga.dx()), size_(2 * std::max(ga.n(), gb.n())),
          plan_(size_, 1) {
        require(std::abs(ga.dx() - gb.dx()) <= 1e-12 * ga.dx(),
                "Hartree convolution requires both grids to share dx");
        // kernel[m'] = V(x_A[0] - x_B[0] + (m' - (nb - 1)) dx), m' in [0, na + nb - 2].
        kernel_hat_ = ComplexVector::Zero(size_);
        const double offset = ga.x_min() - gb.x_min();
        for (Index m = 0; m < na_ + nb_ - 1; ++m)
            kernel_hat_(m) = v.value(offset + static_cast<double>(m - (nb_ - 1)) * dx_);
        plan_.forward(kernel_hat_.data());
        kernel_hat_ *= dx_ / static_cast<double>(size_);
    }

    RealVector field_on_a(const RealVector& rho_b) const {
        ComplexVector work = ComplexVector::Zero(size_);
        work.head(nb_) = rho_b.cast<Complex>();
        convolve(work);
        return work.segment(nb_ - 1, na_).real();
    }

    RealVector field_on_b(const RealVector& rho_a) const {
        ComplexVector work = ComplexVector::Zero(size_);
        for (Index i = 0; i < na_; ++i) work(i) = rho_a(na_ - 1 - i);
        convolve(work);
        RealVector out(nb_);
        for (Index j = 0; j < nb_; ++j) out(j) = work(na_ + nb_ - 2 - j).real();
        return out;
    }

private:
    void convolve(ComplexVector& work) const {
        plan_.forward(work.data());
        work.array() *= kernel_hat_.array();
        plan_.inverse(work.data());
    }

    Index na_;
    Index nb_;
    double dx_;
    Index size_;
    ComplexVector kernel_hat_;
    FourierPlan plan_;
};

RealVector external_table(const Grid1D& grid, const std::optional<Potential1D>& v) {
    return v ? potential_table(grid, *v) : RealVector::Zero(grid.n());
}

void check_factor(const Factor& f, const char* name) {
    require(f.psi.size() == f.grid.n(), std::string(name) + ": size does not match its grid");
    require(f.mass > 0.0, std::string(name) + ": mass must be positive");
    require(std::abs(norm(f.grid, f.psi) - 1.0) <= 1e-8, std::string(name) + " is not normalised");
}

}  // namespace

HartreeTrace hartree_propagate(const Factor& a, const Factor& b, const PotentialSpec& v, double dt,
                               double t_final, double hbar, int sample_every) {
    check_factor(a, "hartree_propagate: psi_A");
    check_factor(b, "hartree_propagate: psi_B");
    v.interaction.validate();
    check_cfl(dt, max_kinetic_energy(a.grid, a.mass, hbar) + max_kinetic_energy(b.grid, b.mass, hbar),
              hbar);
    const MeanFieldConvolution field(a.grid, b.grid, v.interaction);
    const RealVector ext_a = external_table(a.grid, v.external_a);
    const RealVector ext_b = external_table(b.grid, v.external_b);
    SplitStep1D step_a(a.grid, a.mass, ext_a, dt, hbar);
    SplitStep1D step_b(b.grid, b.mass, ext_b, dt, hbar);

    HartreeTrace trace{{}, {}, {}, {}, {}, {}, a, b};
    ComplexVector& psi_a = trace.final_a.psi;
    ComplexVector& psi_b = trace.final_b.psi;

    // Potential kicks leave |psi|^2 unchanged, so both factors can take their
    // half kicks with fields built from the same densities.
    auto refresh = [&] {
        const RealVector u_a = field.field_on_a(density(psi_b));
        const RealVector u_b = field.field_on_b(density(psi_a));
        step_a.set_potential(ext_a + u_a);
        step_b.set_potential(ext_b + u_b);
        return u_a;
    };
    auto record = [&](std::int64_t k) {
        const RealVector u_a = refresh();
        trace.times.push_back(static_cast<double>(k) * dt);
        trace.norm_a.push_back(norm(a.grid, psi_a));
        trace.norm_b.push_back(norm(b.grid, psi_b));
        const double interaction = density(psi_a).dot(u_a) * a.grid.dx();
        trace.energy.push_back(step_a.kinetic_energy(psi_a) + step_b.kinetic_energy(psi_b) +
                               density(psi_a).dot(ext_a) * a.grid.dx() +
                               density(psi_b).dot(ext_b) * b.grid.dx() + interaction);
        trace.mean_a.push_back(mean_position(a.grid, psi_a));
        trace.mean_b.push_back(mean_position(b.grid, psi_b));
    };

    const std::int64_t steps = step_count(t_final, dt);
    record(0);
    for (std::int64_t k = 1; k <= steps; ++k) {
        refresh();
        step_a.half_potential(psi_a);
        step_b.half_potential(psi_b);
        step_a.kinetic(psi_a);
        step_b.kinetic(psi_b);
        refresh();
        step_a.half_potential(psi_a);
        step_b.half_potential(psi_b);
        if (sample_now(k, steps, sample_every)) record(k);
    }
    return trace;
}

double hartree_consistency_residual(const Factor& a, const Factor& b, const RealMatrix& v_table) {
    require(v_table.rows() == a.grid.n() && v_table.cols() == b.grid.n(),
            "hartree_consistency_residual: potential table does not match the grids");
    const RealVector wa = density(a.psi) * a.grid.dx();
    const RealVector wb = density(b.psi) * b.grid.dx();
    const double total_a = wa.sum();
    const double total_b = wb.sum();
    // <V>_A is a function of x_B and <V>_B a function of x_A.
    const RealVector avg_over_a = (v_table.transpose() * wa) / total_a;
    const RealVector avg_over_b = (v_table * wb) / total_b;
    const double avg_ab = wa.dot(avg_over_b) / total_a;
    double sum = 0.0;
    for (Index i = 0; i < v_table.rows(); ++i)
        for (Index j = 0; j < v_table.cols(); ++j) {
            const double r = v_table(i, j) - avg_over_a(j) - avg_over_b(i) + avg_ab;
            sum += wa(i) * wb(j) * r * r;
        }
    return std::sqrt(sum / (total_a * total_b));
}

double hartree_consistency_residual(const Factor& a, const Factor& b,
                                    const Potential1D& interaction) {
    interaction.validate();
    RealMatrix table(a.grid.n(), b.grid.n());
    for (Index i = 0; i < a.grid.n(); ++i)
        for (Index j = 0; j < b.grid.n(); ++j)
            table(i, j) = interaction.value(a.grid.x(i) - b.grid.x(j));
    return hartree_consistency_residual(a, b, table);
}

ClassicalTrace classical_limit_propagate(const Factor& a, const Factor& b, const PotentialSpec& v,
                                         double dt, double t_final, double hbar,
                                         int sample_every) {
    check_factor(a, "classical_limit_propagate: psi_A");
    check_factor(b, "classical_limit_propagate: psi_B");
    v.interaction.validate();
    const double limit = width_limit(v.interaction);
    require(position_width(a.grid, a.psi) <= limit && position_width(b.grid, b.psi) <= limit,
            "classical_limit_propagate: packet widths must not exceed range / 5");
    check_cfl(dt, max_kinetic_energy(a.grid, a.mass, hbar) + max_kinetic_energy(b.grid, b.mass, hbar),
              hbar);

    const RealVector ext_a = external_table(a.grid, v.external_a);
    const RealVector ext_b = external_table(b.grid, v.external_b);
    const RealVector xa = a.grid.points();
    const RealVector xb = b.grid.points();
    SplitStep1D step_a(a.grid, a.mass, ext_a, dt, hbar);
    SplitStep1D step_b(b.grid, b.mass, ext_b, dt, hbar);

    ClassicalTrace trace{{}, {}, {}, {}, {}, 0.0, a, b};
    ComplexVector& psi_a = trace.final_a.psi;
    ComplexVector& psi_b = trace.final_b.psi;

    auto external_force = [](const std::optional<Potential1D>& ext, double x) {
        return ext ? -ext->gradient(x) : 0.0;
    };
    double qa = mean_position(a.grid, a.psi);
    double qb = mean_position(b.grid, b.psi);
    double va = mean_momentum(a.grid, a.psi, hbar) / a.mass;
    double vb = mean_momentum(b.grid, b.psi, hbar) / b.mass;
    auto forces = [&](double pa, double pb) {
        const double g = v.interaction.gradient(pa - pb);
        return std::pair{-g + external_force(v.external_a, pa), g + external_force(v.external_b, pb)};
    };
    auto [fa, fb] = forces(qa, qb);

    auto record = [&](std::int64_t k) {
        const double ma = mean_position(a.grid, psi_a);
        const double mb = mean_position(b.grid, psi_b);
        trace.times.push_back(static_cast<double>(k) * dt);
        trace.mean_a.push_back(ma);
        trace.mean_b.push_back(mb);
        trace.classical_a.push_back(qa);
        trace.classical_b.push_back(qb);
        trace.max_deviation = std::max({trace.max_deviation, std::abs(ma - qa), std::abs(mb - qb)});
    };

    const std::int64_t steps = step_count(t_final, dt);
    record(0);
    for (std::int64_t k = 1; k <= steps; ++k) {
        const double ma = mean_position(a.grid, psi_a);
        const double mb = mean_position(b.grid, psi_b);
        const double v0 = v.interaction.value(ma - mb);
        const double g = v.interaction.gradient(ma - mb);
        step_a.set_potential(ext_a + (v0 + g * (xa.array() - ma)).matrix());
        step_b.set_potential(ext_b - (g * (xb.array() - mb)).matrix());
        step_a.step(psi_a);
        step_b.step(psi_b);

        qa += va * dt + 0.5 * fa / a.mass * dt * dt;
        qb += vb * dt + 0.5 * fb / b.mass * dt * dt;
        const auto [na, nb] = forces(qa, qb);
        va += 0.5 * (fa + na) / a.mass * dt;
        vb += 0.5 * (fb + nb) / b.mass * dt;
        fa = na;
        fb = nb;
        if (sample_now(k, steps, sample_every)) record(k);
    }
    return trace;
}

TestParticleResult test_particle_scenario(const TestParticleSetup& setup, double mass_ratio,
                                          double heavy_width, const PotentialSpec& v, double dt,
                                          double t_final, double hbar, int sample_every) {
    require(mass_ratio >= 1.0, "test_particle_scenario: mass_ratio must be at least 1");
    v.interaction.validate();
    require(heavy_width <= width_limit(v.interaction),
            "test_particle_scenario: heavy packet must be narrower than range / 5");
    const ComplexVector light =
        init_gaussian(setup.grid_light, setup.light_x0, setup.light_p0, setup.light_width, hbar);
    const ComplexVector heavy = init_gaussian(setup.grid_heavy, setup.heavy_x0, 0.0, heavy_width, hbar);

    auto entropy_series = [&](double heavy_mass) {
        const auto psi0 = TwoParticleWavefunction::product(setup.grid_light, light, setup.grid_heavy,
                                                           heavy, setup.light_mass, heavy_mass);
        return run_exact(psi0, v, dt, t_final, hbar, sample_every);
    };
    const ExactRun heavy_run = entropy_series(mass_ratio * setup.light_mass);
    const ExactRun equal_run = entropy_series(setup.light_mass);

    TestParticleResult out;
    out.times = heavy_run.times;
    out.entropy = heavy_run.entropy;
    out.entropy_equal_mass = equal_run.entropy;
    out.final_entropy = heavy_run.entropy.back();
    out.final_entropy_equal_mass = equal_run.entropy.back();
    return out;
}

}  // namespace entfree::continuum
