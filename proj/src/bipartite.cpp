#include "entfree/bipartite.hpp"

#include <cmath>
#include <string>

#include "entfree/errors.hpp"

namespace entfree {

namespace {

constexpr double kPhaseAnchorTol = 1e-8;

// Phase that makes the first sizeable component of `v` real positive.
Complex anchor_phase(const ComplexVector& v) {
    for (Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v(i));
        if (mag > kPhaseAnchorTol) return std::conj(v(i)) / mag;
    }
    return 1.0;
}

void require_dims(Index dA, Index dB) {
    require(dA > 0 && dB > 0, "bipartite dimensions must be positive");
    require(dA * dB <= kMaxBipartiteDim,
            "bipartite dimension dA*dB = " + std::to_string(dA * dB) + " exceeds " +
                std::to_string(kMaxBipartiteDim));
}

}  // namespace

BipartiteState::BipartiteState(Index dA, Index dB, ComplexVector amplitudes, double tol)
    : dA_(dA), dB_(dB), amplitudes_(std::move(amplitudes)) {
    require_dims(dA, dB);
    require(amplitudes_.size() == dA * dB, "BipartiteState: amplitude count " +
                                               std::to_string(amplitudes_.size()) +
                                               " != dA*dB = " + std::to_string(dA * dB));
    require(std::abs(amplitudes_.norm() - 1.0) <= tol, "BipartiteState: state is not normalised");
}

BipartiteState BipartiteState::product(const ComplexVector& a, const ComplexVector& b) {
    return BipartiteState(a.size(), b.size(), kron(a, b));
}

BipartiteState BipartiteState::normalised(Index dA, Index dB, ComplexVector raw) {
    const double n = raw.norm();
    require(n > 0.0, "BipartiteState: zero vector cannot be normalised");
    return BipartiteState(dA, dB, raw / n);
}

ComplexMatrix BipartiteState::amplitude_matrix() const {
    return Eigen::Map<const ComplexMatrix>(amplitudes_.data(), dA_, dB_);
}

ComplexMatrix BipartiteState::projector() const { return amplitudes_ * amplitudes_.adjoint(); }

ComplexVector SchmidtDecomposition::reconstruct() const {
    ComplexVector out = ComplexVector::Zero(left.rows() * right.rows());
    for (Index k = 0; k < coefficients.size(); ++k)
        out += coefficients(k) * kron(ComplexVector(left.col(k)), ComplexVector(right.col(k)));
    return out;
}

SchmidtDecomposition schmidt_decompose(const BipartiteState& state) {
    const Svd s = svd(state.amplitude_matrix(), /*full_bases=*/true);
    SchmidtDecomposition out;
    out.coefficients = s.singular_values;
    out.left = s.u;
    out.right = s.v.conjugate();
    const Index paired = out.coefficients.size();
    for (Index k = 0; k < out.left.cols(); ++k) {
        const Complex phase = anchor_phase(out.left.col(k));
        out.left.col(k) *= phase;
        if (k < paired) out.right.col(k) *= std::conj(phase);
    }
    for (Index k = paired; k < out.right.cols(); ++k)
        out.right.col(k) *= anchor_phase(out.right.col(k));
    return out;
}

ComplexMatrix reduced_density(const BipartiteState& state, Subsystem traced) {
    const ComplexMatrix m = state.amplitude_matrix();
    if (traced == Subsystem::B) return m * m.adjoint();
    return m.transpose() * m.conjugate();
}

double purity(const BipartiteState& state) {
    const RealVector alpha = singular_values(state.amplitude_matrix());
    return alpha.array().pow(4).sum();
}

double purity_from_reduced(const BipartiteState& state) {
    const ComplexMatrix rho = reduced_density(state, Subsystem::B);
    return hs_inner(rho, rho).real();
}

bool is_product(const BipartiteState& state, double tol) {
    const RealVector alpha = singular_values(state.amplitude_matrix());
    return alpha.size() < 2 || alpha(1) < tol;
}

ComplexMatrix HamiltonianDecomposition::reconstruct() const {
    const Index dA = local_a.rows();
    const Index dB = local_b.rows();
    ComplexMatrix h = kron(local_a, identity(dB)) + kron(identity(dA), local_b) + coupling;
    h.diagonal().array() += scalar;
    return h;
}

HamiltonianDecomposition factorise_hamiltonian(const ComplexMatrix& h, Index dA, Index dB,
                                               double tol) {
    require_dims(dA, dB);
    require(h.rows() == dA * dB && h.cols() == dA * dB,
            "factorise_hamiltonian: operator dimension does not match dA*dB");
    require(is_hermitian(h, tol), "factorise_hamiltonian: operator is not Hermitian");

    HamiltonianDecomposition d;
    d.scalar = h.trace().real() / static_cast<double>(dA * dB);
    d.local_a = partial_trace(h, Subsystem::B, dA, dB) / static_cast<double>(dB);
    d.local_a.diagonal().array() -= d.scalar;
    d.local_b = partial_trace(h, Subsystem::A, dA, dB) / static_cast<double>(dA);
    d.local_b.diagonal().array() -= d.scalar;
    d.coupling = h - kron(d.local_a, identity(dB)) - kron(identity(dA), d.local_b);
    d.coupling.diagonal().array() -= d.scalar;
    d.coupling_norm = hs_norm(d.coupling);
    return d;
}

double coupling_coefficient(const ComplexMatrix& h, const ComplexVector& psiA,
                            const ComplexVector& psiB) {
    const Index dA = psiA.size();
    const Index dB = psiB.size();
    require_dims(dA, dB);
    require(h.rows() == dA * dB && h.cols() == dA * dB,
            "coupling_coefficient: operator dimension does not match the product state");
    require(std::abs(psiA.norm() - 1.0) <= 1e-10 && std::abs(psiB.norm() - 1.0) <= 1e-10,
            "coupling_coefficient: local vectors must be normalised");
    require(is_hermitian(h), "coupling_coefficient: operator is not Hermitian");

    const ComplexVector image = h * kron(psiA, psiB);
    ComplexMatrix w = Eigen::Map<const ComplexMatrix>(image.data(), dA, dB);
    // (Q_A (x) Q_B) acts on the amplitude matrix as Q_A W Q_B^T.
    w -= psiA * (psiA.adjoint() * w);
    w -= (w * psiB.conjugate()) * psiB.transpose();
    return w.cwiseAbs2().sum();
}

RealVector operator_schmidt_coefficients(const ComplexMatrix& u, Index dA, Index dB) {
    require_dims(dA, dB);
    require(u.rows() == dA * dB && u.cols() == dA * dB,
            "operator_schmidt_coefficients: operator dimension does not match dA*dB");
    ComplexMatrix realigned(dA * dA, dB * dB);
    for (Index i = 0; i < dA; ++i)
        for (Index j = 0; j < dA; ++j)
            for (Index k = 0; k < dB; ++k)
                for (Index l = 0; l < dB; ++l)
                    realigned(i * dA + j, k * dB + l) = u(i * dB + k, j * dB + l);
    return singular_values(realigned);
}

std::string_view to_string(UnitaryClass::Tag tag) {
    switch (tag) {
        case UnitaryClass::Tag::Local: return "Local";
        case UnitaryClass::Tag::SwapLocal: return "SwapLocal";
        case UnitaryClass::Tag::Entangling: return "Entangling";
    }
    return "Entangling";
}

namespace {

bool has_rank_one(const RealVector& s, double tol) {
    return s.size() < 2 || s(1) <= tol * s(0);
}

}  // namespace

UnitaryClass classify_unitary_2q(const ComplexMatrix& u, double tol) {
    require(u.rows() == 4 && u.cols() == 4, "classify_unitary_2q: expected a 4x4 operator");
    require(is_unitary(u), "classify_unitary_2q: operator is not unitary");

    UnitaryClass out;
    out.operator_schmidt_coefficients = operator_schmidt_coefficients(u, 2, 2);
    if (has_rank_one(out.operator_schmidt_coefficients, tol)) {
        out.tag = UnitaryClass::Tag::Local;
    } else if (has_rank_one(operator_schmidt_coefficients(u * gates::swap(), 2, 2), tol)) {
        out.tag = UnitaryClass::Tag::SwapLocal;
    } else {
        out.tag = UnitaryClass::Tag::Entangling;
    }
    return out;
}

}  // namespace entfree
